//! Damped least-squares fits of the disorder-onset and logistic models.
//!
//! Both fits run in internal units where every parameter is of order one
//! (femtoseconds for the time axis, data-scaled axes for the logistic) and
//! are converted back on return. Initial guesses are computed from the
//! data alone, so a fit is a pure function of its input.

use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt};
use nalgebra::{DMatrix, DVector, Dyn, Owned};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitParam {
    pub name: String,
    pub value: f64,
    /// One standard deviation from the linearised covariance.
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub model: String,
    pub params: Vec<FitParam>,
    pub residual_rms: f64,
    /// Minimiser stopped on a tolerance, the gradient vanishes and every
    /// parameter is identifiable.
    pub converged: bool,
    /// Residual evaluations used by the minimiser.
    pub iterations: usize,
    pub termination: String,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|p| p.name == name).map(|p| p.value)
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|p| p.name == name).map(|p| p.std_error)
    }

    pub fn param(&self, name: &str) -> Result<f64> {
        self.get(name)
            .ok_or_else(|| Error::Contract(format!("fit `{}` has no parameter `{name}`", self.model)))
    }
}

trait Model {
    fn value(&self, x: f64, p: &[f64]) -> f64;
    fn gradient(&self, x: f64, p: &[f64], g: &mut [f64]);
}

struct Curve<'a, M> {
    model: &'a M,
    x: &'a [f64],
    y: &'a [f64],
    p: DVector<f64>,
}

impl<M: Model> Curve<'_, M> {
    fn jacobian_matrix(&self) -> DMatrix<f64> {
        let n = self.p.len();
        let mut j = DMatrix::zeros(self.x.len(), n);
        let mut g = vec![0.0; n];
        for (i, &x) in self.x.iter().enumerate() {
            self.model.gradient(x, self.p.as_slice(), &mut g);
            for (c, v) in g.iter().enumerate() {
                j[(i, c)] = *v;
            }
        }
        j
    }

    fn residual_vector(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.x.len(),
            self.x
                .iter()
                .zip(self.y)
                .map(|(&x, &y)| self.model.value(x, self.p.as_slice()) - y),
        )
    }
}

impl<M: Model> LeastSquaresProblem<f64, Dyn, Dyn> for Curve<'_, M> {
    type ResidualStorage = Owned<f64, Dyn>;
    type JacobianStorage = Owned<f64, Dyn, Dyn>;
    type ParameterStorage = Owned<f64, Dyn>;

    fn set_params(&mut self, p: &DVector<f64>) {
        self.p.copy_from(p);
    }

    fn params(&self) -> DVector<f64> {
        self.p.clone()
    }

    fn residuals(&self) -> Option<DVector<f64>> {
        let r = self.residual_vector();
        r.iter().all(|v| v.is_finite()).then_some(r)
    }

    fn jacobian(&self) -> Option<DMatrix<f64>> {
        let j = self.jacobian_matrix();
        j.iter().all(|v| v.is_finite()).then_some(j)
    }
}

struct RawFit {
    params: Vec<f64>,
    std_errors: Vec<f64>,
    residual_rms: f64,
    converged: bool,
    evaluations: usize,
    termination: String,
}

/// Largest cosine between the residual and a Jacobian column.
const GRADIENT_TOL: f64 = 1e-4;
/// Smallest accepted eigenvalue ratio of `J^T J`.
const CONDITION_TOL: f64 = 1e-13;
/// Squared eigenvector weight above which a parameter counts as loading on
/// a degenerate direction.
const LOADING_TOL: f64 = 1e-6;

fn least_squares<M: Model>(model: &M, x: &[f64], y: &[f64], p0: &[f64]) -> RawFit {
    let problem = Curve {
        model,
        x,
        y,
        p: DVector::from_column_slice(p0),
    };
    let (problem, report) = LevenbergMarquardt::new()
        .with_ftol(1e-14)
        .with_xtol(1e-14)
        .with_patience(400)
        .minimize(problem);
    let n = p0.len();
    let m = x.len();
    let r = problem.residual_vector();
    let j = problem.jacobian_matrix();
    let ssr = r.norm_squared();
    let residual_rms = (ssr / m as f64).sqrt();

    let rnorm = r.norm();
    let exact = residual_rms <= 1e-12 * y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let cosine = (0..n)
        .map(|c| {
            let col = j.column(c);
            let d = col.norm() * rnorm;
            if d == 0.0 { 0.0 } else { col.dot(&r).abs() / d }
        })
        .fold(0.0f64, f64::max);

    let jtj = j.transpose() * &j;
    let eig = jtj.symmetric_eigen();
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let degenerate: Vec<bool> = eig.eigenvalues.iter().map(|&v| !(v > CONDITION_TOL * top)).collect();
    let identifiable = top > 0.0 && !degenerate.iter().any(|&d| d);
    let sigma2 = if m > n { ssr / (m - n) as f64 } else { 0.0 };
    // a parameter with weight on a degenerate direction has unbounded variance
    let std_errors = (0..n)
        .map(|i| {
            let mut var = 0.0;
            for (k, &lam) in eig.eigenvalues.iter().enumerate() {
                let w = eig.eigenvectors[(i, k)].powi(2);
                if degenerate[k] {
                    if w > LOADING_TOL {
                        return f64::INFINITY;
                    }
                } else {
                    var += w / lam;
                }
            }
            (sigma2 * var).sqrt()
        })
        .collect();
    let params: Vec<f64> = problem.p.iter().copied().collect();
    let converged = report.termination.was_successful()
        && residual_rms.is_finite()
        && params.iter().all(|v| v.is_finite())
        && (exact || cosine < GRADIENT_TOL)
        && identifiable;
    RawFit {
        params,
        std_errors,
        residual_rms,
        converged,
        evaluations: report.number_of_evaluations,
        termination: format!("{:?}", report.termination),
    }
}

fn finish(model: &str, names: &[&str], raw: RawFit, scale: &[f64], residual_scale: f64) -> FitResult {
    FitResult {
        model: model.to_string(),
        params: names
            .iter()
            .zip(raw.params.iter().zip(&raw.std_errors))
            .zip(scale)
            .map(|((name, (v, e)), s)| FitParam {
                name: name.to_string(),
                value: v * s,
                std_error: e * s.abs(),
            })
            .collect(),
        residual_rms: raw.residual_rms * residual_scale,
        converged: raw.converged,
        iterations: raw.evaluations,
        termination: raw.termination,
    }
}

/// Parameter names of [`fit_disorder_onset`], in order.
pub const DISORDER_PARAMS: [&str; 6] = ["a", "gamma_ens", "omega", "b", "c", "g"];

/// `a exp(-gamma t) cos(omega t) + b + c exp(-g t)`.
pub fn disorder_model(t: f64, a: f64, gamma: f64, omega: f64, b: f64, c: f64, g: f64) -> f64 {
    a * (-gamma * t).exp() * (omega * t).cos() + b + c * (-g * t).exp()
}

struct Disorder;

impl Model for Disorder {
    fn value(&self, t: f64, p: &[f64]) -> f64 {
        disorder_model(t, p[0], p[1], p[2], p[3], p[4], p[5])
    }

    fn gradient(&self, t: f64, p: &[f64], g: &mut [f64]) {
        let env = (-p[1] * t).exp();
        let (s, c) = (p[2] * t).sin_cos();
        let leak = (-p[5] * t).exp();
        g[0] = env * c;
        g[1] = -t * p[0] * env * c;
        g[2] = -t * p[0] * env * s;
        g[3] = 1.0;
        g[4] = leak;
        g[5] = -t * p[4] * leak;
    }
}

const FS: f64 = 1e-15;

const GUESS_POINTS: usize = 512;

/// Fits the disorder-onset model to a population series; `t` in seconds
/// from the start of the drive.
///
/// A series without variation has no identifiable rates: it returns
/// `a = c = 0`, `b` the constant, `NaN` rates and `converged = false`.
pub fn fit_disorder_onset(t: &[f64], y: &[f64]) -> Result<FitResult> {
    check_xy(t, y, 8)?;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let spread = y.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
    let scale = [1.0, 1.0 / FS, 1.0 / FS, 1.0, 1.0, 1.0 / FS];
    if spread <= 1e-12 * mean.abs().max(1.0) {
        let raw = RawFit {
            params: vec![0.0, f64::NAN, f64::NAN, mean, 0.0, f64::NAN],
            std_errors: vec![f64::INFINITY; 6],
            residual_rms: spread,
            converged: false,
            evaluations: 0,
            termination: "constant series".into(),
        };
        return Ok(finish("disorder_onset", &DISORDER_PARAMS, raw, &scale, 1.0));
    }
    let tf: Vec<f64> = t.iter().map(|v| v / FS).collect();
    let p0 = disorder_initial_guess(&tf, y)?;
    let raw = least_squares(&Disorder, &tf, y, &p0);
    Ok(finish("disorder_onset", &DISORDER_PARAMS, raw, &scale, 1.0))
}

/// Initial guess in femtosecond units: `omega` from the strongest peak of
/// the differenced, detrended series, `gamma` from a log-linear fit of the
/// per-period half ranges, `b` from the final-tenth mean, `a` and `c` from
/// the first sample, `g = gamma / 2`. Long series are block-averaged to at
/// most `GUESS_POINTS` samples first.
fn disorder_initial_guess(t_full: &[f64], y_full: &[f64]) -> Result<[f64; 6]> {
    let block = y_full.len().div_ceil(GUESS_POINTS);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let t: Vec<f64> = t_full.chunks_exact(block).map(mean).collect();
    let y: Vec<f64> = y_full.chunks_exact(block).map(mean).collect();
    let (t, y) = (&t[..], &y[..]);
    let n = y.len();
    let span = t[n - 1] - t[0];
    let dt = span / (n - 1) as f64;

    let (slope, _) = linear_regression(t, y);
    let diff: Vec<f64> = y.windows(2).map(|w| (w[1] - w[0]) - slope * dt).collect();
    let pad = 8 * diff.len().next_power_of_two();
    let mut buf: Vec<Complex64> = diff.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(pad, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(pad).process(&mut buf);
    let min_bin = (2.0 * pad as f64 / diff.len() as f64).ceil() as usize;
    let k = (min_bin..pad / 2)
        .max_by(|&i, &j| buf[i].norm().total_cmp(&buf[j].norm()))
        .ok_or_else(|| Error::Contract("fit_disorder_onset: series too short".into()))?;
    let omega = 2.0 * std::f64::consts::PI * k as f64 / (pad as f64 * dt);
    let period = 2.0 * std::f64::consts::PI / omega;
    if span < 3.0 * period {
        return Err(Error::config(
            "analysis.series",
            format!(
                "series spans {:.3e} s but the dominant period is {:.3e} s; at least three periods are needed",
                span * FS,
                period * FS
            ),
        ));
    }

    let mut centres = Vec::new();
    let mut log_amp = Vec::new();
    let mut first_mid = None;
    let mut start = 0;
    while start < n {
        let end = t.partition_point(|&v| v < t[start] + period);
        if end >= n {
            break;
        }
        let seg = &y[start..end];
        let hi = seg.iter().copied().fold(f64::MIN, f64::max);
        let lo = seg.iter().copied().fold(f64::MAX, f64::min);
        first_mid.get_or_insert(0.5 * (hi + lo));
        if hi > lo {
            centres.push(0.5 * (t[start] + t[end - 1]));
            log_amp.push((0.5 * (hi - lo)).ln());
        }
        start = end;
    }
    let (gamma, amp0) = if centres.len() >= 2 {
        let (s, i) = linear_regression(&centres, &log_amp);
        ((-s).max(1e-3 * omega), (i + s * t[0]).exp())
    } else {
        (1e-3 * omega, 0.5 * spread_of(y))
    };

    let tail = (n / 10).max(1);
    let b = y[n - tail..].iter().sum::<f64>() / tail as f64;
    let sign = if y[0] >= first_mid.unwrap_or(b) { 1.0 } else { -1.0 };
    let a = sign * amp0;
    let t0 = t_full[0];
    let c = y_full[0] - b - a * (omega * t0).cos() * (-gamma * t0).exp();
    Ok([a, gamma, omega, b, c, 0.5 * gamma])
}

fn spread_of(y: &[f64]) -> f64 {
    let hi = y.iter().copied().fold(f64::MIN, f64::max);
    let lo = y.iter().copied().fold(f64::MAX, f64::min);
    hi - lo
}

fn linear_regression(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

fn check_xy(x: &[f64], y: &[f64], min: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Contract(format!("{} abscissae for {} values", x.len(), y.len())));
    }
    if x.len() < min {
        return Err(Error::config("analysis.points", format!("{} points, need at least {min}", x.len())));
    }
    if !x.iter().chain(y).all(|v| v.is_finite()) {
        return Err(Error::config("analysis.points", "non-finite value in input"));
    }
    Ok(())
}

/// Parameter names of [`fit_logistic`], in order.
pub const LOGISTIC_PARAMS: [&str; 3] = ["L", "k", "a"];

/// `L / (1 + exp(-k (x - a)))`.
pub fn logistic(x: f64, l: f64, k: f64, a: f64) -> f64 {
    l / (1.0 + (-k * (x - a)).exp())
}

struct Logistic;

impl Model for Logistic {
    fn value(&self, x: f64, p: &[f64]) -> f64 {
        logistic(x, p[0], p[1], p[2])
    }

    fn gradient(&self, x: f64, p: &[f64], g: &mut [f64]) {
        let e = (-p[1] * (x - p[2])).exp();
        let d = 1.0 + e;
        g[0] = 1.0 / d;
        g[1] = p[0] * e * (x - p[2]) / (d * d);
        g[2] = -p[0] * e * p[1] / (d * d);
    }
}

/// Fits the logistic saturation curve to `(x, y)` points.
pub fn fit_logistic(x: &[f64], y: &[f64]) -> Result<FitResult> {
    check_xy(x, y, 4)?;
    let xs = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let ys = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if xs == 0.0 || ys == 0.0 {
        return Err(Error::config("analysis.points", "all abscissae or all values are zero"));
    }
    let mut pts: Vec<(f64, f64)> = x.iter().zip(y).map(|(&a, &b)| (a / xs, b / ys)).collect();
    pts.sort_by(|p, q| p.0.total_cmp(&q.0));
    let (xn, yn): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();

    let l0 = yn.iter().copied().fold(f64::MIN, f64::max);
    let half = 0.5 * l0;
    let cross = pts.windows(2).find(|w| (w[0].1 - half) * (w[1].1 - half) <= 0.0 && w[0].1 != w[1].1);
    let (a0, k0) = match cross {
        Some(w) => {
            let a = w[0].0 + (half - w[0].1) * (w[1].0 - w[0].0) / (w[1].1 - w[0].1);
            let slope = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            (a, 4.0 * slope / l0)
        }
        None => (xn[xn.len() / 2], 4.0 / (xn[xn.len() - 1] - xn[0]).max(1e-3)),
    };
    let raw = least_squares(&Logistic, &xn, &yn, &[l0, k0, a0]);
    Ok(finish("logistic", &LOGISTIC_PARAMS, raw, &[ys, 1.0 / xs, xs], ys))
}
