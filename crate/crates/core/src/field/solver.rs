use rayon::prelude::*;

use super::grid::{FieldGrid, VectorField};
use super::source::SourcePlane;
use super::spectral::SpectralDerivative;
use crate::error::{Error, Result};
use crate::physics::SI;

/// Curl component `c` is `d_{a} F_{f} - d_{b} F_{g}` with
/// `CURL_TERMS[c] = ((a, f), (b, g))`.
const CURL_TERMS: [((usize, usize), (usize, usize)); 3] = [
    ((1, 2), (2, 1)),
    ((2, 0), (0, 2)),
    ((0, 1), (1, 0)),
];

/// Largest stable leapfrog step for Fourier differentiation on a cubic grid,
/// with a 0.9 safety factor, further capped so that a drive period (if given)
/// is sampled by at least 40 steps.
pub fn stable_dt(spacing: f64, drive_period: Option<f64>) -> f64 {
    let cfl = 0.9 * 2.0 / (SI.c * std::f64::consts::PI * 3f64.sqrt()) * spacing;
    match drive_period {
        Some(p) => cfl.min(p / 40.0),
        None => cfl,
    }
}

/// Recursive-convolution coefficients along one axis.
#[derive(Debug, Clone)]
struct AxisCoefficients {
    b: Vec<f64>,
    a: Vec<f64>,
    /// Index ranges along the axis where the layer is present.
    ranges: Vec<(usize, usize)>,
}

impl AxisCoefficients {
    fn new(sigma: &[f64], alpha: f64, dt: f64) -> Self {
        let eps0 = SI.eps0;
        let b: Vec<f64> = sigma
            .iter()
            .map(|&s| (-(s + alpha) * dt / eps0).exp())
            .collect();
        let a = sigma
            .iter()
            .zip(&b)
            .map(|(&s, &bb)| if s > 0.0 { s / (s + alpha) * (bb - 1.0) } else { 0.0 })
            .collect();
        let mut ranges = Vec::new();
        let mut start = None;
        for (i, &s) in sigma.iter().enumerate() {
            match (s > 0.0, start) {
                (true, None) => start = Some(i),
                (false, Some(s0)) => {
                    ranges.push((s0, i));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s0) = start {
            ranges.push((s0, sigma.len()));
        }
        Self { b, a, ranges }
    }
}

#[derive(Debug, Clone, Copy)]
struct SourceSheet {
    axis: usize,
    index: usize,
    current: [f64; 3],
}

/// Leapfrog pseudo-spectral Maxwell solver. `E` lives at integer steps and
/// `H` at half steps; every spatial derivative is a Fourier derivative.
#[derive(Debug, Clone)]
pub struct PstdSolver {
    pub grid: FieldGrid,
    deriv: SpectralDerivative,
    dt: f64,
    coefficients: [AxisCoefficients; 3],
    work: [Vec<f64>; 2],
    pending_sheet: Option<SourceSheet>,
    step: u64,
}

impl PstdSolver {
    pub fn new(grid: FieldGrid, dt: f64) -> Result<Self> {
        let limit = stable_dt(grid.spacing(), None);
        if !(dt > 0.0 && dt <= limit * (1.0 + 1e-12)) {
            return Err(Error::config(
                "grid.dt",
                format!("time step {dt:e} s outside (0, {limit:e}]"),
            ));
        }
        let alpha = grid.pml().alpha;
        let coefficients = [0, 1, 2].map(|a| AxisCoefficients::new(&grid.pml_profile[a], alpha, dt));
        let deriv = SpectralDerivative::new(grid.dims(), grid.spacing());
        let len = grid.len();
        Ok(Self {
            grid,
            deriv,
            dt,
            coefficients,
            work: [vec![0.0; len], vec![0.0; len]],
            pending_sheet: None,
            step: 0,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Completed `E` updates.
    pub fn step_index(&self) -> u64 {
        self.step
    }

    pub fn set_step_index(&mut self, step: u64) {
        self.step = step;
    }

    /// Injects the incident wave for the step starting at `t`. The magnetic
    /// sheet (centred at `t`) is added to `H` now; the electric sheet (centred
    /// at `t + dt/2`) is added by the next [`step_e`](Self::step_e).
    pub fn apply_source(&mut self, source: &SourcePlane, t: f64) -> Result<()> {
        if t < 0.0 {
            return Err(Error::Contract(format!("apply_source: negative time {t}")));
        }
        source.validate(&self.grid)?;
        let l = self.grid.spacing();
        let m = source.magnetic_current(t, l);
        let scale = -self.dt / SI.mu0_perm;
        let dh = m.map(|v| v * scale);
        if dh.iter().any(|&v| v != 0.0) {
            let dims = self.grid.dims();
            add_sheet(&mut self.grid.h, dims, source.axis, source.index, dh);
        }
        self.pending_sheet = Some(SourceSheet {
            axis: source.axis,
            index: source.index,
            current: source.electric_current(t + 0.5 * self.dt, l),
        });
        Ok(())
    }

    /// `H^{n-1/2} -> H^{n+1/2}` from the curl of `E^n`.
    pub fn step_h(&mut self) -> Result<()> {
        let scale = self.dt / SI.mu0_perm;
        let Self {
            grid,
            deriv,
            coefficients,
            work,
            ..
        } = self;
        let dims = grid.dims();
        for (c, &((a1, f1), (a2, f2))) in CURL_TERMS.iter().enumerate() {
            let [w0, w1] = work;
            deriv.derivative(a1, grid.e.component(f1), w0)?;
            stretch(dims, a1, &coefficients[a1], w0, &mut grid.pml_aux[2 * c]);
            deriv.derivative(a2, grid.e.component(f2), w1)?;
            stretch(dims, a2, &coefficients[a2], w1, &mut grid.pml_aux[2 * c + 1]);
            grid.h
                .component_mut(c)
                .par_iter_mut()
                .zip(w0.par_iter())
                .zip(w1.par_iter())
                .for_each(|((h, d0), d1)| *h -= scale * (d0 - d1));
        }
        if cfg!(debug_assertions) && !self.grid.h.all_finite() {
            return Err(Error::numeric(self.step, "non-finite magnetic field"));
        }
        Ok(())
    }

    /// `E^n -> E^{n+1}` from the curl of `H^{n+1/2}` minus the current
    /// density in `grid.j` (plus any pending source sheet).
    pub fn step_e(&mut self) -> Result<()> {
        let scale = self.dt / SI.eps0;
        let Self {
            grid,
            deriv,
            coefficients,
            work,
            pending_sheet,
            ..
        } = self;
        let dims = grid.dims();
        for (c, &((a1, f1), (a2, f2))) in CURL_TERMS.iter().enumerate() {
            let [w0, w1] = work;
            deriv.derivative(a1, grid.h.component(f1), w0)?;
            stretch(dims, a1, &coefficients[a1], w0, &mut grid.pml_aux[6 + 2 * c]);
            deriv.derivative(a2, grid.h.component(f2), w1)?;
            stretch(dims, a2, &coefficients[a2], w1, &mut grid.pml_aux[6 + 2 * c + 1]);
            let j = match c {
                0 => &grid.j.x,
                1 => &grid.j.y,
                _ => &grid.j.z,
            };
            let e = match c {
                0 => &mut grid.e.x,
                1 => &mut grid.e.y,
                _ => &mut grid.e.z,
            };
            e.par_iter_mut()
                .zip(w0.par_iter())
                .zip(w1.par_iter())
                .zip(j.par_iter())
                .for_each(|(((e, d0), d1), j)| *e += scale * ((d0 - d1) - j));
        }
        if let Some(sheet) = pending_sheet.take() {
            let de = sheet.current.map(|v| -scale * v);
            add_sheet(&mut grid.e, dims, sheet.axis, sheet.index, de);
        }
        self.step += 1;
        if cfg!(debug_assertions) && !self.grid.e.all_finite() {
            return Err(Error::numeric(self.step, "non-finite electric field"));
        }
        Ok(())
    }

    /// One full vacuum step: source, `H`, then `E` with whatever is in `grid.j`.
    pub fn advance(&mut self, source: Option<&SourcePlane>) -> Result<()> {
        if let Some(s) = source {
            let t = self.step as f64 * self.dt;
            self.apply_source(s, t)?;
        }
        self.step_h()?;
        self.step_e()
    }

    /// Curl of `field` by Fourier differentiation, ignoring the absorbing
    /// layers.
    pub fn spectral_curl(&mut self, field: &VectorField) -> Result<VectorField> {
        spectral_curl(&mut self.deriv, field)
    }
}

/// Curl of a vector field by Fourier differentiation along each axis.
pub fn spectral_curl(deriv: &mut SpectralDerivative, field: &VectorField) -> Result<VectorField> {
    let len: usize = deriv.dims().iter().product();
    if field.len() != len {
        return Err(Error::Contract(format!(
            "spectral_curl: field has {} cells, grid has {len}",
            field.len()
        )));
    }
    let mut out = VectorField::zeros(len);
    let mut w0 = vec![0.0; len];
    let mut w1 = vec![0.0; len];
    for (c, &((a1, f1), (a2, f2))) in CURL_TERMS.iter().enumerate() {
        deriv.derivative(a1, field.component(f1), &mut w0)?;
        deriv.derivative(a2, field.component(f2), &mut w1)?;
        for ((o, d0), d1) in out.component_mut(c).iter_mut().zip(&w0).zip(&w1) {
            *o = d0 - d1;
        }
    }
    Ok(out)
}

/// Adds `delta` on the plane, spread over its two neighbours with weights
/// 1/4, 1/2, 1/4 so the sheet carries nothing at the Nyquist wavenumber.
fn add_sheet(field: &mut VectorField, dims: [usize; 3], axis: usize, index: usize, delta: [f64; 3]) {
    let n = dims[axis];
    for (offset, weight) in [(n - 1, 0.25), (0, 0.5), (1, 0.25)] {
        let plane = (index + offset) % n;
        for_each_plane_cell(dims, axis, plane, |idx| {
            field.x[idx] += weight * delta[0];
            field.y[idx] += weight * delta[1];
            field.z[idx] += weight * delta[2];
        });
    }
}

fn for_each_plane_cell(dims: [usize; 3], axis: usize, index: usize, mut f: impl FnMut(usize)) {
    let [nx, ny, nz] = dims;
    match axis {
        0 => {
            for z in 0..nz {
                for y in 0..ny {
                    f(index + nx * (y + ny * z));
                }
            }
        }
        1 => {
            for z in 0..nz {
                for x in 0..nx {
                    f(x + nx * (index + ny * z));
                }
            }
        }
        _ => {
            let base = nx * ny * index;
            for p in 0..nx * ny {
                f(base + p);
            }
        }
    }
}

/// Replaces `deriv` by its stretched-coordinate counterpart inside the layer
/// normal to `axis`, advancing the convolution state `psi`.
fn stretch(
    dims: [usize; 3],
    axis: usize,
    coef: &AxisCoefficients,
    deriv: &mut [f64],
    psi: &mut [f64],
) {
    if coef.ranges.is_empty() {
        return;
    }
    let [nx, ny, nz] = dims;
    let mut update = |idx: usize, i: usize| {
        let p = coef.b[i] * psi[idx] + coef.a[i] * deriv[idx];
        psi[idx] = p;
        deriv[idx] += p;
    };
    match axis {
        0 => {
            for row in 0..ny * nz {
                for &(lo, hi) in &coef.ranges {
                    for x in lo..hi {
                        update(x + nx * row, x);
                    }
                }
            }
        }
        1 => {
            for z in 0..nz {
                for &(lo, hi) in &coef.ranges {
                    for y in lo..hi {
                        let base = nx * (y + ny * z);
                        for x in 0..nx {
                            update(base + x, y);
                        }
                    }
                }
            }
        }
        _ => {
            for &(lo, hi) in &coef.ranges {
                for z in lo..hi {
                    let base = nx * ny * z;
                    for p in 0..nx * ny {
                        update(base + p, z);
                    }
                }
            }
        }
    }
}
