//! Single-particle model of the ensemble: one four-level emitter in the
//! rotating frame, driven by the incident field plus a small estimate of the
//! perpendicular near field of its neighbours, with spontaneous emission and
//! population-dependent pure dephasing standing in for resonant energy
//! transfer between neighbours.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::emitter::{
    excited, hermitize, lindblad_rhs_angular, rk4, spontaneous_channels, DensityMatrix4, Matrix4c,
    GROUND,
};
use crate::ensemble::EmitterConfig;
use crate::error::{Error, Result};
use crate::physics::{EmitterSpec, E_CHARGE, HBAR, SI};
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateConfig {
    /// Drive minus transition frequency, rad/s.
    pub detuning: f64,
    /// Emitter number density, 1/m^3.
    pub density: f64,
    /// Incident field amplitude along y, V/m.
    pub drive_amplitude: f64,
    pub spec: EmitterSpec,
    /// s.
    pub run_length: f64,
    /// Integration step, s.
    pub dt: f64,
    /// Steps between recorded samples.
    pub sample_stride: usize,
}

impl SurrogateConfig {
    pub fn new(spec: EmitterSpec, density: f64, drive_amplitude: f64, run_length: f64) -> Self {
        Self {
            detuning: 0.0,
            density,
            drive_amplitude,
            spec,
            run_length,
            dt: 2e-17,
            sample_stride: 5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.density > 0.0 && self.density.is_finite()) {
            return Err(Error::config("surrogate.density", "must be positive"));
        }
        if !(self.run_length > 0.0 && self.run_length.is_finite()) {
            return Err(Error::config("surrogate.run_length", "must be positive"));
        }
        if !(self.dt > 0.0 && self.dt < self.run_length) {
            return Err(Error::config("surrogate.dt", "must be positive and shorter than the run"));
        }
        if self.sample_stride == 0 {
            return Err(Error::config("surrogate.sample_stride", "must be at least 1"));
        }
        if !self.detuning.is_finite() || !self.drive_amplitude.is_finite() {
            return Err(Error::config("surrogate.drive", "detuning and amplitude must be finite"));
        }
        Ok(())
    }
}

/// File form of a surrogate run. Read from TOML.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurrogateRunConfig {
    pub emitter: EmitterConfig,
    /// 1/m^3.
    pub density: f64,
    /// V/m.
    pub drive_amplitude: f64,
    /// rad/s.
    #[serde(default)]
    pub detuning: f64,
    /// s.
    pub run_length: f64,
    /// s.
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_stride")]
    pub sample_stride: usize,
}

fn default_dt() -> f64 {
    2e-17
}

fn default_stride() -> usize {
    5
}

/// Keys accepted by [`SurrogateRunConfig::with_value`].
pub const SWEEP_KEYS: [&str; 7] = [
    "density",
    "drive_amplitude",
    "detuning",
    "run_length",
    "gamma0",
    "transition_energy_ev",
    "dipole_moment",
];

impl SurrogateRunConfig {
    pub fn from_toml(text: &str, path: &std::path::Path) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        config.to_config()?;
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text, path)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Contract(format!("config serialisation: {e}")))
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        crate::ensemble::checkpoint::sha256_hex(&serde_json::to_vec(self).expect("config serialises to JSON"))
    }

    pub fn to_config(&self) -> Result<SurrogateConfig> {
        let config = SurrogateConfig {
            detuning: self.detuning,
            density: self.density,
            drive_amplitude: self.drive_amplitude,
            spec: self.emitter.spec()?,
            run_length: self.run_length,
            dt: self.dt,
            sample_stride: self.sample_stride,
        };
        config.validate()?;
        Ok(config)
    }

    /// Copy with one sweep key set to `value`.
    pub fn with_value(&self, key: &str, value: f64) -> Result<Self> {
        let mut c = *self;
        match key {
            "density" => c.density = value,
            "drive_amplitude" => c.drive_amplitude = value,
            "detuning" => c.detuning = value,
            "run_length" => c.run_length = value,
            "gamma0" => c.emitter.gamma0 = value,
            "transition_energy_ev" => c.emitter.transition_energy_ev = value,
            "dipole_moment" => c.emitter.dipole_moment = Some(value),
            _ => {
                return Err(Error::config(
                    "sweep",
                    format!("unknown key `{key}`; expected one of {}", SWEEP_KEYS.join(", ")),
                ))
            }
        }
        c.to_config()?;
        Ok(c)
    }
}

/// Distance to the nearest diagonal neighbour at density `n`, m.
pub fn neighbour_distance(n: f64) -> f64 {
    (3.0 * 8f64.sqrt() / (4.0 * n * PI)).cbrt()
}

/// Perpendicular field components `(E_x, E_z)` felt by an emitter driven
/// along y, taken from a neighbour dipole on the diagonal. The ratio
/// `mu / (e r)` is used as written, i.e. as a pure number.
pub fn perpendicular_field_estimate(e_y: f64, spec: &EmitterSpec, n: f64) -> Result<(f64, f64)> {
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::Domain(format!("number density must be positive, got {n}")));
    }
    let r = neighbour_distance(n);
    let e = e_y * spec.dipole_moment / (E_CHARGE * r) * (PI / 4.0).sin();
    Ok((e, e))
}

/// Rotating-frame Hamiltonian in joules.
pub fn rwa_hamiltonian(config: &SurrogateConfig) -> Result<Matrix4c> {
    Ok(rwa_angular(config)?.scale(HBAR))
}

fn rwa_angular(config: &SurrogateConfig) -> Result<Matrix4c> {
    let (ex, ez) = if config.drive_amplitude == 0.0 {
        (0.0, 0.0)
    } else {
        perpendicular_field_estimate(config.drive_amplitude, &config.spec, config.density)?
    };
    let mu = config.spec.dipole_moment;
    let rabi = [ex, config.drive_amplitude, ez].map(|e| mu * e / HBAR);
    let mut w = Matrix4c::zeros();
    for eta in 0..3 {
        let e = excited(eta);
        w[(e, e)] = Complex64::new(-config.detuning, 0.0);
        w[(GROUND, e)] = Complex64::new(0.5 * rabi[eta], 0.0);
        w[(e, GROUND)] = Complex64::new(0.5 * rabi[eta], 0.0);
    }
    Ok(w)
}

/// Pair order of the perpendicular rates.
pub const PERPENDICULAR_PAIRS: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DephasingRates {
    /// `(d_xx, d_yy, d_zz)`, 1/s.
    pub parallel: [f64; 3],
    /// `(d_xy, d_yz, d_zx)`, 1/s.
    pub perpendicular: [f64; 3],
}

/// `N pi c^3 / (2 omega^3)`: the parallel rate per unit `gamma0` at full
/// population factor.
pub fn parallel_prefactor(n: f64, omega: f64) -> f64 {
    n * PI * SI.c.powi(3) / (2.0 * omega.powi(3))
}

/// `3 N pi c^3 / (16 sqrt(2) omega^3)`.
pub fn perpendicular_prefactor(n: f64, omega: f64) -> f64 {
    3.0 * n * PI * SI.c.powi(3) / (16.0 * 2f64.sqrt() * omega.powi(3))
}

fn rates_from(rho: &Matrix4c, config: &SurrogateConfig) -> DephasingRates {
    let spec = &config.spec;
    let gg = rho[(GROUND, GROUND)].re.max(0.0);
    let factor = |eta: usize| (rho[(excited(eta), excited(eta))].re.max(0.0) * gg).sqrt();
    let f = [factor(0), factor(1), factor(2)];
    let par = spec.gamma0 * parallel_prefactor(config.density, spec.omega0);
    let perp = spec.gamma0 * perpendicular_prefactor(config.density, spec.omega0);
    DephasingRates {
        parallel: f.map(|v| par * v * v),
        perpendicular: PERPENDICULAR_PAIRS.map(|(i, j)| perp * f[i] * f[j]),
    }
}

pub fn dephasing_rates(rho: &DensityMatrix4, config: &SurrogateConfig) -> DephasingRates {
    rates_from(rho.matrix(), config)
}

/// Contribution of pure-dephasing channels. A rate `d` on the pair `(a, b)`
/// is the Lindblad term with `L = |a><a| - |b><b|` at rate `d/2`, which
/// damps `rho_ab` at `d`, other coherences touching `a` or `b` at `d/4`,
/// and leaves the diagonal untouched. Parallel rates act on `(g, e_i)`,
/// perpendicular ones on `(e_i, e_j)`.
pub fn dephasing_contribution(rho: &Matrix4c, rates: &DephasingRates) -> Matrix4c {
    let mut out = Matrix4c::zeros();
    let mut add = |a: usize, b: usize, d: f64| {
        if d == 0.0 {
            return;
        }
        let mut l = [0.0; 4];
        l[a] = 1.0;
        l[b] = -1.0;
        for p in 0..4 {
            for q in 0..4 {
                if p != q {
                    let diff = l[p] - l[q];
                    out[(p, q)] -= rho[(p, q)] * (0.25 * d * diff * diff);
                }
            }
        }
    };
    for eta in 0..3 {
        add(GROUND, excited(eta), rates.parallel[eta]);
    }
    for (k, &(i, j)) in PERPENDICULAR_PAIRS.iter().enumerate() {
        add(excited(i), excited(j), rates.perpendicular[k]);
    }
    out
}

/// Full nonlinear right-hand side.
pub fn surrogate_rhs(rho: &DensityMatrix4, config: &SurrogateConfig) -> Result<Matrix4c> {
    let w = rwa_angular(config)?;
    let channels = spontaneous_channels(config.spec.gamma0);
    rhs_with(rho.matrix(), &w, &channels, config)
}

fn rhs_with(
    rho: &Matrix4c,
    w: &Matrix4c,
    channels: &[crate::emitter::LindbladChannel],
    config: &SurrogateConfig,
) -> Result<Matrix4c> {
    let base = lindblad_rhs_angular(rho, w, channels)?;
    let rates = rates_from(rho, config);
    Ok(hermitize(&(base + dephasing_contribution(rho, &rates))))
}

pub const SURROGATE_COLUMNS: [&str; 4] = ["rho_xx", "rho_yy", "rho_zz", "purity"];

/// Integrates from the ground state with classical RK4, recomputing the
/// dephasing rates at every stage.
pub fn run_surrogate(config: &SurrogateConfig) -> Result<TimeSeries> {
    config.validate()?;
    let w = rwa_angular(config)?;
    let channels = spontaneous_channels(config.spec.gamma0);
    let steps = (config.run_length / config.dt).round() as u64;
    let mut series = TimeSeries::new(SURROGATE_COLUMNS)
        .with_meta("kind", "surrogate")
        .with_meta("density_m3", format!("{:e}", config.density))
        .with_meta("drive_amplitude_v_m", format!("{:e}", config.drive_amplitude))
        .with_meta("detuning_rad_s", format!("{:e}", config.detuning));
    let mut rho = DensityMatrix4::ground();
    let record = |series: &mut TimeSeries, t: f64, rho: &DensityMatrix4| {
        series.push(
            t,
            &[
                rho.population(excited(0)),
                rho.population(excited(1)),
                rho.population(excited(2)),
                rho.purity(),
            ],
        )
    };
    record(&mut series, 0.0, &rho)?;
    for n in 1..=steps {
        let next = rk4(rho.matrix(), config.dt, |r| rhs_with(r, &w, &channels, config))?;
        rho = DensityMatrix4::from_matrix_unchecked(next);
        let tr = rho.trace();
        if !((tr.re - 1.0).abs() <= crate::emitter::TRACE_TOLERANCE) || !rho.matrix().iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::numeric(n, format!("surrogate trace drifted to {tr}")));
        }
        if n % config.sample_stride as u64 == 0 || n == steps {
            record(&mut series, n as f64 * config.dt, &rho)?;
        }
    }
    Ok(series)
}
