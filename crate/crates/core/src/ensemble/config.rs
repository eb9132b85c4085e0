use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::{FieldComponent, FieldGrid, PmlConfig, Plane, Ramp, SourcePlane};
use crate::physics::{DriveSpec, EmitterSpec, EV, HBAR};

/// Everything a coupled run needs. Read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub emitter: EmitterConfig,
    pub drive: DriveConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub pml: PmlConfig,
    /// No geometry means no emitters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryConfig>,
    #[serde(default)]
    pub source: SourceConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub probes: Vec<ProbeConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshots: Vec<SnapshotConfig>,
    pub run: RunConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterConfig {
    pub transition_energy_ev: f64,
    /// 1/s.
    pub gamma0: f64,
    /// C m. Overrides the value implied by `gamma0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dipole_moment: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    /// V/m.
    pub amplitude: f64,
    /// Hz. Defaults to the transition frequency.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency_hz: Option<f64>,
    pub polarization: [f64; 3],
    pub propagation: [f64; 3],
    /// Length of the half-cosine turn-on, in optical periods.
    #[serde(default = "default_ramp")]
    pub ramp_periods: f64,
}

impl EmitterConfig {
    pub fn spec(&self) -> Result<EmitterSpec> {
        positive("emitter.transition_energy_ev", self.transition_energy_ev)?;
        positive("emitter.gamma0", self.gamma0)?;
        let spec = EmitterSpec::from_ev(self.transition_energy_ev, self.gamma0)?;
        match self.dipole_moment {
            None => Ok(spec),
            Some(mu) if mu >= 0.0 && mu.is_finite() => Ok(spec.with_dipole(mu)),
            Some(mu) => Err(Error::config("emitter.dipole_moment", format!("must be >= 0, got {mu}"))),
        }
    }
}

fn default_ramp() -> f64 {
    5.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dims: [usize; 3],
    /// m.
    #[serde(default = "default_spacing")]
    pub spacing: f64,
    /// s. Defaults to the stability limit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

fn default_spacing() -> f64 {
    1e-9
}

/// Unknown keys are caught by `Shape`, which sees every key but `density`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryConfig {
    #[serde(flatten)]
    pub shape: Shape,
    /// Emitters per m^3.
    pub density: f64,
}

/// Region filled with emitters. A cell belongs to it when its centre does.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    Sphere {
        /// m. Defaults to the centre of the middle cell.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<[f64; 3]>,
        /// m.
        radius: f64,
    },
    Box {
        /// Lower corner, m.
        min: [f64; 3],
        /// Upper corner, m.
        max: [f64; 3],
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    /// Cell index of the source plane along the propagation axis. Defaults to
    /// the first admissible plane on the upstream side.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plane: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeQuantity {
    Ex,
    Ey,
    Ez,
    Jx,
    Jy,
    Jz,
}

impl ProbeQuantity {
    pub fn name(self) -> &'static str {
        match self {
            Self::Ex => "ex",
            Self::Ey => "ey",
            Self::Ez => "ez",
            Self::Jx => "jx",
            Self::Jy => "jy",
            Self::Jz => "jz",
        }
    }

    pub fn component(self) -> FieldComponent {
        match self {
            Self::Ex => FieldComponent::Ex,
            Self::Ey => FieldComponent::Ey,
            Self::Ez => FieldComponent::Ez,
            Self::Jx => FieldComponent::Jx,
            Self::Jy => FieldComponent::Jy,
            Self::Jz => FieldComponent::Jz,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub name: String,
    pub cell: [usize; 3],
    #[serde(default = "default_quantities")]
    pub quantities: Vec<ProbeQuantity>,
    #[serde(default = "one")]
    pub stride: u64,
}

fn default_quantities() -> Vec<ProbeQuantity> {
    vec![ProbeQuantity::Ex, ProbeQuantity::Ey, ProbeQuantity::Ez]
}

fn one() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotConfig {
    pub component: FieldComponent,
    /// Whole grid when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plane: Option<Plane>,
    /// Requested times, s. Each is taken at the first step at or after it.
    pub times: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteadyStateConfig {
    /// s. Defaults to 20 optical periods.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// s.
    pub duration: f64,
    /// Steps between ensemble-average samples.
    #[serde(default = "default_average_stride")]
    pub average_stride: u64,
    /// Stop early once the averages settle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steady_state: Option<SteadyStateConfig>,
    #[serde(default = "yes")]
    pub deterministic: bool,
    /// Record field energy and absorbed work.
    #[serde(default)]
    pub energy_diagnostics: bool,
}

fn default_average_stride() -> u64 {
    10
}

fn yes() -> bool {
    true
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(field, format!("must be positive and finite, got {v}")))
    }
}

impl EnsembleConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text, path)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Contract(format!("config serialisation: {e}")))
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serialises to JSON");
        let digest = Sha256::digest(&json);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn emitter_spec(&self) -> Result<EmitterSpec> {
        self.emitter.spec()
    }

    pub fn drive_spec(&self) -> Result<DriveSpec> {
        let d = &self.drive;
        let omega = match d.frequency_hz {
            Some(f) => {
                positive("drive.frequency_hz", f)?;
                2.0 * std::f64::consts::PI * f
            }
            None => self.emitter.transition_energy_ev * EV / HBAR,
        };
        DriveSpec::new(d.amplitude, omega, d.polarization, d.propagation)
    }

    pub fn build_grid(&self) -> Result<FieldGrid> {
        let g = &self.grid;
        positive("grid.spacing", g.spacing)?;
        if g.dims.iter().any(|&n| n == 0) {
            return Err(Error::config("grid.dims", "every extent must be at least 1"));
        }
        self.pml.validate(g.dims)?;
        FieldGrid::new(g.dims, g.spacing, self.pml)
    }

    pub fn dt(&self) -> Result<f64> {
        let limit = crate::field::stable_dt(self.grid.spacing, Some(self.drive_spec()?.period()));
        match self.grid.dt {
            None => Ok(limit),
            Some(dt) if dt > 0.0 && dt <= limit => Ok(dt),
            Some(dt) => Err(Error::config("grid.dt", format!("{dt:e} s outside (0, {limit:e}]"))),
        }
    }

    pub fn source_plane(&self, grid: &FieldGrid) -> Result<SourcePlane> {
        let drive = self.drive_spec()?;
        let ramp = if self.drive.ramp_periods > 0.0 {
            Ramp::HalfCosine {
                duration: self.drive.ramp_periods * drive.period(),
            }
        } else if self.drive.ramp_periods == 0.0 {
            Ramp::None
        } else {
            return Err(Error::config("drive.ramp_periods", "must be >= 0"));
        };
        let mut plane = SourcePlane::new(drive, 0, ramp)?;
        let (lo, hi) = grid.interior_range(plane.axis);
        plane.index = match self.source.plane {
            Some(i) => i,
            None if plane.direction > 0.0 => lo + 1,
            None => hi.saturating_sub(2),
        };
        plane.validate(grid)?;
        Ok(plane)
    }

    /// Full check, reporting the first offending field.
    pub fn validate(&self) -> Result<()> {
        self.emitter_spec()?;
        let grid = self.build_grid()?;
        self.dt()?;
        let source = self.source_plane(&grid)?;
        positive("run.duration", self.run.duration)?;
        if self.run.average_stride == 0 {
            return Err(Error::config("run.average_stride", "must be at least 1"));
        }
        if let Some(ss) = &self.run.steady_state {
            if let Some(w) = ss.window {
                positive("run.steady_state.window", w)?;
            }
            positive("run.steady_state.tol", ss.tol)?;
        }
        if let Some(geo) = &self.geometry {
            let cells = super::geometry::rasterize(&geo.shape, &grid)?;
            if !(geo.density >= 0.0 && geo.density.is_finite()) {
                return Err(Error::config("geometry.density", "must be finite and >= 0"));
            }
            let lo = source.index - 1;
            if cells
                .iter()
                .any(|&c| (lo..=source.index + 1).contains(&grid.coords(c)[source.axis]))
            {
                return Err(Error::config(
                    "geometry",
                    "emitters overlap the source plane or its neighbours",
                ));
            }
        }
        let mut names = std::collections::BTreeSet::new();
        for (i, p) in self.probes.iter().enumerate() {
            let field = format!("probes[{i}]");
            if !names.insert(p.name.as_str()) || p.name.is_empty() {
                return Err(Error::config(format!("{field}.name"), "must be unique and non-empty"));
            }
            if p.cell.iter().zip(grid.dims()).any(|(&c, n)| c >= n) || !grid.in_interior(p.cell) {
                return Err(Error::config(format!("{field}.cell"), "must lie inside the interior"));
            }
            if p.stride == 0 {
                return Err(Error::config(format!("{field}.stride"), "must be at least 1"));
            }
            if p.quantities.is_empty() {
                return Err(Error::config(format!("{field}.quantities"), "must not be empty"));
            }
        }
        for (i, s) in self.snapshots.iter().enumerate() {
            let field = format!("snapshots[{i}]");
            if let Some(p) = s.plane {
                if p.axis > 2 || p.offset >= grid.dims()[p.axis] {
                    return Err(Error::config(format!("{field}.plane"), "does not intersect the grid"));
                }
                let (lo, hi) = grid.interior_range(p.axis);
                if p.offset < lo || p.offset >= hi {
                    return Err(Error::config(format!("{field}.plane"), "must cut the interior"));
                }
            }
            if s.times.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
                return Err(Error::config(format!("{field}.times"), "must be finite and >= 0"));
            }
        }
        Ok(())
    }
}
