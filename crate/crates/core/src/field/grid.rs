use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physics::SI;

/// Three scalar arrays, one per Cartesian component, in x-fastest order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VectorField {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl VectorField {
    pub fn zeros(len: usize) -> Self {
        Self {
            x: vec![0.0; len],
            y: vec![0.0; len],
            z: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn component(&self, c: usize) -> &[f64] {
        match c {
            0 => &self.x,
            1 => &self.y,
            _ => &self.z,
        }
    }

    pub fn component_mut(&mut self, c: usize) -> &mut Vec<f64> {
        match c {
            0 => &mut self.x,
            1 => &mut self.y,
            _ => &mut self.z,
        }
    }

    pub fn at(&self, idx: usize) -> [f64; 3] {
        [self.x[idx], self.y[idx], self.z[idx]]
    }

    pub fn set(&mut self, idx: usize, v: [f64; 3]) {
        self.x[idx] = v[0];
        self.y[idx] = v[1];
        self.z[idx] = v[2];
    }

    pub fn fill(&mut self, value: f64) {
        for c in 0..3 {
            self.component_mut(c).iter_mut().for_each(|v| *v = value);
        }
    }

    pub fn all_finite(&self) -> bool {
        self.x
            .iter()
            .chain(&self.y)
            .chain(&self.z)
            .all(|v| v.is_finite())
    }

    /// Sum over cells of `|v|^2`.
    pub fn norm_squared(&self) -> f64 {
        self.x
            .iter()
            .chain(&self.y)
            .chain(&self.z)
            .map(|v| v * v)
            .sum()
    }

    pub fn dot(&self, other: &VectorField) -> f64 {
        (0..3)
            .map(|c| {
                self.component(c)
                    .iter()
                    .zip(other.component(c))
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
            })
            .sum()
    }
}

/// Absorbing boundary settings.
///
/// The layer is a stretched-coordinate (uniaxial) PML: in a layer normal to
/// axis `a` the derivative along `a` is divided by `1 + sigma / (i omega eps0)`,
/// realised with one recursive-convolution auxiliary array per derivative.
/// The conductivity grows as `sigma_max (depth / thickness)^order`, with
/// `sigma_max` chosen so that a normally incident wave crossing the layer
/// twice is attenuated by `exp(-attenuation)` in the continuum limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PmlConfig {
    /// Cells per face.
    pub thickness: usize,
    /// Polynomial grading order.
    pub order: f64,
    /// Round-trip attenuation in nepers.
    pub attenuation: f64,
    /// Complex-frequency shift, in units of `eps0` (1/s). Zero gives the
    /// plain stretched-coordinate layer.
    #[serde(default)]
    pub alpha: f64,
    /// Axes carrying a layer. An axis without one is periodic; this is only
    /// meaningful when the fields are uniform along it.
    #[serde(default = "all_axes")]
    pub axes: [bool; 3],
}

fn all_axes() -> [bool; 3] {
    [true; 3]
}

impl Default for PmlConfig {
    fn default() -> Self {
        Self {
            thickness: 12,
            order: 3.0,
            attenuation: 13.0,
            alpha: 0.0,
            axes: [true; 3],
        }
    }
}

impl PmlConfig {
    /// No absorption anywhere; the grid is fully periodic.
    pub fn disabled() -> Self {
        Self {
            axes: [false; 3],
            ..Self::default()
        }
    }

    /// Layer on `axis` only.
    pub fn single_axis(axis: usize) -> Self {
        let mut axes = [false; 3];
        axes[axis] = true;
        Self {
            axes,
            ..Self::default()
        }
    }

    /// Peak conductivity (S/m) for cell edge `spacing`.
    pub fn sigma_max(&self, spacing: f64) -> f64 {
        let depth = self.thickness as f64 * spacing;
        (self.order + 1.0) * self.attenuation / (2.0 * SI.eta0() * depth)
    }

    /// Cells occupied by the layer on the low and high face of `axis`.
    pub fn cells(&self, axis: usize) -> usize {
        if self.axes[axis] {
            self.thickness
        } else {
            0
        }
    }

    pub fn validate(&self, dims: [usize; 3]) -> Result<()> {
        for a in 0..3 {
            if !self.axes[a] {
                continue;
            }
            if self.thickness < 8 {
                return Err(Error::config("pml.thickness", "must be at least 8 cells"));
            }
            if 2 * self.thickness >= dims[a] {
                return Err(Error::config(
                    "pml.thickness",
                    format!("layers leave no interior along axis {a} ({} cells)", dims[a]),
                ));
            }
        }
        if !(self.order >= 0.0 && self.order.is_finite()) {
            return Err(Error::config("pml.order", "must be finite and non-negative"));
        }
        if !(self.attenuation >= 0.0 && self.attenuation.is_finite()) {
            return Err(Error::config("pml.attenuation", "must be finite and non-negative"));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::config("pml.alpha", "must be finite and non-negative"));
        }
        Ok(())
    }

    /// Conductivity at each cell along an axis of `n` cells.
    pub fn profile(&self, axis: usize, n: usize, spacing: f64) -> Vec<f64> {
        let p = self.cells(axis);
        let sigma_max = self.sigma_max(spacing);
        (0..n)
            .map(|i| {
                let depth = if i < p {
                    (p - i) as f64 - 0.5
                } else if i >= n - p {
                    (i - (n - p - 1)) as f64 - 0.5
                } else {
                    return 0.0;
                };
                sigma_max * (depth / p as f64).powf(self.order)
            })
            .collect()
    }
}

/// Cell-centred collocated grid holding the electromagnetic state.
#[derive(Debug, Clone)]
pub struct FieldGrid {
    dims: [usize; 3],
    spacing: f64,
    pml: PmlConfig,
    /// Electric field, V/m, at integer time steps.
    pub e: VectorField,
    /// Magnetic field, A/m, at half-integer time steps.
    pub h: VectorField,
    /// Free current density of the medium, A/m^2.
    pub j: VectorField,
    /// Conductivity per cell along each axis, S/m.
    pub pml_profile: [Vec<f64>; 3],
    /// Recursive-convolution state, one array per curl derivative term of
    /// the H update followed by the six of the E update.
    pub pml_aux: Vec<Vec<f64>>,
}

impl FieldGrid {
    pub fn new(dims: [usize; 3], spacing: f64, pml: PmlConfig) -> Result<Self> {
        if dims.iter().any(|&n| n == 0) {
            return Err(Error::config("grid.dims", "every dimension must be at least 1"));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::config("grid.spacing", "must be positive"));
        }
        pml.validate(dims)?;
        let len = dims.iter().product();
        let pml_profile = [0, 1, 2].map(|a| pml.profile(a, dims[a], spacing));
        Ok(Self {
            dims,
            spacing,
            pml,
            e: VectorField::zeros(len),
            h: VectorField::zeros(len),
            j: VectorField::zeros(len),
            pml_profile,
            pml_aux: vec![vec![0.0; len]; 12],
        })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn pml(&self) -> &PmlConfig {
        &self.pml
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, [x, y, z]: [usize; 3]) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let [nx, ny, _] = self.dims;
        [idx % nx, (idx / nx) % ny, idx / (nx * ny)]
    }

    /// Cell volume, m^3.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(3)
    }

    /// Whether a cell lies outside every absorbing layer.
    pub fn in_interior(&self, cell: [usize; 3]) -> bool {
        (0..3).all(|a| {
            let p = self.pml.cells(a);
            cell[a] >= p && cell[a] < self.dims[a] - p
        })
    }

    /// Index range `[lo, hi)` of the interior along `axis`.
    pub fn interior_range(&self, axis: usize) -> (usize, usize) {
        let p = self.pml.cells(axis);
        (p, self.dims[axis] - p)
    }

    pub fn all_finite(&self) -> bool {
        self.e.all_finite() && self.h.all_finite() && self.j.all_finite()
    }

    /// `sum (eps0 |E|^2 + mu0 |H|^2) / 2` over the grid, J.
    pub fn em_energy(&self) -> f64 {
        0.5 * (SI.eps0 * self.e.norm_squared() + SI.mu0_perm * self.h.norm_squared())
            * self.cell_volume()
    }

    /// Energy invariant of the leapfrog scheme: the electric energy at step
    /// `n` plus the magnetic cross term `mu0 H^{n-1/2} . H^{n+1/2} / 2`.
    pub fn leapfrog_energy(&self, h_before: &VectorField) -> f64 {
        0.5 * (SI.eps0 * self.e.norm_squared() + SI.mu0_perm * self.h.dot(h_before))
            * self.cell_volume()
    }
}
