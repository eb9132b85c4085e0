use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Matrix4c = Matrix4<Complex64>;

/// Basis index of the ground state.
pub const GROUND: usize = 0;

/// Basis index of the excited state whose dipole points along axis `eta`.
pub const fn excited(eta: usize) -> usize {
    1 + eta
}

#[cfg(test)]
pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Density matrix over `(|g>, |e_x>, |e_y>, |e_z>)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix4(Matrix4c);

impl DensityMatrix4 {
    pub fn ground() -> Self {
        Self::pure_state(GROUND)
    }

    /// `|i><i|`.
    pub fn pure_state(i: usize) -> Self {
        let mut m = Matrix4c::zeros();
        m[(i, i)] = ONE;
        Self(m)
    }

    /// `|psi><psi|` for a normalised amplitude vector.
    pub fn from_amplitudes(psi: [Complex64; 4]) -> Self {
        let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let psi = psi.map(|a| a / norm);
        Self(Matrix4c::from_fn(|r, c| psi[r] * psi[c].conj()))
    }

    /// Wraps a matrix after checking Hermiticity, unit trace and positivity.
    pub fn from_matrix(m: Matrix4c) -> Result<Self> {
        let rho = Self(m);
        rho.validate()?;
        Ok(rho)
    }

    /// Wraps a matrix without checks.
    pub fn from_matrix_unchecked(m: Matrix4c) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix4c {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix4c {
        self.0
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.0[(r, c)]
    }

    pub fn population(&self, i: usize) -> f64 {
        self.0[(i, i)].re
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        // Tr(rho rho) = sum_{ij} rho_ij rho_ji = sum |rho_ij|^2 for Hermitian rho
        (0..4)
            .flat_map(|r| (0..4).map(move |c| (r, c)))
            .map(|(r, c)| (self.0[(r, c)] * self.0[(c, r)]).re)
            .sum()
    }

    /// Largest `|rho - rho^dagger|` entry.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..4 {
            for c in 0..4 {
                worst = worst.max((self.0[(r, c)] - self.0[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        let h = hermitize(&self.0);
        let ev = h.symmetric_eigenvalues();
        let mut out = [ev[0], ev[1], ev[2], ev[3]];
        out.sort_by(|a, b| a.total_cmp(b));
        out
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > 1e-12 {
            return Err(Error::Contract(format!("density matrix not Hermitian (error {herm:e})")));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
            return Err(Error::Contract(format!("density matrix trace {tr} != 1")));
        }
        let min = self.min_eigenvalue();
        if min < -1e-9 {
            return Err(Error::Contract(format!("density matrix eigenvalue {min:e} < 0")));
        }
        Ok(())
    }
}

/// `(m + m^dagger) / 2`.
pub fn hermitize(m: &Matrix4c) -> Matrix4c {
    (m + m.adjoint()).scale(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_states() {
        let g = DensityMatrix4::ground();
        assert_eq!(g.population(GROUND), 1.0);
        assert_eq!(g.purity(), 1.0);
        assert!(g.validate().is_ok());
        let e = DensityMatrix4::pure_state(excited(1));
        assert_eq!(e.population(2), 1.0);
    }

    #[test]
    fn superposition_is_valid_and_pure() {
        let s = 0.5f64.sqrt();
        let rho = DensityMatrix4::from_amplitudes([
            Complex64::new(s, 0.0),
            ZERO,
            Complex64::new(0.0, s),
            ZERO,
        ]);
        assert!(rho.validate().is_ok());
        assert!((rho.purity() - 1.0).abs() < 1e-15);
        let ev = rho.eigenvalues();
        assert!((ev[3] - 1.0).abs() < 1e-12 && ev[0].abs() < 1e-12);
    }

    #[test]
    fn maximally_mixed_purity() {
        let rho = DensityMatrix4::from_matrix(Matrix4c::identity().scale(0.25)).unwrap();
        assert!((rho.purity() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn invalid_matrices_are_rejected() {
        let mut m = Matrix4c::identity().scale(0.25);
        m[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(DensityMatrix4::from_matrix(m).is_err());
        assert!(DensityMatrix4::from_matrix(Matrix4c::identity()).is_err());
        let mut neg = Matrix4c::zeros();
        neg[(0, 0)] = Complex64::new(1.5, 0.0);
        neg[(1, 1)] = Complex64::new(-0.5, 0.0);
        assert!(DensityMatrix4::from_matrix(neg).is_err());
    }
}
