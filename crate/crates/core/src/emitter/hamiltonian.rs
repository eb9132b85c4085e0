use num_complex::Complex64;

use super::density::{excited, Matrix4c, GROUND};
use crate::physics::{rabi_frequency, EmitterSpec, HBAR};

/// Lab-frame Hamiltonian of one emitter in the directional basis: ground
/// energy zero, three degenerate excited states at `transition_energy`, and a
/// dipole coupling `hbar Omega_eta` between `|g>` and each `|e_eta>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionalHamiltonian {
    /// J.
    pub transition_energy: f64,
    /// `Omega_eta = mu E_eta / hbar`, rad/s.
    pub couplings: [Complex64; 3],
}

impl DirectionalHamiltonian {
    /// Matrix realisation in joules.
    pub fn matrix(&self) -> Matrix4c {
        let mut h = Matrix4c::zeros();
        for eta in 0..3 {
            let e = excited(eta);
            h[(e, e)] = Complex64::new(self.transition_energy, 0.0);
            h[(GROUND, e)] = self.couplings[eta] * HBAR;
            h[(e, GROUND)] = self.couplings[eta].conj() * HBAR;
        }
        h
    }

    /// `H / hbar` in rad/s.
    pub fn angular_matrix(&self) -> Matrix4c {
        let mut h = Matrix4c::zeros();
        let w = self.transition_energy / HBAR;
        for eta in 0..3 {
            let e = excited(eta);
            h[(e, e)] = Complex64::new(w, 0.0);
            h[(GROUND, e)] = self.couplings[eta];
            h[(e, GROUND)] = self.couplings[eta].conj();
        }
        h
    }
}

/// Hamiltonian of an emitter sitting in the local field `e_local` (V/m).
pub fn build_hamiltonian(e_local: [f64; 3], spec: &EmitterSpec) -> DirectionalHamiltonian {
    DirectionalHamiltonian {
        transition_energy: spec.transition_energy,
        couplings: e_local.map(|e| Complex64::new(rabi_frequency(spec.dipole_moment, e), 0.0)),
    }
}
