//! Physical constants and the emitter/drive parameter sets shared by every
//! solver. Everything here is SI; electron-volts and hertz are converted once
//! at construction.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// CODATA 2018 values in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Speed of light, m/s.
    pub c: f64,
    /// Vacuum permittivity, F/m.
    pub eps0: f64,
    /// Vacuum permeability, H/m.
    pub mu0_perm: f64,
    /// Reduced Planck constant, J s.
    pub hbar: f64,
    /// Elementary charge, C.
    pub e_charge: f64,
}

pub const SI: PhysicalConstants = PhysicalConstants {
    c: 299_792_458.0,
    eps0: 8.854_187_812_8e-12,
    mu0_perm: 1.256_637_062_12e-6,
    hbar: 1.054_571_817e-34,
    e_charge: 1.602_176_634e-19,
};

pub const C: f64 = SI.c;
pub const EPS0: f64 = SI.eps0;
pub const MU0: f64 = SI.mu0_perm;
pub const HBAR: f64 = SI.hbar;
pub const E_CHARGE: f64 = SI.e_charge;

/// Joules per electron-volt.
pub const EV: f64 = SI.e_charge;

impl PhysicalConstants {
    /// Impedance of free space, ohm.
    pub fn eta0(&self) -> f64 {
        (self.mu0_perm / self.eps0).sqrt()
    }
}

/// Transition dipole magnitude (C m) of an emitter with vacuum decay rate
/// `gamma0` (1/s) at angular frequency `omega0` (rad/s):
///
/// ```text
/// |mu| = sqrt(3 pi eps0 hbar c^3 gamma0 / omega0^3)
/// ```
pub fn derive_dipole_moment(gamma0: f64, omega0: f64) -> Result<f64> {
    if !(gamma0 > 0.0 && gamma0.is_finite()) {
        return Err(Error::Domain(format!("gamma0 must be positive, got {gamma0}")));
    }
    if !(omega0 > 0.0 && omega0.is_finite()) {
        return Err(Error::Domain(format!("omega0 must be positive, got {omega0}")));
    }
    Ok((3.0 * PI * EPS0 * HBAR * C.powi(3) * gamma0 / omega0.powi(3)).sqrt())
}

/// Coupling frequency `mu E / hbar` in rad/s.
pub fn rabi_frequency(dipole: f64, field: f64) -> f64 {
    dipole * field / HBAR
}

/// The emitter's level structure: one ground state and three degenerate
/// directional excited states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmitterSpec {
    /// Excited-state energy, J.
    pub transition_energy: f64,
    /// Vacuum spontaneous emission rate, 1/s.
    pub gamma0: f64,
    /// Transition dipole magnitude, C m.
    pub dipole_moment: f64,
    /// Transition angular frequency, rad/s.
    pub omega0: f64,
}

impl EmitterSpec {
    pub fn from_ev(transition_energy_ev: f64, gamma0: f64) -> Result<Self> {
        if !(transition_energy_ev > 0.0 && transition_energy_ev.is_finite()) {
            return Err(Error::Domain(format!(
                "transition energy must be positive, got {transition_energy_ev} eV"
            )));
        }
        let transition_energy = transition_energy_ev * EV;
        let omega0 = transition_energy / HBAR;
        let dipole_moment = derive_dipole_moment(gamma0, omega0)?;
        Ok(Self {
            transition_energy,
            gamma0,
            dipole_moment,
            omega0,
        })
    }

    /// Same level structure with the dipole replaced. A zero dipole decouples
    /// the emitter from the field entirely.
    pub fn with_dipole(mut self, dipole_moment: f64) -> Self {
        self.dipole_moment = dipole_moment;
        self
    }
}

/// Incident monochromatic plane wave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    /// Electric field amplitude, V/m.
    pub amplitude: f64,
    /// Angular frequency, rad/s.
    pub frequency: f64,
    pub polarization: [f64; 3],
    pub propagation: [f64; 3],
}

impl DriveSpec {
    pub fn new(
        amplitude: f64,
        frequency: f64,
        polarization: [f64; 3],
        propagation: [f64; 3],
    ) -> Result<Self> {
        let drive = Self {
            amplitude,
            frequency,
            polarization,
            propagation,
        };
        drive.validate()?;
        Ok(drive)
    }

    pub fn validate(&self) -> Result<()> {
        let norm = |v: &[f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !self.amplitude.is_finite() || self.amplitude < 0.0 {
            return Err(Error::config("drive.amplitude", "must be finite and non-negative"));
        }
        if !(self.frequency > 0.0 && self.frequency.is_finite()) {
            return Err(Error::config("drive.frequency", "must be positive"));
        }
        if (norm(&self.polarization) - 1.0).abs() > 1e-12 {
            return Err(Error::config("drive.polarization", "must be a unit vector"));
        }
        if (norm(&self.propagation) - 1.0).abs() > 1e-12 {
            return Err(Error::config("drive.propagation", "must be a unit vector"));
        }
        let dot: f64 = (0..3).map(|i| self.polarization[i] * self.propagation[i]).sum();
        if dot.abs() > 1e-12 {
            return Err(Error::config(
                "drive.polarization",
                "must be perpendicular to the propagation direction",
            ));
        }
        Ok(())
    }

    /// Optical period, s.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.frequency
    }
}
