use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::density::{excited, hermitize, DensityMatrix4, Matrix4c, GROUND};
use super::hamiltonian::DirectionalHamiltonian;
use crate::error::{Error, Result};

/// Incoherent transition `|from> -> |to>` with jump operator `|to><from|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LindbladChannel {
    pub from: usize,
    pub to: usize,
    /// 1/s.
    pub rate: f64,
}

impl LindbladChannel {
    pub fn new(from: usize, to: usize, rate: f64) -> Result<Self> {
        let ch = Self { from, to, rate };
        ch.validate()?;
        Ok(ch)
    }

    pub fn validate(&self) -> Result<()> {
        if self.from > 3 || self.to > 3 {
            return Err(Error::Contract(format!("channel {self:?}: state index out of range")));
        }
        if !(self.rate >= 0.0 && self.rate.is_finite()) {
            return Err(Error::Contract(format!("channel {self:?}: rate must be finite and >= 0")));
        }
        Ok(())
    }
}

/// Spontaneous emission `e_eta -> g` at `gamma0` for each direction.
pub fn spontaneous_channels(gamma0: f64) -> [LindbladChannel; 3] {
    [0, 1, 2].map(|eta| LindbladChannel {
        from: excited(eta),
        to: GROUND,
        rate: gamma0,
    })
}

/// `d rho / dt` for the Hamiltonian `hbar * w` (`w` in rad/s).
///
/// Each channel contributes, with `P = |from><from|`,
/// `-(rate/2)(P rho + rho P) + rate rho_ff |to><to|`, written out
/// element-wise.
pub fn lindblad_rhs_angular(rho: &Matrix4c, w: &Matrix4c, channels: &[LindbladChannel]) -> Result<Matrix4c> {
    let i = Complex64::new(0.0, 1.0);
    let comm = w * rho - rho * w;
    let mut out = -comm * i;
    for ch in channels {
        if !(ch.rate >= 0.0) {
            return Err(Error::Contract(format!("channel {ch:?}: negative rate")));
        }
        if ch.rate == 0.0 {
            continue;
        }
        let f = ch.from;
        let half = 0.5 * ch.rate;
        for k in 0..4 {
            out[(f, k)] -= rho[(f, k)] * half;
            out[(k, f)] -= rho[(k, f)] * half;
        }
        out[(ch.to, ch.to)] += rho[(f, f)] * ch.rate;
    }
    Ok(hermitize(&out))
}

/// Lindblad-von Neumann right-hand side for one emitter.
pub fn lindblad_rhs(
    rho: &DensityMatrix4,
    hamiltonian: &DirectionalHamiltonian,
    channels: &[LindbladChannel],
) -> Result<Matrix4c> {
    lindblad_rhs_angular(rho.matrix(), &hamiltonian.angular_matrix(), channels)
}

/// Classical fourth-order Runge-Kutta step of `rho' = f(rho)`, followed by
/// re-Hermitisation. The trace is left alone.
pub fn rk4<F>(rho: &Matrix4c, dt: f64, mut f: F) -> Result<Matrix4c>
where
    F: FnMut(&Matrix4c) -> Result<Matrix4c>,
{
    let k1 = f(rho)?;
    let k2 = f(&(rho + k1.scale(0.5 * dt)))?;
    let k3 = f(&(rho + k2.scale(0.5 * dt)))?;
    let k4 = f(&(rho + k3.scale(dt)))?;
    let next = rho + (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(dt / 6.0);
    Ok(hermitize(&next))
}

/// Everything the right-hand side needs besides `rho`. The Hamiltonian is
/// held fixed for the whole step.
#[derive(Debug, Clone, Copy)]
pub struct RhsContext<'a> {
    pub hamiltonian: DirectionalHamiltonian,
    pub channels: &'a [LindbladChannel],
}

/// Largest tolerated `|Tr rho - 1|` after a step.
pub const TRACE_TOLERANCE: f64 = 1e-6;

pub fn rk4_step(rho: &DensityMatrix4, ctx: &RhsContext<'_>, dt: f64) -> Result<DensityMatrix4> {
    if !(dt > 0.0) {
        return Err(Error::Contract(format!("rk4_step: dt must be positive, got {dt}")));
    }
    let w = ctx.hamiltonian.angular_matrix();
    let next = rk4(rho.matrix(), dt, |r| lindblad_rhs_angular(r, &w, ctx.channels))?;
    let next = DensityMatrix4::from_matrix_unchecked(next);
    check_trace(&next)?;
    Ok(next)
}

fn check_trace(rho: &DensityMatrix4) -> Result<()> {
    let tr = rho.trace();
    let dev = (tr - Complex64::new(1.0, 0.0)).norm();
    if !(dev <= TRACE_TOLERANCE) {
        return Err(Error::numeric(0, format!("density matrix trace drifted to {tr}")));
    }
    Ok(())
}
