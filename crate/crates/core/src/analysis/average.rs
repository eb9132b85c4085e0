use crate::emitter::{DensityMatrix4, Matrix4c};
use crate::error::{Error, Result};

/// Spatially averaged density matrix at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleAverage {
    /// s.
    pub time: f64,
    pub rho_bar: Matrix4c,
    /// `Tr(rho_bar^2)`.
    pub purity: f64,
}

impl EnsembleAverage {
    pub fn population(&self, level: usize) -> f64 {
        self.rho_bar[(level, level)].re
    }
}

/// Arithmetic mean of the cell states, summed in the given order.
pub fn ensemble_average(time: f64, states: &[DensityMatrix4]) -> Result<EnsembleAverage> {
    if states.is_empty() {
        return Err(Error::Contract("ensemble_average: no states".into()));
    }
    let mut sum = Matrix4c::zeros();
    for s in states {
        sum += s.matrix();
    }
    let rho_bar = sum.unscale(states.len() as f64);
    let purity = (rho_bar * rho_bar).trace().re;
    Ok(EnsembleAverage {
        time,
        rho_bar,
        purity,
    })
}
