//! Boundary reflection measurement.
//!
//! A Gaussian pulse travelling along the layered axis is launched in a short
//! test domain and in a reference domain four times longer. Until the
//! reference run's own boundaries come into play, the two probe records differ
//! only by what the near boundary sent back: reflection from the layer plus
//! anything that crossed it and wrapped around the periodic domain.

use super::grid::{FieldGrid, PmlConfig};
use super::solver::{stable_dt, PstdSolver};
use crate::error::Result;
use crate::physics::SI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionTest {
    pub pml: PmlConfig,
    /// Axis the pulse travels along; only this axis gets a layer.
    pub axis: usize,
    /// Cells along `axis` in the test domain.
    pub cells: usize,
    pub spacing: f64,
    /// Gaussian 1/e half-width of the pulse, cells.
    pub pulse_width: f64,
}

impl ReflectionTest {
    pub fn new(pml: PmlConfig) -> Self {
        Self {
            pml,
            axis: 2,
            cells: 128,
            spacing: 1e-9,
            pulse_width: 4.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionReport {
    /// Largest |E| at the probe in the reference run.
    pub incident_peak: f64,
    /// Largest |E_test - E_ref| at the probe over the measurement window.
    pub returned_peak: f64,
    /// `returned_peak / incident_peak`.
    pub ratio: f64,
}

/// Runs the pulse-into-boundary measurement.
pub fn pml_reflection_test(test: &ReflectionTest) -> Result<ReflectionReport> {
    let n = test.cells;
    let p = test.pml.thickness;
    let start = p + 8 + (3.0 * test.pulse_width).ceil() as usize;
    let probe = start + (n - 2 * p) / 4;
    let dt = stable_dt(test.spacing, None);
    // until anything that wrapped around has passed the probe again
    let travel = (2 * n) as f64 * test.spacing;
    let steps = (travel / (SI.c * dt)).ceil() as usize;

    let short = probe_record(test, n, start, probe, steps, dt)?;
    let long = probe_record(test, 4 * n, start, probe, steps, dt)?;

    let incident_peak = long.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let returned_peak = short
        .iter()
        .zip(&long)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(ReflectionReport {
        incident_peak,
        returned_peak,
        ratio: returned_peak / incident_peak,
    })
}

fn probe_record(
    test: &ReflectionTest,
    cells: usize,
    start: usize,
    probe: usize,
    steps: usize,
    dt: f64,
) -> Result<Vec<f64>> {
    let mut dims = [1, 1, 1];
    dims[test.axis] = cells;
    let mut axes = [false; 3];
    axes[test.axis] = true;
    let pml = PmlConfig { axes, ..test.pml };
    let mut grid = FieldGrid::new(dims, test.spacing, pml)?;

    // Transverse components chosen so the pulse travels towards +axis.
    let (ec, hc, sign) = match test.axis {
        0 => (1, 2, 1.0),
        1 => (2, 0, 1.0),
        _ => (1, 0, -1.0),
    };
    let eta = SI.eta0();
    let w = test.pulse_width;
    let shift = 0.5 * SI.c * dt / test.spacing;
    for i in 0..cells {
        let x = i as f64 - start as f64;
        let mut cell = [0; 3];
        cell[test.axis] = i;
        let idx = grid.index(cell);
        grid.e.component_mut(ec)[idx] = (-(x / w).powi(2)).exp();
        // H lags by half a step
        grid.h.component_mut(hc)[idx] = sign * (-((x + shift) / w).powi(2)).exp() / eta;
    }
    let mut solver = PstdSolver::new(grid, dt)?;
    let mut probe_cell = [0; 3];
    probe_cell[test.axis] = probe;
    let probe_idx = solver.grid.index(probe_cell);
    let mut record = Vec::with_capacity(steps);
    for _ in 0..steps {
        solver.advance(None)?;
        record.push(solver.grid.e.component(ec)[probe_idx]);
    }
    Ok(record)
}
