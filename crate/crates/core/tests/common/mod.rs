#![allow(dead_code)]

pub mod bloch;

use densemble::field::{FieldGrid, PmlConfig, PstdSolver, Ramp, SourcePlane};
use densemble::physics::{DriveSpec, EV, HBAR};
use densemble::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Relative change of the leapfrog energy invariant over `steps` steps of a
/// periodic vacuum grid seeded with random fields.
pub fn vacuum_energy_drift(dims: [usize; 3], steps: usize, seed: u64) -> Result<f64> {
    let mut grid = FieldGrid::new(dims, 1e-9, PmlConfig::disabled())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for c in 0..3 {
        for v in grid.e.component_mut(c).iter_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
        for v in grid.h.component_mut(c).iter_mut() {
            *v = rng.random_range(-1.0..1.0) / 377.0;
        }
    }
    let dt = densemble::field::stable_dt(1e-9, None);
    let mut solver = PstdSolver::new(grid, dt)?;
    let energy = |s: &mut PstdSolver| -> Result<f64> {
        let before = s.grid.h.clone();
        s.step_h()?;
        let w = s.grid.leapfrog_energy(&before);
        s.step_e()?;
        Ok(w)
    };
    let w0 = energy(&mut solver)?;
    let mut w = w0;
    for _ in 0..steps {
        w = energy(&mut solver)?;
    }
    Ok((w - w0).abs() / w0)
}

#[derive(Debug, Clone, Copy)]
pub struct PlaneWaveProbe {
    pub amplitude: f64,
    /// Peak |E| at the probe over the last five periods.
    pub measured_amplitude: f64,
    pub frequency: f64,
    /// From zero crossings over the second half of the run.
    pub measured_frequency: f64,
    /// Largest cross-polarised |E| at the probe, relative to the amplitude.
    pub cross_polarization: f64,
}

/// Drives a y-polarised, z-travelling plane wave through a quasi-1D column
/// and records `E` downstream of the source.
pub fn plane_wave_probe(periods: usize) -> Result<PlaneWaveProbe> {
    let amplitude = 1.5e9;
    let omega = EV / HBAR;
    let drive = DriveSpec::new(amplitude, omega, [0.0, 1.0, 0.0], [0.0, 0.0, 1.0])?;
    let period = drive.period();
    let source = SourcePlane::new(drive, 40, Ramp::HalfCosine { duration: 5.0 * period })?;
    let pml = PmlConfig::single_axis(2);
    let grid = FieldGrid::new([1, 1, 512], 1e-9, pml)?;
    let probe = grid.index([0, 0, 300]);
    let dt = densemble::field::stable_dt(1e-9, Some(period));
    let mut solver = PstdSolver::new(grid, dt)?;
    let steps = (periods as f64 * period / dt).ceil() as usize;
    let mut trace = Vec::with_capacity(steps);
    let mut cross = 0.0f64;
    for _ in 0..steps {
        solver.advance(Some(&source))?;
        let e = solver.grid.e.at(probe);
        trace.push(e[1]);
        cross = cross.max(e[0].abs()).max(e[2].abs());
    }
    let tail = (5.0 * period / dt) as usize;
    let measured_amplitude = trace[steps - tail..].iter().fold(0.0f64, |m, v| m.max(v.abs()));

    // upward zero crossings, linearly interpolated
    let mut crossings = Vec::new();
    for n in steps / 2..steps - 1 {
        let (a, b) = (trace[n], trace[n + 1]);
        if a < 0.0 && b >= 0.0 {
            crossings.push((n as f64 + a / (a - b)) * dt);
        }
    }
    let cycles = (crossings.len() - 1) as f64;
    let measured_period = (crossings[crossings.len() - 1] - crossings[0]) / cycles;
    Ok(PlaneWaveProbe {
        amplitude,
        measured_amplitude,
        frequency: omega,
        measured_frequency: 2.0 * std::f64::consts::PI / measured_period,
        cross_polarization: cross / amplitude,
    })
}
