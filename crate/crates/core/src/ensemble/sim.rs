use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{EnsembleConfig, ProbeConfig};
use super::geometry::{rasterize, EnsembleGeometry};
use crate::analysis::ensemble_average;
use crate::emitter::{
    build_hamiltonian, excited, free_current, lindblad_rhs, rk4_step, spontaneous_channels,
    DensityMatrix4, LindbladChannel, RhsContext, GROUND,
};
use crate::error::{Error, Result};
use crate::field::{record_snapshot, FieldComponent, PstdSolver, SourcePlane};
use crate::physics::EmitterSpec;
use crate::series::TimeSeries;

/// Columns of the ensemble-average series.
pub const AVERAGE_COLUMNS: [&str; 5] = ["rho_gg", "rho_xx", "rho_yy", "rho_zz", "purity"];

/// Columns of the energy series.
pub const ENERGY_COLUMNS: [&str; 2] = ["field_energy_j", "absorbed_work_j"];

/// Coupled field and emitter state.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub solver: PstdSolver,
    pub source: SourcePlane,
    pub spec: EmitterSpec,
    pub geometry: Option<EnsembleGeometry>,
    /// One state per occupied cell, in the order of `geometry.occupied_cells`.
    pub states: Vec<DensityMatrix4>,
    channels: [LindbladChannel; 3],
    energy_diagnostics: bool,
    /// `sum J.(E^n + E^{n+1})/2 dt V` over all completed steps, J.
    pub(crate) absorbed: f64,
    /// Leapfrog field energy and absorbed work at the start of the last step.
    pub(crate) field_energy: Option<f64>,
    pub(crate) absorbed_start: f64,
}

impl Ensemble {
    pub fn new(config: &EnsembleConfig) -> Result<Self> {
        config.validate()?;
        let grid = config.build_grid()?;
        let source = config.source_plane(&grid)?;
        let geometry = match &config.geometry {
            Some(g) => Some(EnsembleGeometry {
                shape: g.shape,
                occupied_cells: rasterize(&g.shape, &grid)?,
                density: g.density,
            }),
            None => None,
        };
        let spec = config.emitter_spec()?;
        let cells = geometry.as_ref().map_or(0, |g| g.occupied_cells.len());
        Ok(Self {
            solver: PstdSolver::new(grid, config.dt()?)?,
            source,
            spec,
            geometry,
            states: vec![DensityMatrix4::ground(); cells],
            channels: spontaneous_channels(spec.gamma0),
            energy_diagnostics: config.run.energy_diagnostics,
            absorbed: 0.0,
            field_energy: None,
            absorbed_start: 0.0,
        })
    }

    pub fn dt(&self) -> f64 {
        self.solver.dt()
    }

    pub fn step_index(&self) -> u64 {
        self.solver.step_index()
    }

    pub fn time(&self) -> f64 {
        self.step_index() as f64 * self.dt()
    }

    pub fn cells(&self) -> &[usize] {
        self.geometry.as_ref().map_or(&[], |g| &g.occupied_cells)
    }

    pub fn absorbed_work(&self) -> f64 {
        self.absorbed
    }

    /// Leapfrog field energy and absorbed work at the start of the most
    /// recent step, with its time. Only tracked with energy diagnostics on.
    pub fn energy_at_last_step(&self) -> Option<(f64, [f64; 2])> {
        let t = self.step_index().checked_sub(1)? as f64 * self.dt();
        Some((t, [self.field_energy?, self.absorbed_start]))
    }

    /// One time step: source, `H`, emitters driven by `E^n`, current, `E`.
    pub fn step(&mut self) -> Result<()> {
        let n = self.step_index();
        let dt = self.dt();
        self.solver.apply_source(&self.source, n as f64 * dt)?;
        let h_before = self.energy_diagnostics.then(|| self.solver.grid.h.clone());
        self.absorbed_start = self.absorbed;
        self.solver.step_h()?;
        if let Some(h) = &h_before {
            self.field_energy = Some(self.solver.grid.leapfrog_energy(h));
        }

        let density = self.geometry.as_ref().map_or(0.0, |g| g.density);
        let cells = self.geometry.as_ref().map_or(&[][..], |g| &g.occupied_cells[..]);
        let grid = &self.solver.grid;
        let spec = &self.spec;
        let channels = &self.channels[..];
        let updated: Vec<(DensityMatrix4, [f64; 3])> = cells
            .par_iter()
            .zip(self.states.par_iter())
            .map(|(&cell, rho)| {
                let ctx = RhsContext {
                    hamiltonian: build_hamiltonian(grid.e.at(cell), spec),
                    channels,
                };
                let tag = |e: Error| match e {
                    Error::Numeric { message, .. } => Error::numeric(
                        n + 1,
                        format!("cell {:?}: {message}", grid.coords(cell)),
                    ),
                    other => other,
                };
                let next = rk4_step(rho, &ctx, dt).map_err(tag)?;
                let d = lindblad_rhs(&next, &ctx.hamiltonian, channels).map_err(tag)?;
                let j = free_current(&d, spec, density).map_err(tag)?;
                Ok((next, j))
            })
            .collect::<Result<_>>()?;

        let e_before: Vec<[f64; 3]> = if self.energy_diagnostics {
            cells.iter().map(|&c| self.solver.grid.e.at(c)).collect()
        } else {
            Vec::new()
        };
        for ((state, &cell), (next, j)) in self.states.iter_mut().zip(cells).zip(updated) {
            *state = next;
            self.solver.grid.j.set(cell, j);
        }
        self.solver.step_e()?;

        if self.energy_diagnostics {
            let grid = &self.solver.grid;
            let work: f64 = cells
                .iter()
                .zip(&e_before)
                .map(|(&c, e0)| {
                    let (j, e1) = (grid.j.at(c), grid.e.at(c));
                    (0..3).map(|a| j[a] * 0.5 * (e0[a] + e1[a])).sum::<f64>()
                })
                .sum();
            self.absorbed += work * dt * grid.cell_volume();
        }
        if !self.solver.grid.all_finite() {
            return Err(Error::numeric(n + 1, "non-finite field"));
        }
        Ok(())
    }

    pub fn average_row(&self) -> Result<[f64; 5]> {
        let avg = ensemble_average(self.time(), &self.states)?;
        Ok([
            avg.population(GROUND),
            avg.population(excited(0)),
            avg.population(excited(1)),
            avg.population(excited(2)),
            avg.purity,
        ])
    }

    /// Writes the full fields and every cell state into `dir`.
    pub fn write_diagnostic(&self, dir: &Path) -> Result<PathBuf> {
        let grid = &self.solver.grid;
        let (step, t) = (self.step_index(), self.time());
        for c in FieldComponent::ALL {
            record_snapshot(grid, c, None, t, step, dir, c.name())?;
        }
        let states: Vec<Vec<[f64; 2]>> = self
            .states
            .iter()
            .map(|s| s.matrix().iter().map(|v| [v.re, v.im]).collect())
            .collect();
        let doc = serde_json::json!({
            "step": step,
            "time_s": t,
            "cells": self.cells().iter().map(|&c| grid.coords(c)).collect::<Vec<_>>(),
            "states_column_major_re_im": states,
        });
        std::fs::write(dir.join("states.json"), serde_json::to_string(&doc)?)?;
        Ok(dir.to_path_buf())
    }
}

pub(crate) fn probe_series(p: &ProbeConfig) -> TimeSeries {
    TimeSeries::new(p.quantities.iter().map(|q| q.name()))
        .with_meta("kind", "probe")
        .with_meta("probe", p.name.clone())
        .with_meta("cell", format!("{:?}", p.cell))
}

pub(crate) fn probe_row(ens: &Ensemble, p: &ProbeConfig) -> Vec<f64> {
    let grid = &ens.solver.grid;
    let idx = grid.index(p.cell);
    p.quantities.iter().map(|q| q.component().data(grid)[idx]).collect()
}
