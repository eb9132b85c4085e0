use std::path::{Path, PathBuf};

use super::checkpoint::{self, BlobReader, BlobWriter, CheckpointManifest, SeriesHeader};
use super::config::{EnsembleConfig, SnapshotConfig};
use super::sim::{probe_row, probe_series, Ensemble, AVERAGE_COLUMNS, ENERGY_COLUMNS};
use super::steady::steady_state_check;
use crate::error::{Error, Result};
use crate::field::record_snapshot;
use crate::series::TimeSeries;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Where series, snapshots and checkpoints go. Nothing is written without it.
    pub output_dir: Option<PathBuf>,
    /// Write a checkpoint every this many steps.
    pub checkpoint_every: Option<u64>,
    /// Manifest of a checkpoint to continue from.
    pub resume: Option<PathBuf>,
    /// Stop once this step index is reached, as if interrupted.
    pub stop_at_step: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    /// Ensemble-average series; empty without emitters.
    pub averages: TimeSeries,
    /// One series per configured probe, in config order.
    pub probes: Vec<TimeSeries>,
    pub energy: Option<TimeSeries>,
    pub snapshot_files: Vec<PathBuf>,
    pub checkpoint_files: Vec<PathBuf>,
    /// Files written by [`RunOutput::write`] or by `run` itself.
    pub series_files: Vec<PathBuf>,
    pub steps: u64,
    /// The configured duration was reached or the averages settled.
    pub finished: bool,
    pub steady_state_reached: bool,
    pub ensemble: Ensemble,
}

struct Recorder<'a> {
    config: &'a EnsembleConfig,
    averages: TimeSeries,
    probes: Vec<TimeSeries>,
    energy: Option<TimeSeries>,
    snapshots: Vec<SnapshotConfig>,
    snapshot_next: Vec<usize>,
    snapshot_files: Vec<PathBuf>,
    window: f64,
}

impl<'a> Recorder<'a> {
    fn new(config: &'a EnsembleConfig, ens: &Ensemble) -> Self {
        let hash = config.hash();
        let averages = TimeSeries::new(AVERAGE_COLUMNS)
            .with_meta("kind", "ensemble")
            .with_meta("config_hash", hash.clone())
            .with_meta("density_m3", format!("{:e}", ens.geometry.as_ref().map_or(0.0, |g| g.density)))
            .with_meta("cells", ens.cells().len().to_string());
        let probes = config
            .probes
            .iter()
            .map(|p| probe_series(p).with_meta("config_hash", hash.clone()))
            .collect();
        let energy = config
            .run
            .energy_diagnostics
            .then(|| TimeSeries::new(ENERGY_COLUMNS).with_meta("kind", "energy"));
        let snapshots: Vec<SnapshotConfig> = config
            .snapshots
            .iter()
            .map(|s| {
                let mut s = s.clone();
                s.times.sort_by(f64::total_cmp);
                s
            })
            .collect();
        let period = ens.source.drive.period();
        let window = config
            .run
            .steady_state
            .and_then(|s| s.window)
            .unwrap_or(20.0 * period);
        Self {
            config,
            averages,
            probes,
            energy,
            snapshot_next: vec![0; snapshots.len()],
            snapshots,
            snapshot_files: Vec::new(),
            window,
        }
    }

    /// Records whatever is due at the current step; returns whether the
    /// averages have settled.
    fn record(&mut self, ens: &Ensemble, total: u64, out: Option<&Path>) -> Result<bool> {
        let s = ens.step_index();
        let t = ens.time();
        let mut settled = false;
        if s % self.config.run.average_stride == 0 || s == total {
            if !ens.states.is_empty() {
                self.averages.push(t, &ens.average_row()?)?;
                if let Some(ss) = self.config.run.steady_state {
                    settled = steady_state_check(&self.averages, self.window, ss.tol);
                }
            }
            if let (Some(series), Some((te, row))) = (self.energy.as_mut(), ens.energy_at_last_step()) {
                series.push(te, &row)?;
            }
        }
        for (p, series) in self.config.probes.iter().zip(self.probes.iter_mut()) {
            if s % p.stride == 0 || s == total {
                series.push(t, &probe_row(ens, p))?;
            }
        }
        for (k, snap) in self.snapshots.iter().enumerate() {
            let mut taken = false;
            while self.snapshot_next[k] < snap.times.len()
                && snap.times[self.snapshot_next[k]] <= t + 1e-6 * ens.dt()
            {
                self.snapshot_next[k] += 1;
                taken = true;
            }
            if let (true, Some(dir)) = (taken, out) {
                let plane = snap
                    .plane
                    .map_or("full".to_string(), |p| format!("{}{}", ["x", "y", "z"][p.axis], p.offset));
                let stem = format!("{}_{plane}_{s:08}", snap.component.name().replace('_', ""));
                let (bin, _) = record_snapshot(
                    &ens.solver.grid,
                    snap.component,
                    snap.plane,
                    t,
                    s,
                    &dir.join("snapshots"),
                    &stem,
                )?;
                self.snapshot_files.push(bin);
            }
        }
        Ok(settled)
    }

    fn headers(&self) -> Vec<SeriesHeader> {
        self.all_series()
            .map(|s| SeriesHeader {
                names: s.names.clone(),
                metadata: s.metadata.clone(),
            })
            .collect()
    }

    fn all_series(&self) -> impl Iterator<Item = &TimeSeries> {
        std::iter::once(&self.averages)
            .chain(self.probes.iter())
            .chain(self.energy.iter())
    }

    fn all_series_mut(&mut self) -> impl Iterator<Item = &mut TimeSeries> {
        std::iter::once(&mut self.averages)
            .chain(self.probes.iter_mut())
            .chain(self.energy.iter_mut())
    }
}

fn save_checkpoint(dir: &Path, ens: &Ensemble, rec: &Recorder) -> Result<PathBuf> {
    let grid = &ens.solver.grid;
    let mut w = BlobWriter::new();
    w.u64(ens.step_index());
    for field in [&grid.e, &grid.h, &grid.j] {
        for c in 0..3 {
            w.slice(field.component(c));
        }
    }
    w.u64(grid.pml_aux.len() as u64);
    for a in &grid.pml_aux {
        w.slice(a);
    }
    w.states(&ens.states);
    w.f64(ens.absorbed);
    w.f64(ens.absorbed_start);
    w.f64(ens.field_energy.unwrap_or(f64::NAN));
    for s in rec.all_series() {
        w.series(s);
    }
    let manifest = CheckpointManifest {
        format: checkpoint::FORMAT.to_string(),
        config_hash: rec.config.hash(),
        step: ens.step_index(),
        time_s: ens.time(),
        dims: grid.dims(),
        cells: ens.states.len(),
        blob: String::new(),
        blob_bytes: 0,
        blob_sha256: String::new(),
        series: rec.headers(),
        snapshot_next: rec.snapshot_next.clone(),
        snapshot_files: rec.snapshot_files.clone(),
    };
    checkpoint::write(dir, &format!("checkpoint_{:08}", ens.step_index()), &w.bytes, manifest)
}

fn restore_checkpoint(path: &Path, ens: &mut Ensemble, rec: &mut Recorder) -> Result<()> {
    let (manifest, blob) = checkpoint::read(path)?;
    if manifest.config_hash != rec.config.hash() {
        return Err(Error::config(
            "resume",
            format!(
                "checkpoint was written for config {} but this config hashes to {}",
                manifest.config_hash,
                rec.config.hash()
            ),
        ));
    }
    let bin = path.with_file_name(&manifest.blob);
    let mut r = BlobReader::new(&blob, &bin)?;
    let step = r.u64()?;
    let grid = &mut ens.solver.grid;
    for field in [&mut grid.e, &mut grid.h, &mut grid.j] {
        for c in 0..3 {
            r.into_slice(field.component_mut(c))?;
        }
    }
    let aux = r.u64()? as usize;
    if aux != grid.pml_aux.len() {
        return Err(Error::Parse {
            path: bin,
            message: format!("{aux} absorbing-layer arrays, grid has {}", grid.pml_aux.len()),
        });
    }
    for a in grid.pml_aux.iter_mut() {
        r.into_slice(a)?;
    }
    ens.states = r.states(ens.states.len())?;
    ens.absorbed = r.f64()?;
    ens.absorbed_start = r.f64()?;
    let fe = r.f64()?;
    ens.field_energy = (!fe.is_nan()).then_some(fe);
    let headers = manifest.series.clone();
    if headers.len() != rec.all_series().count() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: "recorded series do not match the config".into(),
        });
    }
    for (s, h) in rec.all_series_mut().zip(&headers) {
        *s = r.series(h)?;
    }
    r.finish()?;
    if manifest.snapshot_next.len() != rec.snapshot_next.len() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: "snapshot schedule does not match the config".into(),
        });
    }
    rec.snapshot_next = manifest.snapshot_next;
    rec.snapshot_files = manifest.snapshot_files;
    ens.solver.set_step_index(step);
    Ok(())
}

/// Runs the coupled simulation for the configured duration, or until the
/// averages settle when a steady-state criterion is set.
pub fn run(config: &EnsembleConfig, options: &RunOptions) -> Result<RunOutput> {
    let mut ens = Ensemble::new(config)?;
    let out = options.output_dir.as_deref();
    let mut rec = Recorder::new(config, &ens);
    let total = (config.run.duration / ens.dt()).round().max(1.0) as u64;
    let mut settled = false;
    if let Some(path) = &options.resume {
        restore_checkpoint(path, &mut ens, &mut rec)?;
    } else {
        settled = rec.record(&ens, total, out)?;
    }
    let mut checkpoint_files = Vec::new();
    while ens.step_index() < total && !settled {
        if options.stop_at_step.is_some_and(|s| ens.step_index() >= s) {
            break;
        }
        if let Err(e) = ens.step() {
            return Err(match (e, out) {
                (Error::Numeric { step, message, .. }, Some(dir)) => {
                    let snapshot = ens.write_diagnostic(&dir.join("diagnostic")).ok();
                    Error::Numeric {
                        step,
                        message,
                        snapshot,
                    }
                }
                (e, _) => e,
            });
        }
        settled = rec.record(&ens, total, out)?;
        if let (Some(every), Some(dir)) = (options.checkpoint_every, out) {
            if every > 0 && ens.step_index() % every == 0 && ens.step_index() < total {
                checkpoint_files.push(save_checkpoint(&dir.join("checkpoints"), &ens, &rec)?);
            }
        }
    }
    let steps = ens.step_index();
    let mut output = RunOutput {
        averages: rec.averages,
        probes: rec.probes,
        energy: rec.energy,
        snapshot_files: rec.snapshot_files,
        checkpoint_files,
        series_files: Vec::new(),
        steps,
        finished: steps >= total || settled,
        steady_state_reached: settled,
        ensemble: ens,
    };
    if let Some(dir) = out {
        output.write(dir)?;
    }
    Ok(output)
}

impl RunOutput {
    /// Writes `averages.csv`, `probe_<name>.csv` and `energy.csv` into `dir`.
    pub fn write(&mut self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut files = Vec::new();
        if !self.averages.is_empty() {
            let p = dir.join("averages.csv");
            self.averages.write_csv(&p)?;
            files.push(p);
        }
        for s in &self.probes {
            let name = s.metadata.get("probe").cloned().unwrap_or_default();
            let p = dir.join(format!("probe_{name}.csv"));
            s.write_csv(&p)?;
            files.push(p);
        }
        if let Some(e) = &self.energy {
            let p = dir.join("energy.csv");
            e.write_csv(&p)?;
            files.push(p);
        }
        self.series_files = files;
        Ok(())
    }
}
