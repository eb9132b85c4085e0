//! `densemble`: runs the coupled and single-particle simulations and the
//! analysis pipeline.
//!
//! Exit codes: 0 success, 1 I/O or internal failure, 2 invalid
//! configuration or input, 3 numeric failure. Errors are printed to stderr
//! as one JSON object.

mod analyze;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use densemble::analysis::{fit_disorder_onset, STEADY_FRACTION};
use densemble::ensemble::{run, EnsembleConfig, RunOptions};
use densemble::series::{table_to_csv, TimeSeries};
use densemble::surrogate::{run_surrogate, SurrogateRunConfig};
use densemble::{Error, Result};
use rayon::prelude::*;

use manifest::{now, RunManifest};

#[derive(Parser)]
#[command(name = "densemble", version, about = "Dense driven emitter ensembles: coupled runs, surrogate runs, analysis")]
struct Cli {
    /// Parent directory for outputs when `--output` is not given.
    #[arg(long, global = true, env = "DENSEMBLE_OUTPUT_ROOT", default_value = "densemble-out")]
    output_root: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Coupled Maxwell-Liouville run from a TOML config.
    RunFull(RunFullArgs),
    /// Single-particle surrogate run, optionally swept over one key.
    RunSurrogate(RunSurrogateArgs),
    /// Post-processing of run output.
    #[command(subcommand)]
    Analyze(analyze::Analyze),
}

#[derive(Args)]
struct RunFullArgs {
    config: PathBuf,
    /// Output directory. Defaults to `<output-root>/<config stem>`.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Worker threads. Defaults to the available cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Write a checkpoint every this many steps.
    #[arg(long)]
    checkpoint_every: Option<u64>,
    /// Continue from a checkpoint manifest.
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Stop once this step is reached, leaving a resumable run.
    #[arg(long)]
    stop_at_step: Option<u64>,
}

#[derive(Args)]
struct RunSurrogateArgs {
    config: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// One trajectory per value: `key=v1,v2,...`.
    #[arg(long)]
    sweep: Option<String>,
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("{}", error_json(&e, code));
            ExitCode::from(code)
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } | Error::Parse { .. } | Error::Domain(_) | Error::Contract(_) => 2,
        Error::Numeric { .. } => 3,
        Error::Io(_) | Error::Json(_) => 1,
    }
}

fn error_json(e: &Error, code: u8) -> String {
    let mut v = serde_json::json!({
        "exit_code": code,
        "message": e.to_string(),
    });
    let kind = match e {
        Error::Config { field, .. } => {
            v["field"] = field.clone().into();
            "config"
        }
        Error::Parse { path, .. } => {
            v["path"] = path.display().to_string().into();
            "parse"
        }
        Error::Numeric { step, snapshot, .. } => {
            v["step"] = (*step).into();
            v["snapshot"] = snapshot.as_ref().map(|p| p.display().to_string()).into();
            "numeric"
        }
        Error::Domain(_) => "domain",
        Error::Contract(_) => "contract",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
    };
    v["error"] = kind.into();
    v.to_string()
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::RunFull(a) => run_full(a, &cli.output_root),
        Command::RunSurrogate(a) => run_surrogate_cmd(a, &cli.output_root),
        Command::Analyze(a) => analyze::run(a, &cli.output_root),
    }
}

fn default_output(root: &Path, config: &Path) -> PathBuf {
    root.join(config.file_stem().unwrap_or_default())
}

fn init_threads(requested: Option<usize>) -> Result<usize> {
    let n = match requested {
        Some(0) => return Err(Error::Config { field: "--threads".into(), message: "must be at least 1".into() }),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Contract(format!("thread pool: {e}")))?;
    Ok(n)
}

fn run_full(a: &RunFullArgs, root: &Path) -> Result<()> {
    let start = now();
    let config = EnsembleConfig::load(&a.config)?;
    let threads = init_threads(a.threads)?;
    let out = a.output.clone().unwrap_or_else(|| default_output(root, &a.config));
    std::fs::create_dir_all(&out)?;
    std::fs::write(out.join("config.toml"), config.to_toml()?)?;
    let manifest = RunManifest::new("run-full", config.hash(), threads, start);
    let options = RunOptions {
        output_dir: Some(out.clone()),
        checkpoint_every: a.checkpoint_every,
        resume: a.resume.clone(),
        stop_at_step: a.stop_at_step,
    };
    match run(&config, &options) {
        Ok(result) => {
            let status = match (result.finished, result.steady_state_reached) {
                (true, true) => "steady_state",
                (true, false) => "completed",
                (false, _) => "interrupted",
            };
            let path = manifest.finish(&out, status)?;
            println!(
                "run-full {status}: {} steps, {} emitter cells, manifest {}",
                result.steps,
                result.ensemble.cells().len(),
                path.display()
            );
            Ok(())
        }
        Err(e) => {
            if matches!(e, Error::Numeric { .. }) {
                manifest.finish(&out, "failed")?;
            }
            Err(e)
        }
    }
}

fn parse_sweep(spec: &str) -> Result<(String, Vec<f64>)> {
    let bad = |m: String| Error::Config { field: "sweep".into(), message: m };
    let (key, values) = spec
        .split_once('=')
        .ok_or_else(|| bad(format!("`{spec}` is not of the form key=v1,v2,...")))?;
    let values = values
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| bad(format!("`{v}` is not a number"))))
        .collect::<Result<Vec<f64>>>()?;
    if values.is_empty() {
        return Err(bad("no values".into()));
    }
    Ok((key.trim().to_string(), values))
}

fn steady_mean(s: &TimeSeries, name: &str) -> Result<f64> {
    let col = s.require(name)?;
    let end = s.time[s.len() - 1];
    let from = end - STEADY_FRACTION * (end - s.time[0]);
    let tail: Vec<f64> = s.time.iter().zip(col).filter(|(t, _)| **t >= from).map(|(_, v)| *v).collect();
    Ok(tail.iter().sum::<f64>() / tail.len() as f64)
}

fn run_surrogate_cmd(a: &RunSurrogateArgs, root: &Path) -> Result<()> {
    let start = now();
    let base = SurrogateRunConfig::load(&a.config)?;
    let sweep = a.sweep.as_deref().map(parse_sweep).transpose()?;
    let runs: Vec<(Option<f64>, SurrogateRunConfig)> = match &sweep {
        None => vec![(None, base)],
        Some((key, values)) => values
            .iter()
            .map(|&v| Ok((Some(v), base.with_value(key, v)?)))
            .collect::<Result<_>>()?,
    };
    let threads = init_threads(a.threads)?;
    let out = a.output.clone().unwrap_or_else(|| default_output(root, &a.config));
    std::fs::create_dir_all(&out)?;
    std::fs::write(out.join("config.toml"), base.to_toml()?)?;

    let results: Vec<TimeSeries> = runs
        .par_iter()
        .map(|(_, c)| Ok(run_surrogate(&c.to_config()?)?.with_meta("config_hash", c.hash())))
        .collect::<Result<_>>()?;

    let mut summary_rows: Vec<Vec<f64>> = Vec::new();
    for ((value, _), series) in runs.iter().zip(&results) {
        let name = match (value, &sweep) {
            (Some(v), Some((key, _))) => format!("surrogate_{key}_{v:e}.csv"),
            _ => "surrogate.csv".to_string(),
        };
        series.write_csv(&out.join(name))?;
        let fit = fit_disorder_onset(&series.time, series.require("rho_yy")?).ok();
        summary_rows.push(vec![
            value.unwrap_or(f64::NAN),
            steady_mean(series, "rho_xx")?,
            steady_mean(series, "rho_yy")?,
            steady_mean(series, "rho_zz")?,
            *series.require("purity")?.last().unwrap_or(&f64::NAN),
            fit.as_ref().and_then(|f| f.get("gamma_ens")).unwrap_or(f64::NAN),
            fit.as_ref().map_or(0.0, |f| f64::from(u8::from(f.converged))),
        ]);
    }
    if let Some((key, _)) = &sweep {
        let names = [
            key.as_str(),
            "rho_xx_steady",
            "rho_yy_steady",
            "rho_zz_steady",
            "purity_final",
            "gamma_ens",
            "fit_converged",
        ];
        let columns: Vec<Vec<f64>> = (0..names.len()).map(|c| summary_rows.iter().map(|r| r[c]).collect()).collect();
        let cols: Vec<&[f64]> = columns.iter().map(|c| &c[..]).collect();
        let meta = [("kind".to_string(), "surrogate_sweep".to_string())].into_iter().collect();
        std::fs::write(out.join("summary.csv"), table_to_csv(&meta, &names, &cols))?;
    }
    let path = RunManifest::new("run-surrogate", base.hash(), threads, start).finish(&out, "completed")?;
    println!(
        "run-surrogate completed: {} trajectories, rho_yy steady {:.6e}, manifest {}",
        results.len(),
        summary_rows[0][2],
        path.display()
    );
    Ok(())
}
