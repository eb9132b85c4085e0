use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use densemble::analysis::{
    compare_runs, decay_enhancement, fit_disorder_onset, fit_logistic, phasor, windowed_spectrum,
};
use densemble::series::{Table, TimeSeries};
use densemble::{Error, Result};
use num_complex::Complex64;

#[derive(Subcommand)]
pub enum Analyze {
    /// Amplitude spectrum of one column over a time window.
    Fft(FftArgs),
    /// Fit the disorder-onset model to a population column.
    FitDisorder(FitDisorderArgs),
    /// Fit the logistic saturation curve to (density, rate) points.
    FitLogistic(FitLogisticArgs),
    /// Compare a coupled run's averages with a surrogate run.
    Compare(CompareArgs),
    /// Decay-rate enhancement at an emitter cell from probe phasors.
    Enhancement(EnhancementArgs),
}

#[derive(Args)]
pub struct Window {
    /// Window start, s. Defaults to the first sample.
    #[arg(long)]
    t0: Option<f64>,
    /// Window end, s. Defaults to the last sample.
    #[arg(long)]
    t1: Option<f64>,
}

#[derive(Args)]
pub struct FftArgs {
    input: PathBuf,
    /// Defaults to the first data column.
    #[arg(long)]
    column: Option<String>,
    #[command(flatten)]
    window: Window,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
pub struct FitDisorderArgs {
    input: PathBuf,
    #[arg(long, default_value = "rho_yy")]
    column: String,
    #[command(flatten)]
    window: Window,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
pub struct FitLogisticArgs {
    /// CSV table; the header names the columns.
    input: PathBuf,
    /// Defaults to the first column.
    #[arg(long)]
    x_column: Option<String>,
    /// Defaults to `gamma_ens`, else the second column.
    #[arg(long)]
    y_column: Option<String>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
pub struct CompareArgs {
    full: PathBuf,
    surrogate: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
pub struct EnhancementArgs {
    /// Probe series at the emitter cell from the coupled run, with field
    /// (`ex`, `ey`, `ez`) and current (`jx`, `jy`, `jz`) columns.
    probe: PathBuf,
    /// Probe series at the same cell from a run without emitters.
    reference: PathBuf,
    /// Drive frequency, Hz.
    #[arg(long)]
    frequency_hz: f64,
    #[command(flatten)]
    window: Window,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn out_path(given: &Option<PathBuf>, root: &Path, input: &Path, suffix: &str) -> PathBuf {
    given.clone().unwrap_or_else(|| {
        let stem = input.file_stem().unwrap_or_default().to_string_lossy();
        root.join("analysis").join(format!("{stem}.{suffix}"))
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn bounds(s: &TimeSeries, w: &Window) -> Result<(f64, f64)> {
    let (Some(&first), Some(&last)) = (s.time.first(), s.time.last()) else {
        return Err(Error::Config { field: "input".into(), message: "series has no samples".into() });
    };
    Ok((w.t0.unwrap_or(first), w.t1.unwrap_or(last)))
}

pub fn run(cmd: &Analyze, root: &Path) -> Result<()> {
    match cmd {
        Analyze::Fft(a) => {
            let s = TimeSeries::read_csv(&a.input)?;
            let column = match &a.column {
                Some(c) => c.clone(),
                None => s.names.first().cloned().ok_or_else(|| Error::Config {
                    field: "column".into(),
                    message: "input has no data columns".into(),
                })?,
            };
            let (t0, t1) = bounds(&s, &a.window)?;
            let sp = windowed_spectrum(&s, &column, t0, t1)?;
            let path = out_path(&a.output, root, &a.input, "spectrum.csv");
            write(&path, &sp.to_csv())?;
            let (f, amp) = sp.peaks().first().copied().unwrap_or((0.0, sp.amplitude[0]));
            println!(
                "fft {column}: peak {f:.6e} Hz amplitude {amp:.6e}, {} samples, {} window, wrote {}",
                sp.samples,
                sp.window,
                path.display()
            );
        }
        Analyze::FitDisorder(a) => {
            let s = TimeSeries::read_csv(&a.input)?;
            let (t0, t1) = bounds(&s, &a.window)?;
            let (t, y) = s.window(&a.column, t0, t1)?;
            let fit = fit_disorder_onset(&t, &y)?;
            let path = out_path(&a.output, root, &a.input, "fit_disorder.json");
            write(&path, &serde_json::to_string_pretty(&fit)?)?;
            println!(
                "fit-disorder {}: gamma_ens {:.6e} 1/s, omega {:.6e} rad/s, g {:.6e} 1/s, converged {}, wrote {}",
                a.column,
                fit.param("gamma_ens")?,
                fit.param("omega")?,
                fit.param("g")?,
                fit.converged,
                path.display()
            );
        }
        Analyze::FitLogistic(a) => {
            let table = Table::read_csv(&a.input)?;
            let missing = |name: &str| Error::Config {
                field: "column".into(),
                message: format!("`{name}` is not a column of {}", a.input.display()),
            };
            let x_name = a.x_column.clone().or_else(|| table.names.first().cloned()).unwrap_or_default();
            let y_name = a.y_column.clone().unwrap_or_else(|| {
                if table.column("gamma_ens").is_some() {
                    "gamma_ens".into()
                } else {
                    table.names.get(1).cloned().unwrap_or_default()
                }
            });
            let x = table.column(&x_name).ok_or_else(|| missing(&x_name))?;
            let y = table.column(&y_name).ok_or_else(|| missing(&y_name))?;
            let fit = fit_logistic(x, y)?;
            let path = out_path(&a.output, root, &a.input, "fit_logistic.json");
            write(&path, &serde_json::to_string_pretty(&fit)?)?;
            println!(
                "fit-logistic {y_name} vs {x_name}: L {:.6e}, k {:.6e}, a {:.6e}, converged {}, wrote {}",
                fit.param("L")?,
                fit.param("k")?,
                fit.param("a")?,
                fit.converged,
                path.display()
            );
        }
        Analyze::Compare(a) => {
            let full = TimeSeries::read_csv(&a.full)?;
            let sur = TimeSeries::read_csv(&a.surrogate)?;
            let report = compare_runs(&full, &sur)?;
            let path = out_path(&a.output, root, &a.full, "compare.json");
            write(&path, &report.to_json()?)?;
            let worst = report.observables.iter().fold(0.0f64, |m, o| m.max(o.rms_deviation));
            println!(
                "compare: largest rms deviation {worst:.6e}, ordering {} vs {} ({}), wrote {}",
                report.ordering_full,
                report.ordering_surrogate,
                if report.ordering_matches { "match" } else { "differ" },
                path.display()
            );
        }
        Analyze::Enhancement(a) => {
            let probe = TimeSeries::read_csv(&a.probe)?;
            let reference = TimeSeries::read_csv(&a.reference)?;
            let (t0, t1) = bounds(&probe, &a.window)?;
            let omega = 2.0 * std::f64::consts::PI * a.frequency_hz;
            let phasors = |s: &TimeSeries, prefix: &str| -> Result<[Complex64; 3]> {
                let mut out = [Complex64::new(0.0, 0.0); 3];
                for (k, axis) in ["x", "y", "z"].iter().enumerate() {
                    let name = format!("{prefix}{axis}");
                    if s.column(&name).is_some() {
                        let (t, v) = s.window(&name, t0, t1)?;
                        out[k] = phasor(&t, &v, omega);
                    }
                }
                Ok(out)
            };
            let ratio = decay_enhancement(
                phasors(&probe, "j")?,
                phasors(&probe, "e")?,
                phasors(&reference, "e")?,
            )?;
            let path = out_path(&a.output, root, &a.probe, "enhancement.json");
            let doc = serde_json::json!({
                "enhancement": ratio,
                "t0_s": t0,
                "t1_s": t1,
                "omega_rad_s": omega,
                "probe": a.probe.display().to_string(),
                "reference": a.reference.display().to_string(),
            });
            write(&path, &serde_json::to_string_pretty(&doc)?)?;
            println!("enhancement: {ratio:.6e}, wrote {}", path.display());
        }
    }
    Ok(())
}
