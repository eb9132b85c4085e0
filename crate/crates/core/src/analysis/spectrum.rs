use std::collections::BTreeMap;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::{table_to_csv, TimeSeries};

/// Fewest samples accepted in a spectral window.
pub const MIN_WINDOW_SAMPLES: usize = 256;

/// One-sided amplitude spectrum of a windowed signal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    /// Hz.
    pub frequency: Vec<f64>,
    /// A unit-amplitude sinusoid on an exact bin reads 1.
    pub amplitude: Vec<f64>,
    pub window: &'static str,
    pub t0: f64,
    pub t1: f64,
    pub samples: usize,
    /// Mean square of the windowed samples.
    pub mean_square: f64,
}

impl Spectrum {
    /// `sum w_k A_k^2` with `w = 1` at DC and Nyquist and `1/2` elsewhere.
    /// Equals `mean_square` by Parseval's theorem.
    pub fn parseval_sum(&self) -> f64 {
        let last = self.amplitude.len() - 1;
        let nyquist_bin = self.samples % 2 == 0;
        self.amplitude
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let w = if k == 0 || (k == last && nyquist_bin) { 1.0 } else { 0.5 };
                w * a * a
            })
            .sum()
    }

    pub fn resolution(&self) -> f64 {
        self.frequency.get(1).copied().unwrap_or(f64::NAN)
    }

    /// Amplitude at the bin nearest `f`.
    pub fn amplitude_at(&self, f: f64) -> f64 {
        let k = (f / self.resolution()).round().max(0.0) as usize;
        self.amplitude[k.min(self.amplitude.len() - 1)]
    }

    /// Local maxima as `(frequency, amplitude)`, strongest first.
    pub fn peaks(&self) -> Vec<(f64, f64)> {
        let a = &self.amplitude;
        let mut out: Vec<(f64, f64)> = (1..a.len().saturating_sub(1))
            .filter(|&k| a[k] > a[k - 1] && a[k] >= a[k + 1])
            .map(|k| (self.frequency[k], a[k]))
            .collect();
        out.sort_by(|x, y| y.1.total_cmp(&x.1));
        out
    }

    /// Strongest local maximum with frequency in `(lo, hi)`.
    pub fn strongest_peak_in(&self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        self.peaks().into_iter().find(|&(f, _)| f > lo && f < hi)
    }

    /// CSV with `frequency_hz,amplitude` columns and the window in metadata.
    pub fn to_csv(&self) -> String {
        let meta: BTreeMap<String, String> = [
            ("kind", "spectrum".to_string()),
            ("window", self.window.to_string()),
            ("t0_s", format!("{:e}", self.t0)),
            ("t1_s", format!("{:e}", self.t1)),
            ("samples", self.samples.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        table_to_csv(&meta, &["frequency_hz", "amplitude"], &[&self.frequency, &self.amplitude])
    }
}

/// Rectangular-window amplitude spectrum of `column` over `t0 <= t <= t1`.
/// Samples must be uniformly spaced.
pub fn windowed_spectrum(series: &TimeSeries, column: &str, t0: f64, t1: f64) -> Result<Spectrum> {
    let (t, x) = series.window(column, t0, t1)?;
    if t.len() < MIN_WINDOW_SAMPLES {
        return Err(Error::config(
            "analysis.window",
            format!("{} samples in [{t0:e}, {t1:e}] s, need at least {MIN_WINDOW_SAMPLES}", t.len()),
        ));
    }
    let n = t.len();
    let dt = (t[n - 1] - t[0]) / (n - 1) as f64;
    if let Some(w) = t.windows(2).find(|w| ((w[1] - w[0]) - dt).abs() > 1e-6 * dt) {
        return Err(Error::config(
            "analysis.window",
            format!("samples are not uniformly spaced near t = {:e} s", w[0]),
        ));
    }
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let bins = n / 2 + 1;
    let amplitude = (0..bins)
        .map(|k| {
            let edge = k == 0 || (n % 2 == 0 && k == n / 2);
            buf[k].norm() / n as f64 * if edge { 1.0 } else { 2.0 }
        })
        .collect();
    Ok(Spectrum {
        frequency: (0..bins).map(|k| k as f64 / (n as f64 * dt)).collect(),
        amplitude,
        window: "rectangular",
        t0: t[0],
        t1: t[n - 1],
        samples: n,
        mean_square: x.iter().map(|v| v * v).sum::<f64>() / n as f64,
    })
}
