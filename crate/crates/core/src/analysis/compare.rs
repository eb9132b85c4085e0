use serde::Serialize;

use super::fit::fit_disorder_onset;
use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Populations compared by [`compare_runs`], in ordering-report order.
pub const COMPARED_POPULATIONS: [&str; 3] = ["rho_xx", "rho_yy", "rho_zz"];

/// Fraction of the common range averaged for steady-state values.
pub const STEADY_FRACTION: f64 = 0.2;

/// Populations whose steady values differ by less than this fraction of the
/// larger one count as tied when checking the ordering.
pub const TIE_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableComparison {
    pub name: String,
    pub rms_deviation: f64,
    pub max_deviation: f64,
    pub steady_full: f64,
    pub steady_surrogate: f64,
    /// `steady_full - steady_surrogate`.
    pub steady_delta: f64,
    /// `steady_full / steady_surrogate`.
    pub steady_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub t0: f64,
    pub t1: f64,
    pub samples: usize,
    pub observables: Vec<ObservableComparison>,
    /// Fitted envelope damping rates of `rho_yy`, 1/s, when finite and
    /// positive. The rate can be usable while the fit as a whole reports
    /// no convergence because the leakage term is unidentified.
    pub envelope_rate_full: Option<f64>,
    pub envelope_rate_surrogate: Option<f64>,
    pub envelope_rate_ratio: Option<f64>,
    pub envelope_fit_converged_full: bool,
    pub envelope_fit_converged_surrogate: bool,
    pub ordering_full: String,
    pub ordering_surrogate: String,
    /// No pair of populations is strictly ordered one way in one run and
    /// the other way in the other.
    pub ordering_matches: bool,
}

impl ComparisonReport {
    pub fn observable(&self, name: &str) -> Option<&ObservableComparison> {
        self.observables.iter().find(|o| o.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Linear interpolation of `(t, y)` at `x`; `t` ascending and covering `x`.
pub fn interpolate(t: &[f64], y: &[f64], x: f64) -> f64 {
    let i = t.partition_point(|&v| v <= x);
    if i == 0 {
        return y[0];
    }
    if i >= t.len() {
        return y[t.len() - 1];
    }
    let (t0, t1) = (t[i - 1], t[i]);
    let w = if t1 > t0 { (x - t0) / (t1 - t0) } else { 0.0 };
    y[i - 1] + w * (y[i] - y[i - 1])
}

fn ordering_label(values: &[(String, f64)]) -> String {
    let mut v: Vec<&(String, f64)> = values.iter().collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut out = v[0].0.clone();
    for w in v.windows(2) {
        let tied = (w[0].1 - w[1].1).abs() <= TIE_TOLERANCE * w[0].1.abs().max(w[1].1.abs());
        out.push_str(if tied { " ~ " } else { " > " });
        out.push_str(&w[1].0);
    }
    out
}

fn strict_order(a: f64, b: f64) -> i32 {
    if (a - b).abs() <= TIE_TOLERANCE * a.abs().max(b.abs()) {
        0
    } else if a > b {
        1
    } else {
        -1
    }
}

/// Compares the shared population and purity columns of a full run and a
/// surrogate run on a common uniform grid over their overlapping range.
pub fn compare_runs(full: &TimeSeries, surrogate: &TimeSeries) -> Result<ComparisonReport> {
    let names: Vec<&str> = full
        .names
        .iter()
        .filter(|n| surrogate.column(n).is_some())
        .map(String::as_str)
        .collect();
    if names.is_empty() {
        return Err(Error::config("compare", "the series share no columns"));
    }
    let (Some(&fa), Some(&fb), Some(&sa), Some(&sb)) =
        (full.time.first(), full.time.last(), surrogate.time.first(), surrogate.time.last())
    else {
        return Err(Error::config("compare", "a series is empty"));
    };
    let (t0, t1) = (fa.max(sa), fb.min(sb));
    if !(t1 > t0) {
        return Err(Error::config(
            "compare",
            format!("time ranges [{fa:e}, {fb:e}] and [{sa:e}, {sb:e}] s do not overlap"),
        ));
    }
    let inside = |s: &TimeSeries| s.time.iter().filter(|&&t| t >= t0 && t <= t1).count();
    let samples = inside(full).max(inside(surrogate)).max(2);
    let grid: Vec<f64> = (0..samples)
        .map(|i| t0 + (t1 - t0) * i as f64 / (samples - 1) as f64)
        .collect();
    let steady_from = t1 - STEADY_FRACTION * (t1 - t0);

    let mut observables = Vec::new();
    let mut resampled = Vec::new();
    for name in &names {
        let f = full.require(name)?;
        let s = surrogate.require(name)?;
        let fv: Vec<f64> = grid.iter().map(|&x| interpolate(&full.time, f, x)).collect();
        let sv: Vec<f64> = grid.iter().map(|&x| interpolate(&surrogate.time, s, x)).collect();
        let diff: Vec<f64> = fv.iter().zip(&sv).map(|(a, b)| a - b).collect();
        let steady = |v: &[f64]| {
            let tail: Vec<f64> = grid.iter().zip(v).filter(|(t, _)| **t >= steady_from).map(|(_, x)| *x).collect();
            tail.iter().sum::<f64>() / tail.len() as f64
        };
        let (sf, ss) = (steady(&fv), steady(&sv));
        observables.push(ObservableComparison {
            name: name.to_string(),
            rms_deviation: (diff.iter().map(|d| d * d).sum::<f64>() / samples as f64).sqrt(),
            max_deviation: diff.iter().fold(0.0f64, |m, d| m.max(d.abs())),
            steady_full: sf,
            steady_surrogate: ss,
            steady_delta: sf - ss,
            steady_ratio: sf / ss,
        });
        resampled.push((name.to_string(), fv, sv));
    }

    let rate = |v: &[f64]| match fit_disorder_onset(&grid, v) {
        Ok(f) => (f.get("gamma_ens").filter(|r| r.is_finite() && *r > 0.0), f.converged),
        Err(_) => (None, false),
    };
    let ((rf, cf), (rs, cs)) = match resampled.iter().find(|r| r.0 == "rho_yy") {
        Some((_, fv, sv)) => (rate(fv), rate(sv)),
        None => ((None, false), (None, false)),
    };

    let pops: Vec<&ObservableComparison> = COMPARED_POPULATIONS
        .iter()
        .filter_map(|n| observables.iter().find(|o| o.name == *n))
        .collect();
    let (ordering_full, ordering_surrogate, ordering_matches) = if pops.is_empty() {
        (String::new(), String::new(), true)
    } else {
        let label = |pick: fn(&ObservableComparison) -> f64| {
            ordering_label(&pops.iter().map(|o| (o.name.clone(), pick(o))).collect::<Vec<_>>())
        };
        let mut matches = true;
        for i in 0..pops.len() {
            for j in i + 1..pops.len() {
                let a = strict_order(pops[i].steady_full, pops[j].steady_full);
                let b = strict_order(pops[i].steady_surrogate, pops[j].steady_surrogate);
                if a * b < 0 {
                    matches = false;
                }
            }
        }
        (label(|o| o.steady_full), label(|o| o.steady_surrogate), matches)
    };

    Ok(ComparisonReport {
        t0,
        t1,
        samples,
        observables,
        envelope_rate_full: rf,
        envelope_rate_surrogate: rs,
        envelope_rate_ratio: rf.zip(rs).map(|(a, b)| a / b),
        envelope_fit_converged_full: cf,
        envelope_fit_converged_surrogate: cs,
        ordering_full,
        ordering_surrogate,
        ordering_matches,
    })
}
