use crate::series::TimeSeries;

/// True when, for every column, the mean over the last `window` seconds
/// differs from the mean over the window before it by less than `tol`
/// relative to the larger of the two. Columns that are zero in both windows
/// count as settled. Series shorter than two windows are never settled.
pub fn steady_state_check(series: &TimeSeries, window: f64, tol: f64) -> bool {
    let (Some(&t0), Some(&t1)) = (series.time.first(), series.time.last()) else {
        return false;
    };
    if !(window > 0.0) || t1 - t0 < 2.0 * window {
        return false;
    }
    let split = t1 - window;
    let start = split - window;
    series.columns.iter().all(|col| {
        let (mut a, mut na, mut b, mut nb) = (0.0, 0usize, 0.0, 0usize);
        for (&t, &v) in series.time.iter().zip(col) {
            if t >= start && t < split {
                a += v;
                na += 1;
            } else if t >= split {
                b += v;
                nb += 1;
            }
        }
        if na == 0 || nb == 0 {
            return false;
        }
        let (ma, mb) = (a / na as f64, b / nb as f64);
        let scale = ma.abs().max(mb.abs());
        scale == 0.0 || (mb - ma).abs() < tol * scale
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(f: impl Fn(f64) -> f64, t_end: f64, n: usize) -> TimeSeries {
        let mut s = TimeSeries::new(["p"]);
        for i in 0..=n {
            let t = t_end * i as f64 / n as f64;
            s.push(t, &[f(t)]).unwrap();
        }
        s
    }

    #[test]
    fn constant_is_steady() {
        assert!(steady_state_check(&series(|_| 0.3, 1.0, 100), 0.2, 1e-3));
        assert!(steady_state_check(&series(|_| 0.0, 1.0, 100), 0.2, 1e-3));
    }

    #[test]
    fn ramp_is_not_steady() {
        assert!(!steady_state_check(&series(|t| 0.1 + 0.01 * t, 1.0, 100), 0.2, 1e-3));
    }

    #[test]
    fn short_series_is_not_steady() {
        assert!(!steady_state_check(&series(|_| 1.0, 1.0, 100), 0.6, 1e-3));
    }

    #[test]
    fn damped_oscillation_settles_after_envelope_decays() {
        let (a, b, gamma, omega, tol) = (0.3, 0.1, 1.0, 40.0, 1e-3);
        let f = move |t: f64| a * (-gamma * t).exp() * (omega * t).cos() + b;
        let settle = (a / (b * tol)).ln() / gamma;
        let window = 2.0 * std::f64::consts::PI / omega * 4.0;
        assert!(!steady_state_check(&series(f, 0.3 * settle, 20_000), window, tol));
        assert!(steady_state_check(&series(f, 1.2 * settle, 20_000), window, tol));
    }
}
