use std::time::Instant;

use densemble::analysis::fit_disorder_onset;
use densemble::emitter::{excited, DensityMatrix4, Matrix4c};
use densemble::physics::{rabi_frequency, EmitterSpec};
use densemble::series::TimeSeries;
use densemble::surrogate::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn spec() -> EmitterSpec {
    EmitterSpec::from_ev(1.0, 2.95e6).unwrap()
}

fn config(density: f64, run_length: f64) -> SurrogateConfig {
    SurrogateConfig::new(spec(), density, 1.5e9, run_length)
}

#[test]
fn dilute_limit_follows_rwa_rabi_flopping() {
    let mut c = config(1e10, 300e-15);
    c.sample_stride = 1;
    let s = run_surrogate(&c).unwrap();
    let omega = rabi_frequency(spec().dipole_moment, 1.5e9);
    let yy = s.column("rho_yy").unwrap();
    let worst = s
        .time
        .iter()
        .zip(yy)
        .map(|(&t, &p)| (p - (0.5 * omega * t).sin().powi(2)).abs())
        .fold(0.0f64, f64::max);
    assert!(worst < 0.01, "{worst}");
    assert!(s.column("rho_xx").unwrap().iter().all(|&p| p < 1e-6));
}

#[test]
fn dephasing_never_moves_population() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..200 {
        let mut m = Matrix4c::zeros();
        for r in 0..4 {
            for k in 0..4 {
                m[(r, k)] = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
        let rates = DephasingRates {
            parallel: [0.0; 3].map(|_: f64| rng.random_range(0.0..1e14)),
            perpendicular: [0.0; 3].map(|_: f64| rng.random_range(0.0..1e14)),
        };
        let d = dephasing_contribution(&m, &rates);
        for i in 0..4 {
            assert!(d[(i, i)].norm() <= 1e-14, "{}", d[(i, i)]);
        }
    }
}

#[test]
fn rk4_agrees_with_fine_euler() {
    let mut c = config(4e27, 10e-15);
    c.dt = 5e-19;
    c.sample_stride = 1000;
    let s = run_surrogate(&c).unwrap();

    let h = c.dt / 100.0;
    let steps = (c.run_length / h).round() as usize;
    let mut rho = DensityMatrix4::ground().into_matrix();
    for _ in 0..steps {
        let d = surrogate_rhs(&DensityMatrix4::from_matrix_unchecked(rho), &c).unwrap();
        rho += d * Complex64::new(h, 0.0);
    }
    let last = s.len() - 1;
    assert!((s.time[last] - c.run_length).abs() < 1e-25);
    for (k, name) in ["rho_xx", "rho_yy", "rho_zz"].iter().enumerate() {
        let a = s.column(name).unwrap()[last];
        let b = rho[(excited(k), excited(k))].re;
        assert!((a - b).abs() < 1e-6, "{name}: {a} vs {b}");
    }
}

#[test]
fn three_hundred_femtoseconds_run_quickly() {
    let start = Instant::now();
    let s = run_surrogate(&config(4e27, 300e-15)).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed <= 120.0, "{elapsed} s");
    assert!((s.time[s.len() - 1] - 300e-15).abs() < 1e-20);
}

fn period_means(s: &TimeSeries, name: &str, period: f64) -> Vec<f64> {
    let col = s.column(name).unwrap();
    let mut out = Vec::new();
    let mut t0 = 0.0;
    while t0 + period <= s.time[s.len() - 1] {
        let (mut sum, mut n) = (0.0, 0);
        for (t, v) in s.time.iter().zip(col) {
            if *t >= t0 && *t < t0 + period {
                sum += v;
                n += 1;
            }
        }
        out.push(sum / n as f64);
        t0 += period;
    }
    out
}

#[test]
fn dense_ensemble_shape() {
    let s = run_surrogate(&config(4e27, 300e-15)).unwrap();
    let period = 2.0 * std::f64::consts::PI / rabi_frequency(spec().dipole_moment, 1.5e9);
    let xx = s.column("rho_xx").unwrap();
    let zz = s.column("rho_zz").unwrap();
    assert!(xx.iter().zip(zz).all(|(a, b)| (a - b).abs() < 1e-12));

    // rho_yy: the swing over one Rabi period shrinks towards a steady value
    let (t, yy) = (&s.time, s.column("rho_yy").unwrap());
    let swing = |a: f64, b: f64| {
        let v: Vec<f64> = t.iter().zip(yy).filter(|(t, _)| **t >= a && **t < b).map(|(_, v)| *v).collect();
        v.iter().copied().fold(f64::MIN, f64::max) - v.iter().copied().fold(f64::MAX, f64::min)
    };
    let end = t[t.len() - 1];
    assert!(swing(0.0, period) > 0.8);
    assert!(swing(end - period, end) < 0.1 * swing(0.0, period));

    // perpendicular populations: the period average grows
    let means = period_means(&s, "rho_xx", period);
    assert!(means.windows(2).all(|w| w[1] > w[0]), "{means:?}");
    assert!(xx[xx.len() - 1] > 0.01);
    let purity = s.column("purity").unwrap();
    assert!(purity[purity.len() - 1] < 0.5 && purity.iter().all(|&p| p <= 1.0 + 1e-12 && p >= 0.25));
}

#[test]
fn denser_ensembles_dephase_faster() {
    let rates: Vec<f64> = [1e27, 2.5e27, 4e27, 5e27, 7.5e27, 1e28]
        .iter()
        .map(|&n| {
            let s = run_surrogate(&config(n, 300e-15)).unwrap();
            let fit = fit_disorder_onset(&s.time, s.column("rho_yy").unwrap()).unwrap();
            fit.get("gamma_ens").unwrap()
        })
        .collect();
    assert!(rates.windows(2).all(|w| w[1] >= w[0]), "{rates:?}");
    assert!(rates.iter().all(|r| r.is_finite() && *r > 0.0));
}

#[test]
fn runs_are_bit_reproducible() {
    let a = run_surrogate(&config(4e27, 50e-15)).unwrap();
    let b = run_surrogate(&config(4e27, 50e-15)).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn invalid_config_names_the_field() {
    let mut c = config(4e27, 1e-14);
    c.density = -1.0;
    let e = run_surrogate(&c).unwrap_err();
    assert!(e.to_string().contains("surrogate.density"), "{e}");
}
