use std::f64::consts::PI;

use densemble::analysis::*;
use densemble::emitter::{excited, DensityMatrix4, Matrix4c, GROUND};
use densemble::physics::{EmitterSpec, EPS0, SI};
use densemble::series::TimeSeries;
use densemble::surrogate::{run_surrogate, SurrogateConfig};
use densemble::Error;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const TABLE_DENSITY: [f64; 6] = [1e27, 2.5e27, 4e27, 5e27, 7.5e27, 1e28];
const TABLE_GAMMA: [f64; 6] = [6.243e11, 1.455e13, 3.555e13, 5.072e13, 5.305e13, 5.194e13];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_pure(rng: &mut ChaCha8Rng) -> DensityMatrix4 {
    let mut psi = [c(0.0, 0.0); 4];
    for v in psi.iter_mut() {
        *v = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    }
    let norm = psi.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    DensityMatrix4::from_amplitudes(psi.map(|v| v / norm))
}

#[test]
fn average_of_identical_states_is_the_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let s = random_pure(&mut rng);
    let avg = ensemble_average(0.0, &[s; 7]).unwrap();
    assert!((avg.rho_bar - s.matrix()).norm() < 1e-15);
    assert!((avg.purity - s.purity()).abs() < 1e-14);
}

#[test]
fn average_of_half_ground_half_excited() {
    let states = [DensityMatrix4::ground(), DensityMatrix4::pure_state(excited(1))];
    let avg = ensemble_average(1.0, &states).unwrap();
    assert_eq!(avg.population(GROUND), 0.5);
    assert_eq!(avg.population(excited(1)), 0.5);
    assert_eq!(avg.purity, 0.5);
    assert!(matches!(ensemble_average(0.0, &[]), Err(Error::Contract(_))));
}

#[test]
fn average_of_random_pure_states_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let states: Vec<DensityMatrix4> = (0..1000).map(|_| random_pure(&mut rng)).collect();
    let avg = ensemble_average(0.0, &states).unwrap();
    let mut brute = Matrix4c::zeros();
    for s in &states {
        for r in 0..4 {
            for k in 0..4 {
                brute[(r, k)] += s.get(r, k) / 1000.0;
            }
        }
    }
    assert!((avg.rho_bar - brute).norm() < 1e-12);
    let mut p = 0.0;
    for r in 0..4 {
        for k in 0..4 {
            p += (brute[(r, k)] * brute[(k, r)]).re;
        }
    }
    assert!((avg.purity - p).abs() < 1e-12);
    assert!(avg.purity < 1.0 && avg.purity >= 0.25);
    assert!((avg.rho_bar.trace().re - 1.0).abs() < 1e-9);
}

fn sampled(n: usize, dt: f64, f: impl Fn(f64) -> f64) -> TimeSeries {
    let mut s = TimeSeries::new(["x"]);
    for i in 0..n {
        let t = i as f64 * dt;
        s.push(t, &[f(t)]).unwrap();
    }
    s
}

#[test]
fn exact_bin_sinusoid_has_unit_amplitude() {
    let (n, dt) = (1024, 1e-16);
    let f0 = 37.0 / (n as f64 * dt);
    let s = sampled(n, dt, |t| (2.0 * PI * f0 * t + 0.3).sin());
    let sp = windowed_spectrum(&s, "x", 0.0, 1.0).unwrap();
    assert_eq!(sp.samples, n);
    assert_eq!(sp.window, "rectangular");
    let (fp, ap) = sp.peaks()[0];
    assert!((fp - f0).abs() < 1e-6 * f0);
    assert!((ap - 1.0).abs() < 1e-10, "{ap}");
    let others = sp.amplitude.iter().enumerate().filter(|(k, _)| *k != 37).fold(0.0f64, |m, (_, a)| m.max(*a));
    assert!(others < 1e-10);
}

#[test]
fn two_tones_are_resolved() {
    let f = 2.41e14;
    let dt = 1e-16;
    // window of 12 / (0.1 f)
    let n = (120.0 / f / dt) as usize;
    let s = sampled(n, dt, |t| (2.0 * PI * f * t).cos() + 0.5 * (2.0 * PI * 1.1 * f * t).cos());
    let sp = windowed_spectrum(&s, "x", 0.0, 1.0).unwrap();
    let peaks = sp.peaks();
    let res = sp.resolution();
    assert!((peaks[0].0 - f).abs() <= res, "{:?}", &peaks[..2]);
    assert!((peaks[1].0 - 1.1 * f).abs() <= res, "{:?}", &peaks[..2]);
    assert!(peaks[0].1 > 0.8 && peaks[1].1 > 0.35 && peaks[1].1 < 0.6);
    assert_eq!(sp.strongest_peak_in(1.05 * f, 1.2 * f).map(|p| p.0), Some(peaks[1].0));
}

#[test]
fn spectrum_obeys_parseval() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in [256, 300, 513] {
        let vals: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let s = sampled(n, 1e-16, |t| vals[(t / 1e-16).round() as usize]);
        let sp = windowed_spectrum(&s, "x", 0.0, 1.0).unwrap();
        let rel = (sp.parseval_sum() - sp.mean_square).abs() / sp.mean_square;
        assert!(rel < 1e-9, "{n}: {rel}");
    }
}

#[test]
fn spectrum_rejects_short_or_uneven_windows() {
    let s = sampled(400, 1e-16, |t| t);
    let e = windowed_spectrum(&s, "x", 0.0, 100e-16).unwrap_err();
    assert!(matches!(e, Error::Config { ref field, .. } if field == "analysis.window"), "{e}");
    let mut uneven = TimeSeries::new(["x"]);
    for i in 0..300 {
        let t = i as f64 + if i == 150 { 0.5 } else { 0.0 };
        uneven.push(t, &[0.0]).unwrap();
    }
    assert!(windowed_spectrum(&uneven, "x", 0.0, 1e3).is_err());
}

const TRUE_DISORDER: [f64; 6] = [0.3, 3.5e13, 2.0e14, 0.1, -0.3, 1.8e13];

fn disorder_data(p: &[f64; 6], noise: f64, samples: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t: Vec<f64> = (0..samples).map(|i| i as f64 * 300e-15 / samples as f64).collect();
    let clean: Vec<f64> = t.iter().map(|&t| disorder_model(t, p[0], p[1], p[2], p[3], p[4], p[5])).collect();
    let scale = clean.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let normal = Normal::new(0.0, noise * scale).unwrap();
    let y = clean.iter().map(|v| v + normal.sample(&mut rng)).collect();
    (t, y)
}

fn rel_err(fit: &FitResult, names: &[&str], truth: &[f64]) -> f64 {
    names
        .iter()
        .zip(truth)
        .map(|(n, v)| ((fit.get(n).unwrap() - v) / v).abs())
        .fold(0.0, f64::max)
}

#[test]
fn disorder_fit_recovers_synthetic_parameters() {
    let (t, y) = disorder_data(&TRUE_DISORDER, 1e-3, 600, 11);
    let fit = fit_disorder_onset(&t, &y).unwrap();
    assert!(fit.converged, "{fit:?}");
    let err = rel_err(&fit, &DISORDER_PARAMS, &TRUE_DISORDER);
    assert!(err < 0.01, "{err} {fit:?}");
    assert!(fit.residual_rms < 2e-3 * 0.2);
    for p in &fit.params {
        assert!(p.std_error.is_finite() && p.std_error < 0.01 * p.value.abs(), "{p:?}");
    }
}

#[test]
fn disorder_fit_is_deterministic() {
    let (t, y) = disorder_data(&TRUE_DISORDER, 1e-3, 600, 5);
    let a = fit_disorder_onset(&t, &y).unwrap();
    let b = fit_disorder_onset(&t, &y).unwrap();
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
    for (p, q) in a.params.iter().zip(&b.params) {
        assert_eq!(p.value.to_bits(), q.value.to_bits());
    }
}

#[test]
fn constant_series_has_no_rates() {
    let t: Vec<f64> = (0..300).map(|i| i as f64 * 1e-15).collect();
    let y = vec![0.42; 300];
    let fit = fit_disorder_onset(&t, &y).unwrap();
    assert!(!fit.converged);
    assert_eq!(fit.get("a"), Some(0.0));
    assert_eq!(fit.get("c"), Some(0.0));
    assert!((fit.get("b").unwrap() - 0.42).abs() < 1e-14);
    assert!(fit.get("gamma_ens").unwrap().is_nan());
}

#[test]
fn disorder_fit_needs_three_periods() {
    let t: Vec<f64> = (0..400).map(|i| i as f64 * 0.1e-15).collect();
    let y: Vec<f64> = t.iter().map(|&t| (2.0e14 * t).cos()).collect();
    let e = fit_disorder_onset(&t, &y).unwrap_err();
    assert!(matches!(e, Error::Config { .. }), "{e}");
}

#[test]
fn disorder_fit_recovers_random_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for draw in 0..50 {
        let p = [
            rng.random_range(0.2..0.4),
            rng.random_range(1.0e13..5.0e13),
            rng.random_range(1.5e14..2.5e14),
            rng.random_range(0.05..0.2),
            rng.random_range(-0.35..-0.15),
            rng.random_range(0.5e13..3.0e13),
        ];
        let (t, y) = disorder_data(&p, 1e-2, 3000, draw);
        let fit = fit_disorder_onset(&t, &y).unwrap();
        assert!(fit.converged, "draw {draw}: {fit:?}");
        let err = rel_err(&fit, &DISORDER_PARAMS, &p);
        worst = worst.max(err);
        assert!(err < 0.02, "draw {draw}: {err} for {p:?} -> {fit:?}");
    }
    eprintln!("worst relative error over 50 draws: {worst:.4}");
}

#[test]
fn logistic_fit_recovers_exact_samples() {
    let (l, k, a) = (5.316e13, 1.353e-27, 3.337e27);
    let x: Vec<f64> = (1..=12).map(|i| i as f64 * 0.8e27).collect();
    let y: Vec<f64> = x.iter().map(|&x| logistic(x, l, k, a)).collect();
    let fit = fit_logistic(&x, &y).unwrap();
    assert!(fit.converged, "{fit:?}");
    assert!(rel_err(&fit, &LOGISTIC_PARAMS, &[l, k, a]) < 1e-3, "{fit:?}");
}

#[test]
fn logistic_fit_to_table_densities() {
    let fit = fit_logistic(&TABLE_DENSITY, &TABLE_GAMMA).unwrap();
    let l = fit.get("L").unwrap();
    assert!((l - 5.316e13).abs() <= 0.1 * 5.316e13, "{fit:?}");
    assert!(fit.converged);
}

#[test]
fn logistic_fit_recovers_random_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for draw in 0..50 {
        let p = [
            rng.random_range(2e13..8e13),
            rng.random_range(0.8e-27..2.5e-27),
            rng.random_range(2e27..4e27),
        ];
        let x: Vec<f64> = (0..400).map(|i| 0.5e27 + i as f64 * 0.025e27).collect();
        let normal = Normal::new(0.0, 1e-2 * p[0]).unwrap();
        let y: Vec<f64> = x.iter().map(|&x| logistic(x, p[0], p[1], p[2]) + normal.sample(&mut rng)).collect();
        let fit = fit_logistic(&x, &y).unwrap();
        assert!(fit.converged, "draw {draw}: {fit:?}");
        let err = rel_err(&fit, &LOGISTIC_PARAMS, &p);
        assert!(err < 0.02, "draw {draw}: {err} for {p:?} -> {fit:?}");
    }
}

#[test]
fn constant_points_leave_the_logistic_unidentified() {
    let x = [1e27, 2e27, 3e27, 4e27, 5e27];
    let y = [3e13; 5];
    let fit = fit_logistic(&x, &y).unwrap();
    let wide = LOGISTIC_PARAMS
        .iter()
        .any(|n| !(fit.std_error(n).unwrap() < fit.get(n).unwrap().abs()));
    assert!(!fit.converged || wide, "{fit:?}");
    assert!(fit_logistic(&x[..3], &y[..3]).is_err());
}

#[test]
fn enhancement_limits() {
    let j = [c(0.0, 0.0), c(2.0, -1.0), c(0.0, 0.0)];
    let ed = [c(0.0, 0.0), c(3.0, 0.5), c(0.0, 0.0)];
    assert_eq!(decay_enhancement(j, ed, ed).unwrap(), 1.0);
    let doubled = ed.map(|v| v * 2.0);
    assert!((decay_enhancement(j, doubled, ed).unwrap() - 2.0).abs() < 1e-15);
    let orthogonal = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
    assert!(matches!(decay_enhancement(j, ed, orthogonal), Err(Error::Domain(_))));
}

#[test]
fn dipole_form_of_enhancement() {
    let spec = EmitterSpec::from_ev(1.0, 2.95e6).unwrap();
    let mu = [c(0.0, 0.0), c(spec.dipole_moment, 0.0), c(0.0, 0.0)];
    let w = spec.omega0;
    assert_eq!(decay_enhancement_dipole(mu, [c(0.0, 0.0); 3], w).unwrap(), 1.0);
    // in-phase field does no work; quadrature field changes the rate
    let x = 1e3;
    assert_eq!(decay_enhancement_dipole(mu, [c(0.0, 0.0), c(x, 0.0), c(0.0, 0.0)], w).unwrap(), 1.0);
    let k = w / SI.c;
    let expected = 1.0 + 6.0 * PI * EPS0 * x / (spec.dipole_moment * k.powi(3));
    let got = decay_enhancement_dipole(mu, [c(0.0, 0.0), c(0.0, x), c(0.0, 0.0)], w).unwrap();
    assert!((got - expected).abs() < 1e-12 * expected);
    // the current form with j = -i omega mu reduces to the dipole form when
    // the drive term is the free-space radiation reaction
    let j = mu.map(|m| m * c(0.0, -w));
    let e_rr = [c(0.0, 0.0), c(0.0, spec.dipole_moment * k.powi(3) / (6.0 * PI * EPS0)), c(0.0, 0.0)];
    let e_ext = [c(0.0, 0.0), c(0.0, x), c(0.0, 0.0)];
    let local = [e_rr[0] + e_ext[0], e_rr[1] + e_ext[1], e_rr[2] + e_ext[2]];
    let via_current = decay_enhancement(j, local, e_rr).unwrap();
    assert!((via_current - got).abs() < 1e-12 * got, "{via_current} vs {got}");
    assert!(decay_enhancement_dipole([c(0.0, 0.0); 3], e_ext, w).is_err());
}

#[test]
fn phasor_recovers_amplitude_and_phase() {
    let w = 2.0 * PI * 2.41e14;
    let t: Vec<f64> = (0..4000).map(|i| i as f64 * (20.0 * 2.0 * PI / w) / 4000.0).collect();
    let x: Vec<f64> = t.iter().map(|&t| 3.0 * (w * t - 0.7).cos()).collect();
    let p = phasor(&t, &x, w);
    assert!((p - Complex64::from_polar(3.0, 0.7)).norm() < 1e-9);
}

fn surrogate(density: f64) -> TimeSeries {
    let spec = EmitterSpec::from_ev(1.0, 2.95e6).unwrap();
    let mut cfg = SurrogateConfig::new(spec, density, 1.5e9, 150e-15);
    cfg.sample_stride = 10;
    run_surrogate(&cfg).unwrap()
}

#[test]
fn identical_runs_compare_to_zero() {
    let s = surrogate(4e27);
    let report = compare_runs(&s, &s).unwrap();
    for o in &report.observables {
        assert_eq!(o.rms_deviation, 0.0);
        assert_eq!(o.max_deviation, 0.0);
        assert_eq!(o.steady_delta, 0.0);
    }
    assert!(report.ordering_matches);
    assert_eq!(report.ordering_full, report.ordering_surrogate);
    assert_eq!(report.envelope_rate_ratio, Some(1.0));
    let json = report.to_json().unwrap();
    assert_eq!(json, compare_runs(&s, &s).unwrap().to_json().unwrap());
    assert!(json.contains("\"rms_deviation\""));
}

#[test]
fn perturbed_density_gives_small_deviation() {
    let a = surrogate(4e27);
    let b = surrogate(4.04e27);
    let report = compare_runs(&a, &b).unwrap();
    let yy = report.observable("rho_yy").unwrap();
    assert!(yy.rms_deviation > 0.0 && yy.rms_deviation < 0.02, "{yy:?}");
}

#[test]
fn disjoint_ranges_are_rejected() {
    let a = sampled(10, 1.0, |t| t);
    let mut b = TimeSeries::new(["x"]);
    b.push(100.0, &[0.0]).unwrap();
    b.push(101.0, &[0.0]).unwrap();
    assert!(matches!(compare_runs(&a, &b), Err(Error::Config { .. })));
}

#[test]
fn ordering_ignores_ties_but_catches_swaps() {
    let mk = |xx: f64, yy: f64, zz: f64| {
        let mut s = TimeSeries::new(["rho_xx", "rho_yy", "rho_zz"]);
        s.push(0.0, &[xx, yy, zz]).unwrap();
        s.push(1.0, &[xx, yy, zz]).unwrap();
        s
    };
    let r = compare_runs(&mk(0.1, 0.3, 0.105), &mk(0.1, 0.25, 0.1)).unwrap();
    assert!(r.ordering_matches, "{} / {}", r.ordering_full, r.ordering_surrogate);
    assert!(r.ordering_full.starts_with("rho_yy >"));
    let r = compare_runs(&mk(0.3, 0.1, 0.1), &mk(0.1, 0.3, 0.1)).unwrap();
    assert!(!r.ordering_matches);
}

#[test]
fn correlation_length_tracks_domain_size() {
    let (nx, ny) = (32, 32);
    let stripes = |w: usize| -> Vec<f64> {
        (0..nx * ny)
            .map(|i| if ((i % nx) / w + (i / nx) / w) % 2 == 0 { 1.0 } else { -1.0 })
            .collect()
    };
    let uniform = vec![1.0; nx * ny];
    let lu = sign_correlation_length(&uniform, nx, ny, 1e-9).unwrap();
    let l8 = sign_correlation_length(&stripes(8), nx, ny, 1e-9).unwrap();
    let l2 = sign_correlation_length(&stripes(2), nx, ny, 1e-9).unwrap();
    let l1 = sign_correlation_length(&stripes(1), nx, ny, 1e-9).unwrap();
    assert_eq!(lu, 31e-9);
    assert!(l8 > l2 && l2 > l1, "{l8} {l2} {l1}");
    assert!((l1 - 0.5e-9).abs() < 1e-15, "{l1}");
    assert!(sign_correlation_length(&[0.0; 16], 4, 4, 1.0).is_err());
}
