mod common;

use densemble::field::{
    pml_reflection_test, spectral_curl, stable_dt, FieldGrid, PmlConfig, PstdSolver, Ramp,
    ReflectionTest, SourcePlane, VectorField,
};
use densemble::field::spectral::SpectralDerivative;
use densemble::physics::{DriveSpec, SI};
use std::f64::consts::PI;

fn vacuum(dims: [usize; 3]) -> PstdSolver {
    let grid = FieldGrid::new(dims, 1e-9, PmlConfig::disabled()).unwrap();
    PstdSolver::new(grid, stable_dt(1e-9, None)).unwrap()
}

#[test]
fn vacuum_energy_is_conserved() {
    let drift = common::vacuum_energy_drift([16, 12, 10], 1000, 7).unwrap();
    assert!(drift < 1e-6, "drift {drift:e}");
}

#[test]
fn zero_fields_stay_zero() {
    let mut s = vacuum([8, 8, 8]);
    s.step_h().unwrap();
    s.step_e().unwrap();
    assert!(s.grid.h.norm_squared() == 0.0 && s.grid.e.norm_squared() == 0.0);
}

#[test]
fn uniform_current_changes_e_by_minus_j_dt_over_eps0() {
    let mut s = vacuum([6, 6, 6]);
    s.grid.j.fill(2.5e12);
    s.step_h().unwrap();
    s.step_e().unwrap();
    let expected = -2.5e12 * s.dt() / SI.eps0;
    for c in 0..3 {
        for &e in s.grid.e.component(c) {
            assert!((e - expected).abs() <= 1e-14 * expected.abs());
        }
    }
}

#[test]
fn single_mode_magnetic_update_matches_analytic_derivative() {
    let n = 32;
    let l = 1e-9;
    let mut s = vacuum([n, 1, 1]);
    let k = 2.0 * PI * 3.0 / (n as f64 * l);
    for i in 0..n {
        s.grid.e.y[i] = (k * i as f64 * l).sin();
    }
    s.step_h().unwrap();
    // dH_z/dt = -(1/mu0) dE_y/dx
    let scale = s.dt() / SI.mu0_perm;
    for i in 0..n {
        let expected = -scale * k * (k * i as f64 * l).cos();
        assert!((s.grid.h.z[i] - expected).abs() < 1e-12 * scale * k);
        assert!(s.grid.h.x[i] == 0.0 && s.grid.h.y[i] == 0.0);
    }
}

#[test]
fn curl_of_gradient_vanishes() {
    let dims = [16, 8, 12];
    let l = 1e-9;
    let kx = 2.0 * PI / (16.0 * l);
    let ky = 4.0 * PI / (8.0 * l);
    let kz = 2.0 * PI / (12.0 * l);
    let len = 16 * 8 * 12;
    let mut grad = VectorField::zeros(len);
    for z in 0..12 {
        for y in 0..8 {
            for x in 0..16 {
                let idx = x + 16 * (y + 8 * z);
                let (px, py, pz) = (kx * x as f64 * l, ky * y as f64 * l, kz * z as f64 * l);
                grad.x[idx] = kx * px.cos() * py.cos() * pz.sin();
                grad.y[idx] = -ky * px.sin() * py.sin() * pz.sin();
                grad.z[idx] = kz * px.sin() * py.cos() * pz.cos();
            }
        }
    }
    let mut deriv = SpectralDerivative::new(dims, l);
    let curl = spectral_curl(&mut deriv, &grad).unwrap();
    let scale = kx * ky;
    for c in 0..3 {
        for &v in curl.component(c) {
            assert!(v.abs() < 1e-12 * scale, "{v}");
        }
    }
}

#[test]
fn default_layer_meets_reflection_bound() {
    let r = pml_reflection_test(&ReflectionTest::new(PmlConfig::default())).unwrap();
    assert!(r.ratio <= 1e-5, "{r:?}");
}

#[test]
fn disabled_layer_returns_order_one_signal() {
    let pml = PmlConfig {
        attenuation: 0.0,
        ..PmlConfig::default()
    };
    let r = pml_reflection_test(&ReflectionTest::new(pml)).unwrap();
    assert!(r.ratio > 0.3, "{r:?}");
}

#[test]
fn thicker_layer_does_not_reflect_more() {
    let thin = pml_reflection_test(&ReflectionTest::new(PmlConfig::default())).unwrap();
    let thick = pml_reflection_test(&ReflectionTest::new(PmlConfig {
        thickness: 24,
        ..PmlConfig::default()
    }))
    .unwrap();
    assert!(thick.ratio <= thin.ratio, "{thick:?} vs {thin:?}");
}

#[test]
fn plane_wave_keeps_amplitude_frequency_and_polarization() {
    let p = common::plane_wave_probe(50).unwrap();
    let amp_err = (p.measured_amplitude - p.amplitude).abs() / p.amplitude;
    let freq_err = (p.measured_frequency - p.frequency).abs() / p.frequency;
    assert!(amp_err < 0.01, "amplitude error {amp_err:e}");
    assert!(freq_err < 1e-3, "frequency error {freq_err:e}");
    assert!(p.cross_polarization < 1e-12, "{}", p.cross_polarization);
}

#[test]
fn source_at_time_zero_leaves_fields_unchanged() {
    let drive = DriveSpec::new(1e9, 1.5e15, [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]).unwrap();
    let src = SourcePlane::new(drive, 20, Ramp::None).unwrap();
    let grid = FieldGrid::new([4, 4, 48], 1e-9, PmlConfig::single_axis(2)).unwrap();
    let mut s = PstdSolver::new(grid, stable_dt(1e-9, None)).unwrap();
    s.apply_source(&src, 0.0).unwrap();
    assert!(s.grid.h.norm_squared() == 0.0 && s.grid.e.norm_squared() == 0.0);
}

#[test]
fn source_inside_layer_is_rejected() {
    let drive = DriveSpec::new(1e9, 1.5e15, [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]).unwrap();
    let src = SourcePlane::new(drive, 5, Ramp::None).unwrap();
    let grid = FieldGrid::new([4, 4, 48], 1e-9, PmlConfig::single_axis(2)).unwrap();
    let mut s = PstdSolver::new(grid, stable_dt(1e-9, None)).unwrap();
    assert!(s.apply_source(&src, 1e-16).is_err());
    // the spread sheet needs a neighbour on each side inside the interior
    let edge = SourcePlane::new(src.drive, 12, Ramp::None).unwrap();
    assert!(s.apply_source(&edge, 1e-16).is_err());
    let inside = SourcePlane::new(src.drive, 13, Ramp::None).unwrap();
    assert!(s.apply_source(&inside, 1e-16).is_ok());
}

fn driven_run(threads: usize) -> Vec<f64> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        let drive = DriveSpec::new(1e9, 1.5e15, [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]).unwrap();
        let src = SourcePlane::new(drive, 14, Ramp::None).unwrap();
        let grid = FieldGrid::new([20, 18, 36], 1e-9, PmlConfig::single_axis(2)).unwrap();
        let mut s = PstdSolver::new(grid, stable_dt(1e-9, None)).unwrap();
        let idx = s.grid.index([10, 9, 20]);
        s.grid.j.x[idx] = 1e14;
        for _ in 0..40 {
            s.advance(Some(&src)).unwrap();
        }
        let mut out = s.grid.e.x.clone();
        out.extend_from_slice(&s.grid.h.z);
        out
    })
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let one = driven_run(1);
    let four = driven_run(4);
    assert!(one.iter().zip(&four).all(|(a, b)| a.to_bits() == b.to_bits()));
    assert_eq!(one, driven_run(1));
}
