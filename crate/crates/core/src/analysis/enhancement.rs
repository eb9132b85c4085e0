use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::physics::SI;

fn dot_conj(a: &[Complex64; 3], b: &[Complex64; 3]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Ratio of the decay rate in the ensemble to the vacuum rate, from the
/// phasors of the transition current `j_d`, the local field and the drive:
/// `1 + Re(j* . E_ext) / Re(j* . E_drive)` with `E_ext = E_local - E_drive`.
pub fn decay_enhancement(
    j_d: [Complex64; 3],
    e_local: [Complex64; 3],
    e_drive: [Complex64; 3],
) -> Result<f64> {
    let denom = dot_conj(&j_d, &e_drive).re;
    if !denom.is_finite() || denom == 0.0 {
        return Err(Error::Domain(format!("Re(j* . E_drive) = {denom}; the ratio is undefined")));
    }
    let e_ext: [Complex64; 3] = std::array::from_fn(|i| e_local[i] - e_drive[i]);
    Ok(1.0 + dot_conj(&j_d, &e_ext).re / denom)
}

/// Dipole form: `1 + 6 pi eps0 / (|mu|^2 k^3) Im(mu* . E_ext)` with
/// `k = omega / c`. `mu` in C m, `e_ext` in V/m.
pub fn decay_enhancement_dipole(mu: [Complex64; 3], e_ext: [Complex64; 3], omega: f64) -> Result<f64> {
    let mu2: f64 = mu.iter().map(|v| v.norm_sqr()).sum();
    if !(mu2 > 0.0) || !(omega > 0.0) {
        return Err(Error::Domain(format!("|mu|^2 = {mu2:e} and omega = {omega:e} must be positive")));
    }
    let k = omega / SI.c;
    Ok(1.0 + 6.0 * std::f64::consts::PI * SI.eps0 / (mu2 * k.powi(3)) * dot_conj(&mu, &e_ext).im)
}

/// Complex amplitude `X` of `x(t) ~ Re(X exp(-i omega t))`, projected over
/// the samples given. Exact when the samples span whole periods uniformly.
pub fn phasor(t: &[f64], x: &[f64], omega: f64) -> Complex64 {
    let sum: Complex64 = t
        .iter()
        .zip(x)
        .map(|(&ti, &xi)| Complex64::from_polar(xi, omega * ti))
        .sum();
    sum * (2.0 / t.len() as f64)
}
