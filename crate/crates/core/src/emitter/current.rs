use super::density::{excited, Matrix4c, GROUND};
use crate::error::{Error, Result};
use crate::physics::EmitterSpec;

/// Free current density `J_eta = N Tr(rho_dot mu_eta)` (A/m^2) of emitters at
/// number density `n` (1/m^3).
///
/// The dipole operator is `mu_eta = -dH/dE_eta = -mu (|g><e_eta| + h.c.)`,
/// so `J_eta = -N mu (rho_dot[g, e_eta] + rho_dot[e_eta, g])`.
pub fn free_current(rho_dot: &Matrix4c, spec: &EmitterSpec, n: f64) -> Result<[f64; 3]> {
    let mut j = [0.0; 3];
    let scale = rho_dot.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    for (eta, out) in j.iter_mut().enumerate() {
        let e = excited(eta);
        let tr = rho_dot[(GROUND, e)] + rho_dot[(e, GROUND)];
        if tr.im.abs() > 1e-10 * scale {
            return Err(Error::numeric(
                0,
                format!("dipole trace has imaginary part {:e} (scale {scale:e})", tr.im),
            ));
        }
        *out = -n * spec.dipole_moment * tr.re;
    }
    Ok(j)
}
