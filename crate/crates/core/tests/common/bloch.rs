//! Two-level optical Bloch equations in real variables, for checking the
//! four-level integrator on its single-axis subspace.
//!
//! `u = 2 Re rho_ge`, `v = 2 Im rho_ge`, `w = rho_ee - rho_gg`, with
//! `H = hbar omega0 |e><e| + hbar Omega (|g><e| + |e><g|)` and decay `gamma`:
//!
//! ```text
//! u' = -omega0 v - gamma u / 2
//! v' =  omega0 u - 2 Omega w - gamma v / 2
//! w' =  2 Omega v - gamma (1 + w)
//! ```

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bloch {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

impl Bloch {
    pub fn ground() -> Self {
        Self { u: 0.0, v: 0.0, w: -1.0 }
    }

    pub fn excited_population(&self) -> f64 {
        0.5 * (1.0 + self.w)
    }

    fn deriv(&self, omega0: f64, rabi: f64, gamma: f64) -> [f64; 3] {
        [
            -omega0 * self.v - 0.5 * gamma * self.u,
            omega0 * self.u - 2.0 * rabi * self.w - 0.5 * gamma * self.v,
            2.0 * rabi * self.v - gamma * (1.0 + self.w),
        ]
    }

    fn offset(&self, d: [f64; 3], h: f64) -> Self {
        Self {
            u: self.u + h * d[0],
            v: self.v + h * d[1],
            w: self.w + h * d[2],
        }
    }

    /// Advances by `dt` with the coupling held at `rabi`, using `substeps`
    /// classical Runge-Kutta substeps.
    pub fn advance(&mut self, dt: f64, omega0: f64, rabi: f64, gamma: f64, substeps: usize) {
        let h = dt / substeps as f64;
        for _ in 0..substeps {
            let k1 = self.deriv(omega0, rabi, gamma);
            let k2 = self.offset(k1, h / 2.0).deriv(omega0, rabi, gamma);
            let k3 = self.offset(k2, h / 2.0).deriv(omega0, rabi, gamma);
            let k4 = self.offset(k3, h).deriv(omega0, rabi, gamma);
            self.u += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
            self.v += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
            self.w += h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]);
        }
    }
}
