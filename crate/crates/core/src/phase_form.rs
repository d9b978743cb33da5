//! Exponentials of complex quadratic forms on the one-dimensional phase
//! space `(x, xi)`.
//!
//! Short-time Fourier transforms of Gaussians, plane waves, chirps and
//! Dirac masses against Gaussian windows all have the shape
//! `pref * exp(Q(x, xi))` with `Q` quadratic, so sup-norms, line integrals
//! and products stay in closed form.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{FresnelError, Result};

/// `pref * exp(xx x^2 + xk x xi + kk xi^2 + x_ x + k xi + c0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseForm {
    pub pref: Complex64,
    pub xx: Complex64,
    pub xk: Complex64,
    pub kk: Complex64,
    pub x: Complex64,
    pub k: Complex64,
    pub c0: Complex64,
}

/// `a2 t^2 + a1 t + a0` with real coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealQuad {
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
}

impl RealQuad {
    pub fn eval(&self, t: f64) -> f64 {
        (self.a2 * t + self.a1) * t + self.a0
    }

    /// `int_R exp(q(t)) dt`.
    pub fn integral_exp(&self, tol: f64) -> Result<f64> {
        if self.a2 < -tol {
            Ok((PI / -self.a2).sqrt() * (self.a0 - self.a1 * self.a1 / (4.0 * self.a2)).exp())
        } else {
            // The envelope does not decay; report its mass on a unit window.
            Err(FresnelError::Divergent { partial: self.a0.exp() })
        }
    }

    /// `sup_t exp(q(t))`.
    pub fn sup_exp(&self, tol: f64) -> Result<f64> {
        if self.a2 < -tol {
            Ok((self.a0 - self.a1 * self.a1 / (4.0 * self.a2)).exp())
        } else if self.a2.abs() <= tol && self.a1.abs() <= tol.max(1e-300) {
            Ok(self.a0.exp())
        } else {
            Err(FresnelError::Divergent { partial: f64::INFINITY })
        }
    }
}

impl PhaseForm {
    pub fn zero() -> Self {
        let z = Complex64::new(0.0, 0.0);
        PhaseForm { pref: z, xx: z, xk: z, kk: z, x: z, k: z, c0: z }
    }

    pub fn exponent(&self, x: f64, xi: f64) -> Complex64 {
        self.xx * x * x + self.xk * x * xi + self.kk * xi * xi + self.x * x + self.k * xi + self.c0
    }

    pub fn eval(&self, x: f64, xi: f64) -> Complex64 {
        self.pref * self.exponent(x, xi).exp()
    }

    pub fn mul(&self, o: &PhaseForm) -> PhaseForm {
        PhaseForm {
            pref: self.pref * o.pref,
            xx: self.xx + o.xx,
            xk: self.xk + o.xk,
            kk: self.kk + o.kk,
            x: self.x + o.x,
            k: self.k + o.k,
            c0: self.c0 + o.c0,
        }
    }

    /// Complex conjugate as a function of real `(x, xi)`.
    pub fn conj(&self) -> PhaseForm {
        PhaseForm {
            pref: self.pref.conj(),
            xx: self.xx.conj(),
            xk: self.xk.conj(),
            kk: self.kk.conj(),
            x: self.x.conj(),
            k: self.k.conj(),
            c0: self.c0.conj(),
        }
    }

    /// `(x, xi) -> F(x, -xi)`.
    pub fn flip_xi(&self) -> PhaseForm {
        PhaseForm { xk: -self.xk, k: -self.k, ..*self }
    }

    /// `(x, xi) -> F(lambda x, xi / lambda) / lambda`.
    pub fn dilate(&self, lambda: f64) -> PhaseForm {
        PhaseForm {
            pref: self.pref / lambda,
            xx: self.xx * lambda * lambda,
            xk: self.xk,
            kk: self.kk / (lambda * lambda),
            x: self.x * lambda,
            k: self.k / lambda,
            c0: self.c0,
        }
    }

    /// Relative threshold below which quadratic coefficients count as zero.
    pub fn tol(&self) -> f64 {
        1e-12 * (self.xx.norm() + self.xk.norm() + self.kk.norm()).max(1e-300)
    }

    /// `log sup_x |F(x, xi)| - log |pref|` as a quadratic in `xi`.
    pub fn log_sup_x(&self) -> Result<RealQuad> {
        let tol = self.tol();
        let (rxx, rxk, rx) = (self.xx.re, self.xk.re, self.x.re);
        let (rkk, rk, r0) = (self.kk.re, self.k.re, self.c0.re);
        if rxx < -tol {
            Ok(RealQuad {
                a2: rkk - rxk * rxk / (4.0 * rxx),
                a1: rk - rxk * rx / (2.0 * rxx),
                a0: r0 - rx * rx / (4.0 * rxx),
            })
        } else if rxx.abs() <= tol && rxk.abs() <= tol && rx.abs() <= 1e-12 * self.x.norm() {
            Ok(RealQuad { a2: rkk, a1: rk, a0: r0 })
        } else {
            Err(FresnelError::Divergent { partial: f64::INFINITY })
        }
    }

    /// `int_R sup_x |F(x, xi)| dxi`.
    pub fn integral_of_sup_x(&self) -> Result<f64> {
        let q = self.log_sup_x()?;
        let tol = self.tol();
        q.integral_exp(tol).map(|v| v * self.pref.norm()).map_err(|e| match e {
            FresnelError::Divergent { partial } => FresnelError::Divergent { partial: partial * self.pref.norm() },
            other => other,
        })
    }

    /// `sup_xi int_R |F(x, xi)| dx`.
    pub fn sup_of_integral_x(&self) -> Result<f64> {
        let tol = self.tol();
        let rxx = self.xx.re;
        if !(rxx < -tol) {
            return Err(FresnelError::Divergent { partial: f64::INFINITY });
        }
        let q = self.log_sup_x()?;
        let sup = q.sup_exp(tol)?;
        Ok(self.pref.norm() * (PI / -rxx).sqrt() * sup)
    }

    /// Real Hessian of `Re Q` in `(x, xi)`, its determinant, and the
    /// maximizer of `Re Q`. `None` when `Re Q` is not negative definite.
    pub fn envelope(&self) -> Option<Envelope> {
        let (a, b, c) = (2.0 * self.xx.re, self.xk.re, 2.0 * self.kk.re);
        let det = a * c - b * b;
        let scale = (a.abs() + b.abs() + c.abs()).max(1e-300);
        if !(a < 0.0 && det > 1e-12 * scale * scale) {
            return None;
        }
        let (gx, gk) = (self.x.re, self.k.re);
        // Solve H z = -g.
        let cx = (-gx * c + gk * b) / det;
        let ck = (-gk * a + gx * b) / det;
        Some(Envelope { center: (cx, ck), sigma: ((-c / det).sqrt(), (-a / det).sqrt()) })
    }
}

/// Gaussian envelope of `|exp(Q)|`: centre and marginal standard deviations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub center: (f64, f64),
    pub sigma: (f64, f64),
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn sup_of_gaussian_ridge() {
        // |F| = exp(-(x - xi)^2 / 2 - xi^2 / 2)
        let f = PhaseForm {
            pref: c(1.0),
            xx: c(-0.5),
            xk: c(1.0),
            kk: c(-1.0),
            ..PhaseForm::zero()
        };
        let q = f.log_sup_x().unwrap();
        assert!((q.a2 + 0.5).abs() < 1e-15);
        assert!((f.integral_of_sup_x().unwrap() - (2.0 * PI).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn ridge_without_decay_diverges() {
        let f = PhaseForm { pref: c(1.0), xx: c(-0.5), xk: c(1.0), kk: c(-0.5), ..PhaseForm::zero() };
        assert!(matches!(f.integral_of_sup_x(), Err(FresnelError::Divergent { .. })));
        assert!((f.sup_of_integral_x().unwrap() - (2.0 * PI).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn envelope_centre() {
        let f = PhaseForm { pref: c(1.0), xx: c(-1.0), kk: c(-2.0), x: c(2.0), k: c(4.0), ..PhaseForm::zero() };
        let e = f.envelope().unwrap();
        assert!((e.center.0 - 1.0).abs() < 1e-15 && (e.center.1 - 1.0).abs() < 1e-15);
    }
}
