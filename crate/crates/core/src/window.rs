//! Separable centred Gaussian windows.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FresnelError, Result};
use crate::params::Params;

/// `g(x) = (2 pi hbar)^(-n/2) exp(-<x, Q x> / 2hbar)` with `Q = diag(q)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianWindow {
    pub q: Vec<f64>,
    pub hbar: f64,
}

impl GaussianWindow {
    pub fn new(q: Vec<f64>, hbar: f64) -> Result<Self> {
        Params::new(hbar)?;
        if q.is_empty() {
            return Err(FresnelError::InvalidParameter("window needs at least one coordinate".into()));
        }
        if let Some(bad) = q.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(FresnelError::InvalidParameter(format!("window weights must be > 0, got {bad}")));
        }
        Ok(GaussianWindow { q, hbar })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }
}

/// One coordinate of a window: `amp * exp(-(a / 2hbar) y^2)` with `Re a > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowFactor {
    pub amp: Complex64,
    pub a: Complex64,
}

/// Product of one-dimensional centred Gaussian windows, possibly chirped.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub hbar: f64,
    pub factors: Vec<WindowFactor>,
}

impl Window {
    pub fn new(hbar: f64, factors: Vec<WindowFactor>) -> Result<Self> {
        Params::new(hbar)?;
        if factors.is_empty() {
            return Err(FresnelError::InvalidParameter("window needs at least one coordinate".into()));
        }
        if factors.iter().any(|f| !(f.a.re > 0.0) || !f.amp.is_finite() || !f.a.is_finite()) {
            return Err(FresnelError::InvalidParameter("window exponents need positive real part".into()));
        }
        Ok(Window { hbar, factors })
    }

    pub fn gaussian(w: &GaussianWindow) -> Self {
        let amp = Complex64::new((2.0 * PI * w.hbar).powf(-0.5), 0.0);
        Window {
            hbar: w.hbar,
            factors: w.q.iter().map(|q| WindowFactor { amp, a: Complex64::new(*q, 0.0) }).collect(),
        }
    }

    /// `exp(-(alpha - i) |x|^2 / 2hbar)`, without normalization.
    pub fn chirped(alpha: f64, dim: usize, hbar: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(FresnelError::InvalidParameter(format!("alpha must be > 0, got {alpha}")));
        }
        Window::new(
            hbar,
            vec![WindowFactor { amp: Complex64::new(1.0, 0.0), a: Complex64::new(alpha, -1.0) }; dim],
        )
    }

    /// The L2-normalized window `(pi hbar)^(-d/4) exp(-|x|^2 / 2hbar)`.
    pub fn unit(dim: usize, hbar: f64) -> Result<Self> {
        let amp = Complex64::new((PI * hbar).powf(-0.25), 0.0);
        Window::new(hbar, vec![WindowFactor { amp, a: Complex64::new(1.0, 0.0) }; dim])
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn eval(&self, y: &[f64]) -> Complex64 {
        self.factors
            .iter()
            .zip(y)
            .map(|(f, v)| f.amp * (-f.a * v * v / (2.0 * self.hbar)).exp())
            .product()
    }

    pub fn eval_factor(&self, j: usize, y: f64) -> Complex64 {
        let f = self.factors[j];
        f.amp * (-f.a * y * y / (2.0 * self.hbar)).exp()
    }

    pub fn conj(&self) -> Self {
        Window {
            hbar: self.hbar,
            factors: self.factors.iter().map(|f| WindowFactor { amp: f.amp.conj(), a: f.a.conj() }).collect(),
        }
    }

    /// The hbar-scaled Fourier transform, again a centred Gaussian.
    pub fn fourier(&self) -> Self {
        Window {
            hbar: self.hbar,
            factors: self
                .factors
                .iter()
                .map(|f| WindowFactor { amp: f.amp / f.a.sqrt(), a: f.a.inv() })
                .collect(),
        }
    }

    /// `y -> g(y / lambda)`.
    pub fn dilate(&self, lambda: f64) -> Self {
        Window {
            hbar: self.hbar,
            factors: self
                .factors
                .iter()
                .map(|f| WindowFactor { amp: f.amp, a: f.a / (lambda * lambda) })
                .collect(),
        }
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        Window { hbar: self.hbar, factors: self.factors[range].to_vec() }
    }

    /// `<self, other> = int self * conj(other)`.
    pub fn inner(&self, other: &Window) -> Complex64 {
        self.factors
            .iter()
            .zip(&other.factors)
            .map(|(f, g)| {
                let s = f.a + g.a.conj();
                f.amp * g.amp.conj() * (Complex64::new(2.0 * PI * self.hbar, 0.0) / s).sqrt()
            })
            .product()
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).re.sqrt()
    }

    pub(crate) fn check(&self, dim: usize, params: &Params) -> Result<()> {
        if self.dim() != dim {
            return Err(FresnelError::DimensionMismatch { expected: dim, got: self.dim() });
        }
        if (self.hbar - params.hbar).abs() > 1e-14 * params.hbar {
            return Err(FresnelError::InvalidParameter(format!(
                "window built for hbar={} used with hbar={}",
                self.hbar, params.hbar
            )));
        }
        Ok(())
    }
}

impl From<&GaussianWindow> for Window {
    fn from(w: &GaussianWindow) -> Self {
        Window::gaussian(w)
    }
}
