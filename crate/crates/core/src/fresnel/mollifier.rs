use serde::{Deserialize, Serialize};

use crate::error::{FresnelError, Result};

/// Separable cut-off `phi(x) = prod_j p(x_j)` with `p(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mollifier {
    /// `p(t) = exp(-t^2 / 2)`.
    Gaussian,
    /// `p(t) = sech(t)`.
    Sech,
}

impl Mollifier {
    pub fn profile(&self, t: f64) -> f64 {
        match self {
            Mollifier::Gaussian => (-0.5 * t * t).exp(),
            Mollifier::Sech => 1.0 / t.cosh(),
        }
    }

    /// Radius beyond which the profile is below `1e-17`.
    pub fn support_radius(&self) -> f64 {
        match self {
            Mollifier::Gaussian => 8.85,
            Mollifier::Sech => 39.8,
        }
    }

    /// Density `u -> phi^(u)` in the convention `p(t) = int exp(i t u) phi^(u) du`.
    pub fn fourier_density(&self, u: f64) -> f64 {
        match self {
            Mollifier::Gaussian => (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt(),
            Mollifier::Sech => 0.5 / (std::f64::consts::FRAC_PI_2 * u).cosh(),
        }
    }
}

/// Cut-off profile and the decreasing sequence of `eps` at which the
/// regularized integrals are sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularizerSchedule {
    pub mollifier: Mollifier,
    pub eps: Vec<f64>,
}

impl RegularizerSchedule {
    /// `eps = 2^(-j)` for `j = 0..=levels`.
    pub fn halving(mollifier: Mollifier, levels: usize) -> Self {
        RegularizerSchedule { mollifier, eps: (0..=levels).map(|j| 0.5f64.powi(j as i32)).collect() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps.len() < 3 {
            return Err(FresnelError::InvalidParameter("schedule needs at least three levels".into()));
        }
        if !self.eps.iter().all(|e| e.is_finite() && *e > 0.0) || self.eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(FresnelError::InvalidParameter("eps must be positive and strictly decreasing".into()));
        }
        Ok(())
    }
}

impl Default for RegularizerSchedule {
    fn default() -> Self {
        RegularizerSchedule::halving(Mollifier::Gaussian, 16)
    }
}
