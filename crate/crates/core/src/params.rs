use serde::{Deserialize, Serialize};

use crate::error::{FresnelError, Result};

/// Global physical parameters. Only the reduced Planck constant for now.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub hbar: f64,
}

impl Params {
    pub fn new(hbar: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(FresnelError::InvalidParameter(format!(
                "hbar must be positive and finite, got {hbar}"
            )));
        }
        Ok(Params { hbar })
    }

    /// Values of hbar above one are accepted, but the semiclassical estimates
    /// the crate reports were only exercised for hbar in (0, 1].
    pub fn outside_semiclassical_regime(&self) -> bool {
        self.hbar > 1.0
    }

    pub(crate) fn validate(&self) -> Result<()> {
        Params::new(self.hbar).map(|_| ())
    }
}

impl Default for Params {
    fn default() -> Self {
        Params { hbar: 1.0 }
    }
}
