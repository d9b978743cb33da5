use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical and symbolic operations of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FresnelError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("complex Gaussian with negative real part in coordinate {coord}")]
    UnboundedGaussian { coord: usize },

    #[error("no closed form available: {0}")]
    NotClosedForm(String),

    #[error("grid step {h} is too coarse; the integrand needs h <= {limit}")]
    Resolution { h: f64, limit: f64 },

    /// The resolution error of periodic lattices that are too short for
    /// the distance travelled by the evolved band.
    #[error("periodic lattice of length {period} is too short; the evolution needs length >= {needed}")]
    ShortPeriod { period: f64, needed: f64 },

    #[error("integral diverges (partial estimate {partial} over the probed region)")]
    Divergent { partial: f64 },

    #[error("regularized values did not settle; last iterates {}", fmt_trace(.trace))]
    NonConvergent { trace: Vec<(f64, Complex64)> },

    #[error("Cauchy check failed between n={n} and m={m}: distance {distance}")]
    CauchyCheckFailed { n: usize, m: usize, distance: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

fn fmt_trace(trace: &[(f64, Complex64)]) -> String {
    let tail = &trace[trace.len().saturating_sub(4)..];
    tail.iter()
        .map(|(e, v)| format!("({e:.3e}: {:.6e}{:+.6e}i)", v.re, v.im))
        .collect::<Vec<_>>()
        .join(", ")
}

pub type Result<T> = std::result::Result<T, FresnelError>;
