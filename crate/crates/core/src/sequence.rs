//! Real sequences indexed from 1, with certified tail sums.
//!
//! Infinite-dimensional objects are parametrized by sequences such as
//! frequencies `k_j` or window weights `q_j`. Each sequence carries enough
//! structure to bound `sum_{j > n} |x_j|^p` rigorously.

use serde::{Deserialize, Serialize};

use crate::error::{FresnelError, Result};

/// Continuation of an explicit head of values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TailTemplate {
    /// `x_j = x_{from-1} * ratio^(j - from + 1)` for `j >= from`.
    Geometric { ratio: f64, from: usize },
    /// `x_j = scale * j^(-exponent)` for `j >= from`.
    Power { scale: f64, exponent: f64, from: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum RealSequence {
    /// `x_j = first * ratio^(j-1)`.
    Geometric { first: f64, ratio: f64 },
    /// `x_j = scale * j^(-exponent)`.
    Power { scale: f64, exponent: f64 },
    Constant { value: f64 },
    /// Listed values, then the tail template (or zeros when absent).
    Explicit {
        values: Vec<f64>,
        #[serde(default)]
        tail: Option<TailTemplate>,
    },
}

impl RealSequence {
    pub fn geometric(first: f64, ratio: f64) -> Self {
        RealSequence::Geometric { first, ratio }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(FresnelError::InvalidParameter(m.to_string()));
        match self {
            RealSequence::Geometric { first, ratio } => {
                if !(first.is_finite() && ratio.is_finite()) {
                    return bad("geometric sequence needs finite parameters");
                }
            }
            RealSequence::Power { scale, exponent } => {
                if !(scale.is_finite() && exponent.is_finite()) {
                    return bad("power sequence needs finite parameters");
                }
            }
            RealSequence::Constant { value } => {
                if !value.is_finite() {
                    return bad("constant sequence needs a finite value");
                }
            }
            RealSequence::Explicit { values, tail } => {
                if !values.iter().all(|v| v.is_finite()) {
                    return bad("explicit sequence values must be finite");
                }
                match tail {
                    Some(TailTemplate::Geometric { ratio, from })
                        if *from != values.len() + 1 || values.is_empty() || !ratio.is_finite() =>
                    {
                        return bad("geometric tail must start right after a non-empty head");
                    }
                    Some(TailTemplate::Power { scale, exponent, from })
                        if *from != values.len() + 1 || !(scale.is_finite() && exponent.is_finite()) =>
                    {
                        return bad("power tail must start right after the head");
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    /// The `j`-th term, `j >= 1`.
    pub fn term(&self, j: usize) -> f64 {
        assert!(j >= 1, "sequences are indexed from 1");
        match self {
            RealSequence::Geometric { first, ratio } => first * ratio.powi(j as i32 - 1),
            RealSequence::Power { scale, exponent } => scale * (j as f64).powf(-exponent),
            RealSequence::Constant { value } => *value,
            RealSequence::Explicit { values, tail } => {
                if j <= values.len() {
                    values[j - 1]
                } else {
                    match tail {
                        None => 0.0,
                        Some(TailTemplate::Geometric { ratio, .. }) => {
                            values[values.len() - 1] * ratio.powi((j - values.len()) as i32)
                        }
                        Some(TailTemplate::Power { scale, exponent, .. }) => scale * (j as f64).powf(-exponent),
                    }
                }
            }
        }
    }

    pub fn head(&self, n: usize) -> Vec<f64> {
        (1..=n).map(|j| self.term(j)).collect()
    }

    /// A rigorous upper bound on `sum_{j > n} |x_j|^p`, or `None` when the
    /// series diverges or cannot be bounded.
    pub fn tail_bound(&self, p: f64, n: usize) -> Option<f64> {
        let geometric = |next: f64, ratio: f64| {
            let r = ratio.abs().powf(p);
            if next == 0.0 {
                Some(0.0)
            } else if r < 1.0 {
                Some(next.abs().powf(p) / (1.0 - r))
            } else {
                None
            }
        };
        // sum_{j > n} j^(-s) <= n^(1-s) / (s - 1) for n >= 1, s > 1.
        let power = |scale: f64, exponent: f64, n: usize| {
            let s = p * exponent;
            if scale == 0.0 {
                Some(0.0)
            } else if s > 1.0 && n >= 1 {
                Some(scale.abs().powf(p) * (n as f64).powf(1.0 - s) / (s - 1.0))
            } else {
                None
            }
        };
        match self {
            RealSequence::Geometric { ratio, .. } => geometric(self.term(n + 1), *ratio),
            RealSequence::Power { scale, exponent } => power(*scale, *exponent, n.max(1)).map(|b| {
                if n == 0 {
                    b + scale.abs().powf(p)
                } else {
                    b
                }
            }),
            RealSequence::Constant { value } => (*value == 0.0).then_some(0.0),
            RealSequence::Explicit { values, tail } => {
                let m = values.len();
                let head: f64 = values.iter().skip(n).map(|v| v.abs().powf(p)).sum();
                let rest = match tail {
                    None => Some(0.0),
                    Some(TailTemplate::Geometric { ratio, .. }) => geometric(self.term(m.max(n) + 1), *ratio),
                    Some(TailTemplate::Power { scale, exponent, .. }) => power(*scale, *exponent, m.max(n).max(1)),
                };
                rest.map(|r| head + r)
            }
        }
    }

    /// `sum_{j <= n} |x_j|^p`.
    pub fn partial_sum(&self, p: f64, n: usize) -> f64 {
        (1..=n).map(|j| self.term(j).abs().powf(p)).sum()
    }
}
