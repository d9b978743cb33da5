//! Sequences of cylinder functions, non-cylinder functions given through
//! their restrictions to R^n, and the two infinite-dimensional functionals.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::composite::composite_dual_value;
use super::{cauchy_distance, l_min, CylinderFunction, WindowSequence};
use crate::catalog::{tensorize, DiscreteMeasure, FunctionObject, MeasureAtom};
use crate::error::{FresnelError, Result};
use crate::params::Params;
use crate::sequence::RealSequence;
use crate::window::Window;

mod spec_serde {
    use serde::de::Error as _;
    use serde::ser::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::catalog::{FunctionObject, FunctionSpec};

    pub fn serialize<S: Serializer>(f: &FunctionObject, s: S) -> Result<S::Ok, S::Error> {
        FunctionSpec::from_object(f).map_err(S::Error::custom)?.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<FunctionObject, D::Error> {
        FunctionSpec::deserialize(d)?.to_object().map_err(D::Error::custom)
    }
}

/// A function on R^infinity known through its restrictions
/// `f^(n)(x_1, ..., x_n) = f(x_1, ..., x_n, 0, 0, ...)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum SequenceFunction {
    /// `exp(i k.x / hbar)` with `k` square summable.
    #[serde(rename = "plane_wave_l2")]
    PlaneWaveL2 { k: RealSequence },
    /// `exp(-sum_j r_j x_j^2 / 2hbar)` with `r_j >= 0` summable.
    #[serde(rename = "gaussian_l1")]
    GaussianL1 { r: RealSequence },
    /// `h(k.x)` for a one-dimensional `h` and square summable `k`.
    #[serde(rename = "composite_1d")]
    Composite1D {
        #[serde(with = "spec_serde")]
        h: FunctionObject,
        k: RealSequence,
    },
    /// `prod_j (1 + a_j e_j(x_j))` with `e_j(t) = exp(i k_j t)`, or
    /// `exp(i k_j t / hbar)` when `hbar_scaled`, and `a_j` summable.
    #[serde(rename = "product_family")]
    ProductFamily {
        a: RealSequence,
        k: RealSequence,
        #[serde(default)]
        hbar_scaled: bool,
    },
}

fn no_certificate(what: &str) -> FresnelError {
    FresnelError::InvalidParameter(format!("{what} needs a convergent tail certificate"))
}

impl SequenceFunction {
    pub fn validate(&self) -> Result<()> {
        match self {
            SequenceFunction::PlaneWaveL2 { k } => {
                k.validate()?;
                k.tail_bound(2.0, 1).ok_or_else(|| no_certificate("k"))?;
            }
            SequenceFunction::GaussianL1 { r } => {
                r.validate()?;
                r.tail_bound(1.0, 1).ok_or_else(|| no_certificate("r"))?;
            }
            SequenceFunction::Composite1D { h, k } => {
                h.validate()?;
                if h.dim() != 1 {
                    return Err(FresnelError::DimensionMismatch { expected: 1, got: h.dim() });
                }
                k.validate()?;
                k.tail_bound(2.0, 1).ok_or_else(|| no_certificate("k"))?;
            }
            SequenceFunction::ProductFamily { a, k, .. } => {
                a.validate()?;
                k.validate()?;
                a.tail_bound(1.0, 1).ok_or_else(|| no_certificate("a"))?;
            }
        }
        Ok(())
    }

    /// `f^(n)` as a catalog object on R^n.
    pub fn restriction(&self, n: usize, params: &Params) -> Result<FunctionObject> {
        if n == 0 {
            return Err(FresnelError::InvalidParameter("restriction needs at least one coordinate".into()));
        }
        match self {
            SequenceFunction::PlaneWaveL2 { k } => FunctionObject::plane_wave(k.head(n), true, false),
            SequenceFunction::GaussianL1 { r } => {
                FunctionObject::complex_gaussian(r.head(n).into_iter().map(|v| Complex64::new(v, 0.0)).collect())
            }
            SequenceFunction::Composite1D { h, k } => {
                let kn = k.head(n);
                match h.to_measure(params) {
                    Some(mu) => FunctionObject::fourier_measure(DiscreteMeasure::new(
                        n,
                        mu.atoms
                            .iter()
                            .map(|a| MeasureAtom { point: kn.iter().map(|kj| a.point[0] * kj).collect(), weight: a.weight })
                            .collect(),
                    )?),
                    None => {
                        let h = h.clone();
                        let p = *params;
                        FunctionObject::sampled(n, "h(k.x)", move |x: &[f64]| {
                            let t: f64 = kn.iter().zip(x).map(|(a, b)| a * b).sum();
                            h.evaluate(&[t], &p).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
                        })
                    }
                }
            }
            SequenceFunction::ProductFamily { a, k, hbar_scaled } => {
                let one = Complex64::new(1.0, 0.0);
                let factors = (1..=n)
                    .map(|j| {
                        FunctionObject::affine_combo(vec![
                            (one, FunctionObject::one(1)),
                            (one * a.term(j), FunctionObject::plane_wave(vec![k.term(j)], *hbar_scaled, false)?),
                        ])
                    })
                    .collect::<Result<Vec<_>>>()?;
                tensorize(factors)
            }
        }
    }

    /// `L_n(f^(n))` from the closed forms: `exp(-i ||pi_n k||^2 / 2hbar)`,
    /// `prod_j (1 + i r_j)^(-1/2)`, `sum w exp(-i hbar s^2 ||pi_n k||^2 / 2)`
    /// and `prod_j (1 + a_j L_1(e_j))`. A composite whose `h` is not the
    /// Fourier transform of an atomic measure goes through the phase-space
    /// pairing with the unit window.
    pub fn l_n(&self, n: usize, params: &Params) -> Result<Complex64> {
        let hbar = params.hbar;
        let i = Complex64::i();
        Ok(match self {
            SequenceFunction::PlaneWaveL2 { k } => Complex64::from_polar(1.0, -k.partial_sum(2.0, n) / (2.0 * hbar)),
            SequenceFunction::GaussianL1 { r } => {
                (1..=n).map(|j| (Complex64::new(1.0, 0.0) + i * r.term(j)).sqrt().inv()).product()
            }
            SequenceFunction::Composite1D { h, k } => {
                let lam2 = k.partial_sum(2.0, n);
                match h.to_measure(params) {
                    Some(mu) => mu
                        .atoms
                        .iter()
                        .map(|a| a.weight * Complex64::from_polar(1.0, -0.5 * hbar * a.point[0].powi(2) * lam2))
                        .sum(),
                    None => composite_dual_value(h, lam2.sqrt(), &Window::unit(1, hbar)?, params)?,
                }
            }
            SequenceFunction::ProductFamily { a, k, hbar_scaled } => (1..=n)
                .map(|j| Complex64::new(1.0, 0.0) + a.term(j) * single_plane_wave(k.term(j), *hbar_scaled, hbar))
                .product(),
        })
    }

    /// Certified bound on `|L'(f) - L_n(f^(n))|` from the tail of the
    /// defining sequence, when one exists.
    pub fn tail_error(&self, n: usize, params: &Params) -> Option<f64> {
        let hbar = params.hbar;
        match self {
            SequenceFunction::PlaneWaveL2 { k } => Some(k.tail_bound(2.0, n)? / (2.0 * hbar)),
            SequenceFunction::GaussianL1 { r } => {
                if (1..=n).any(|j| r.term(j) < 0.0) {
                    return None;
                }
                // |log(1 + i r)| <= r (1 + r^2 / 4)^(1/2) and every tail term is at most the tail sum.
                let t = r.tail_bound(1.0, n)?;
                Some((0.5 * t * (1.0 + 0.25 * t * t).sqrt()).exp_m1())
            }
            SequenceFunction::Composite1D { h, k } => {
                let mu = h.to_measure(params)?;
                let t = k.tail_bound(2.0, n)?;
                Some(mu.atoms.iter().map(|a| a.weight.norm() * 0.5 * hbar * a.point[0].powi(2) * t).sum())
            }
            SequenceFunction::ProductFamily { a, .. } => {
                let head: f64 = (1..=n).map(|j| a.term(j).abs().ln_1p()).sum();
                Some(head.exp() * a.tail_bound(1.0, n)?.exp_m1())
            }
        }
    }
}

/// `L_1(exp(i k t))` or `L_1(exp(i k t / hbar))` by the Parseval identity.
fn single_plane_wave(k: f64, hbar_scaled: bool, hbar: f64) -> Complex64 {
    let p = if hbar_scaled { k / hbar } else { k };
    Complex64::from_polar(1.0, -0.5 * hbar * p * p)
}

/// `1, 2, 4, ..., 2^10`.
pub fn default_schedule() -> Vec<usize> {
    (0..=10).map(|e| 1usize << e).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LPrimeResult {
    /// `L_n(f^(n))` at the last scheduled `n`.
    pub value: Complex64,
    pub trace: Vec<(usize, Complex64)>,
    /// Bound on the distance from `value` to the limit, or infinity when the
    /// defining sequence has no tail certificate.
    pub error_estimate: f64,
    pub certified: bool,
}

/// `L'(f) = lim_n L_n(f^(n))` along `schedule`, an increasing list of
/// dimensions. The trace must settle: the last three successive changes
/// stay below `tol`.
pub fn l_prime(f: &SequenceFunction, params: &Params, schedule: &[usize], tol: f64) -> Result<LPrimeResult> {
    params.validate()?;
    f.validate()?;
    if schedule.is_empty() || schedule.windows(2).any(|w| w[1] <= w[0]) || schedule[0] == 0 {
        return Err(FresnelError::InvalidParameter("schedule must be a strictly increasing list of n >= 1".into()));
    }
    let values = schedule.par_iter().map(|&n| f.l_n(n, params)).collect::<Result<Vec<_>>>()?;
    let trace: Vec<(usize, Complex64)> = schedule.iter().copied().zip(values).collect();
    let steps: Vec<f64> = trace.windows(2).map(|w| (w[1].1 - w[0].1).norm()).collect();
    let settled = !steps.is_empty() && steps.iter().rev().take(3).all(|s| *s < tol);
    if !settled {
        return Err(FresnelError::NonConvergent { trace: trace.iter().map(|(n, v)| (*n as f64, *v)).collect() });
    }
    let (n_last, value) = *trace.last().unwrap();
    let tail = f.tail_error(n_last, params);
    Ok(LPrimeResult { value, trace, error_estimate: tail.unwrap_or(f64::INFINITY), certified: tail.is_some() })
}

/// A sequence `(f_n)` of cylinder functions with `f_n` defined on R^n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CylinderSequence {
    /// Partial products `prod_{j <= n} (1 + a_j e_j(x_j))`.
    ProductFamily {
        a: RealSequence,
        k: RealSequence,
        #[serde(default)]
        hbar_scaled: bool,
    },
    /// `exp(i (pi_n k).x / hbar)`.
    PlaneWave { k: RealSequence },
    /// `exp(-sum_{j <= n} r_j x_j^2 / 2hbar)`.
    Gaussian { r: RealSequence },
    /// The restrictions `f^(n)` of a non-cylinder function.
    RestrictionOf { f: SequenceFunction },
}

impl CylinderSequence {
    pub fn term(&self, n: usize, params: &Params) -> Result<CylinderFunction> {
        if n == 0 {
            return Err(FresnelError::InvalidParameter("sequences are indexed from 1".into()));
        }
        let base = match self {
            CylinderSequence::ProductFamily { a, k, hbar_scaled } => {
                SequenceFunction::ProductFamily { a: a.clone(), k: k.clone(), hbar_scaled: *hbar_scaled }
                    .restriction(n, params)?
            }
            CylinderSequence::PlaneWave { k } => FunctionObject::plane_wave(k.head(n), true, false)?,
            CylinderSequence::Gaussian { r } => {
                FunctionObject::complex_gaussian(r.head(n).into_iter().map(|v| Complex64::new(v, 0.0)).collect())?
            }
            CylinderSequence::RestrictionOf { f } => f.restriction(n, params)?,
        };
        CylinderFunction::new(base)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CauchyOptions {
    pub tol: f64,
    /// Largest index tested; pairs are `(m, 2m)` for `2m <= max_n`.
    pub max_n: usize,
}

impl Default for CauchyOptions {
    fn default() -> Self {
        CauchyOptions { tol: 1e-4, max_n: 32 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CauchyPair {
    pub m: usize,
    pub n: usize,
    pub lower: f64,
    pub upper: f64,
}

/// The pairs that were tested. Passing is evidence, not proof, of the
/// Cauchy property.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CauchyCertificate {
    pub pairs: Vec<CauchyPair>,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LTopoResult {
    pub value: Complex64,
    pub error_estimate: f64,
    pub certificate: CauchyCertificate,
}

/// `L(f) = lim_n L_min(f_n)` for a sequence that passes a finite Cauchy
/// check in `||.||_{M^{infty,1}(R^infinity)}`.
///
/// The check tests the pairs `(m, 2m)`. It passes when the last distance is
/// below `tol` and no larger than the one before; otherwise the result is
/// `CauchyCheckFailed` with the certified lower bound of the last distance
/// when that bound already exceeds `tol`.
pub fn l_topological(
    seq: &CylinderSequence,
    w: &WindowSequence,
    params: &Params,
    opts: &CauchyOptions,
) -> Result<LTopoResult> {
    params.validate()?;
    if opts.max_n < 2 || !(opts.tol > 0.0) {
        return Err(FresnelError::InvalidParameter("Cauchy check needs max_n >= 2 and tol > 0".into()));
    }
    let bound = w.uniform_bound(opts.max_n)?;
    if !bound.convergent {
        return Err(FresnelError::InvalidParameter(
            "window weights are not square summable; the functionals L_n are not uniformly bounded".into(),
        ));
    }
    let mut ms = Vec::new();
    let mut m = 1;
    while 2 * m <= opts.max_n {
        ms.push(m);
        m *= 2;
    }
    let pairs = ms
        .par_iter()
        .map(|&m| {
            let d = cauchy_distance(&seq.term(2 * m, params)?, &seq.term(m, params)?, w, params)?;
            Ok(CauchyPair { m, n: 2 * m, lower: d.lower, upper: d.upper })
        })
        .collect::<Result<Vec<_>>>()?;
    let last = *pairs.last().unwrap();
    let shrinking = pairs.len() < 2 || last.upper <= pairs[pairs.len() - 2].upper;
    if !(last.upper < opts.tol && shrinking) {
        let distance = if last.lower >= opts.tol { last.lower } else { last.upper };
        return Err(FresnelError::CauchyCheckFailed { n: last.n, m: last.m, distance });
    }
    let certificate = CauchyCertificate { pairs, tol: opts.tol };

    if let CylinderSequence::ProductFamily { a, k, hbar_scaled } = seq {
        let sf = SequenceFunction::ProductFamily { a: a.clone(), k: k.clone(), hbar_scaled: *hbar_scaled };
        let mut n = opts.max_n;
        while n < 1 << 16 && sf.tail_error(n, params).is_some_and(|e| e > 1e-15) {
            n *= 2;
        }
        if let Some(err) = sf.tail_error(n, params) {
            return Ok(LTopoResult { value: sf.l_n(n, params)?, error_estimate: err, certificate });
        }
    }
    // Continuity of L with constant sup_n ||L_n|| turns the last distance
    // into an error estimate.
    let value = l_min(&seq.term(opts.max_n, params)?, w, params)?.value;
    Ok(LTopoResult { value, error_estimate: bound.sup_estimate * last.upper, certificate })
}
