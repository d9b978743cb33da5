//! Symbolic function objects on R^d.
//!
//! Every object knows its dimension and can be evaluated pointwise. Most
//! kinds also admit closed-form phase-space representations (see
//! [`crate::expansion`]); the `Sampled` kind is an escape hatch for
//! arbitrary callables that only the quadrature-based routines accept.

mod json;
mod measure;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{FresnelError, Result};
use crate::params::Params;

pub use json::FunctionSpec;
pub use measure::{DiscreteMeasure, MeasureAtom};

type Callable = dyn Fn(&[f64]) -> Complex64 + Send + Sync;

/// An arbitrary function given by a callable. Only quadrature paths use it.
#[derive(Clone)]
pub struct Sampled {
    pub dim: usize,
    pub label: String,
    f: Arc<Callable>,
}

impl Sampled {
    pub fn new(
        dim: usize,
        label: impl Into<String>,
        f: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Sampled { dim, label: label.into(), f: Arc::new(f) }
    }

    pub fn call(&self, x: &[f64]) -> Complex64 {
        (self.f)(x)
    }
}

impl fmt::Debug for Sampled {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sampled({}, dim={})", self.label, self.dim)
    }
}

impl PartialEq for Sampled {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.f, &other.f) && self.dim == other.dim
    }
}

/// A function on R^d drawn from the catalog.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionObject {
    /// The constant `value`.
    Constant { dim: usize, value: Complex64 },
    /// `exp(i k.y)`, or `exp(i k.y / hbar)` when `hbar_scaled`. With
    /// `normalized` the wave carries the factor `(2 pi hbar)^(-d/2)`.
    PlaneWave { k: Vec<f64>, hbar_scaled: bool, normalized: bool },
    /// `exp(-(1/2hbar) sum_j z_j y_j^2)` with `Re z_j >= 0`.
    ComplexGaussian { z: Vec<Complex64> },
    /// `(2 pi i hbar)^(-d/2) exp(sign * i |y|^2 / 2hbar)`.
    Chirp { dim: usize, sign: i8 },
    /// `y -> sum_j w_j exp(i p_j . y)`, the Fourier transform of an atomic measure.
    FourierMeasure(DiscreteMeasure),
    /// `cos |y|`.
    CosNorm { dim: usize },
    /// Product of functions in disjoint blocks of coordinates, in order.
    Tensor(Vec<FunctionObject>),
    /// `sum_j c_j f_j`; all members share one dimension.
    AffineCombo(Vec<(Complex64, FunctionObject)>),
    Sampled(Sampled),
}

fn bad(msg: impl Into<String>) -> FresnelError {
    FresnelError::InvalidParameter(msg.into())
}

impl FunctionObject {
    pub fn constant(dim: usize, value: Complex64) -> Result<Self> {
        let f = FunctionObject::Constant { dim, value };
        f.validate()?;
        Ok(f)
    }

    pub fn one(dim: usize) -> Self {
        FunctionObject::Constant { dim: dim.max(1), value: Complex64::new(1.0, 0.0) }
    }

    pub fn plane_wave(k: Vec<f64>, hbar_scaled: bool, normalized: bool) -> Result<Self> {
        let f = FunctionObject::PlaneWave { k, hbar_scaled, normalized };
        f.validate()?;
        Ok(f)
    }

    pub fn complex_gaussian(z: Vec<Complex64>) -> Result<Self> {
        let f = FunctionObject::ComplexGaussian { z };
        f.validate()?;
        Ok(f)
    }

    pub fn chirp(dim: usize, sign: i8) -> Result<Self> {
        let f = FunctionObject::Chirp { dim, sign };
        f.validate()?;
        Ok(f)
    }

    pub fn fourier_measure(mu: DiscreteMeasure) -> Result<Self> {
        let f = FunctionObject::FourierMeasure(mu.canonical());
        f.validate()?;
        Ok(f)
    }

    pub fn cos_norm(dim: usize) -> Result<Self> {
        let f = FunctionObject::CosNorm { dim };
        f.validate()?;
        Ok(f)
    }

    pub fn affine_combo(terms: Vec<(Complex64, FunctionObject)>) -> Result<Self> {
        let f = FunctionObject::AffineCombo(terms);
        f.validate()?;
        Ok(f)
    }

    pub fn sampled(
        dim: usize,
        label: impl Into<String>,
        f: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let s = FunctionObject::Sampled(Sampled::new(dim, label, f));
        s.validate()?;
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        match self {
            FunctionObject::Constant { dim, .. }
            | FunctionObject::Chirp { dim, .. }
            | FunctionObject::CosNorm { dim } => *dim,
            FunctionObject::PlaneWave { k, .. } => k.len(),
            FunctionObject::ComplexGaussian { z } => z.len(),
            FunctionObject::FourierMeasure(mu) => mu.dim,
            FunctionObject::Tensor(fs) => fs.iter().map(|f| f.dim()).sum(),
            FunctionObject::AffineCombo(ts) => ts.first().map_or(0, |(_, f)| f.dim()),
            FunctionObject::Sampled(s) => s.dim,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            FunctionObject::Constant { .. } => "Constant",
            FunctionObject::PlaneWave { .. } => "PlaneWave",
            FunctionObject::ComplexGaussian { .. } => "ComplexGaussian",
            FunctionObject::Chirp { .. } => "Chirp",
            FunctionObject::FourierMeasure(_) => "FourierMeasure",
            FunctionObject::CosNorm { .. } => "CosNorm",
            FunctionObject::Tensor(_) => "Tensor",
            FunctionObject::AffineCombo(_) => "AffineCombo",
            FunctionObject::Sampled(_) => "Sampled",
        }
    }

    /// Checks the structural invariants of the object, recursively.
    pub fn validate(&self) -> Result<()> {
        if self.dim() == 0 {
            return Err(bad(format!("{} must have dimension >= 1", self.kind_name())));
        }
        match self {
            FunctionObject::Constant { value, .. } => finite_c(*value, "constant"),
            FunctionObject::PlaneWave { k, .. } => {
                if k.iter().all(|v| v.is_finite()) {
                    Ok(())
                } else {
                    Err(bad("plane-wave frequency must be finite"))
                }
            }
            FunctionObject::ComplexGaussian { z } => {
                for (coord, zj) in z.iter().enumerate() {
                    finite_c(*zj, "gaussian exponent")?;
                    if zj.re < 0.0 {
                        return Err(FresnelError::UnboundedGaussian { coord });
                    }
                }
                Ok(())
            }
            FunctionObject::Chirp { sign, .. } => {
                if *sign == 1 || *sign == -1 {
                    Ok(())
                } else {
                    Err(bad(format!("chirp sign must be +1 or -1, got {sign}")))
                }
            }
            FunctionObject::FourierMeasure(mu) => mu.validate(),
            FunctionObject::CosNorm { .. } | FunctionObject::Sampled(_) => Ok(()),
            FunctionObject::Tensor(fs) => {
                if fs.is_empty() {
                    return Err(bad("tensor product needs at least one factor"));
                }
                fs.iter().try_for_each(|f| f.validate())
            }
            FunctionObject::AffineCombo(ts) => {
                let d = self.dim();
                for (c, f) in ts {
                    finite_c(*c, "combination coefficient")?;
                    f.validate()?;
                    if f.dim() != d {
                        return Err(FresnelError::DimensionMismatch { expected: d, got: f.dim() });
                    }
                }
                Ok(())
            }
        }
    }

    /// Pointwise value at `x`.
    pub fn evaluate(&self, x: &[f64], params: &Params) -> Result<Complex64> {
        if x.len() != self.dim() {
            return Err(FresnelError::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(self.eval_unchecked(x, params.hbar))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64], hbar: f64) -> Complex64 {
        let i = Complex64::i();
        match self {
            FunctionObject::Constant { value, .. } => *value,
            FunctionObject::PlaneWave { k, hbar_scaled, normalized } => {
                let dot: f64 = k.iter().zip(x).map(|(a, b)| a * b).sum();
                let phase = if *hbar_scaled { dot / hbar } else { dot };
                let amp = if *normalized {
                    (2.0 * PI * hbar).powf(-(k.len() as f64) / 2.0)
                } else {
                    1.0
                };
                Complex64::from_polar(amp, phase)
            }
            FunctionObject::ComplexGaussian { z } => {
                let s: Complex64 = z.iter().zip(x).map(|(zj, y)| zj * y * y).sum();
                (-s / (2.0 * hbar)).exp()
            }
            FunctionObject::Chirp { sign, .. } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                chirp_prefactor(x.len(), hbar) * (i * (*sign as f64) * r2 / (2.0 * hbar)).exp()
            }
            FunctionObject::FourierMeasure(mu) => mu.fourier_at(x),
            FunctionObject::CosNorm { .. } => {
                Complex64::new(x.iter().map(|v| v * v).sum::<f64>().sqrt().cos(), 0.0)
            }
            FunctionObject::Tensor(fs) => {
                let mut off = 0;
                let mut acc = Complex64::new(1.0, 0.0);
                for f in fs {
                    let d = f.dim();
                    acc *= f.eval_unchecked(&x[off..off + d], hbar);
                    off += d;
                }
                acc
            }
            FunctionObject::AffineCombo(ts) => {
                ts.iter().map(|(c, f)| c * f.eval_unchecked(x, hbar)).sum()
            }
            FunctionObject::Sampled(s) => s.call(x),
        }
    }

    /// Splits a separable object into its one-dimensional (or otherwise
    /// indecomposable) factors, in coordinate order.
    pub fn factors(&self) -> Vec<FunctionObject> {
        match self {
            FunctionObject::Tensor(fs) => fs.iter().flat_map(|f| f.factors()).collect(),
            FunctionObject::Constant { dim, value } if *dim > 1 => {
                let mut out = vec![FunctionObject::Constant { dim: 1, value: *value }];
                out.extend((1..*dim).map(|_| FunctionObject::one(1)));
                out
            }
            FunctionObject::PlaneWave { k, hbar_scaled, normalized } if k.len() > 1 => k
                .iter()
                .map(|kj| FunctionObject::PlaneWave {
                    k: vec![*kj],
                    hbar_scaled: *hbar_scaled,
                    normalized: *normalized,
                })
                .collect(),
            FunctionObject::ComplexGaussian { z } if z.len() > 1 => z
                .iter()
                .map(|zj| FunctionObject::ComplexGaussian { z: vec![*zj] })
                .collect(),
            FunctionObject::Chirp { dim, sign } if *dim > 1 => {
                (0..*dim).map(|_| FunctionObject::Chirp { dim: 1, sign: *sign }).collect()
            }
            other => vec![other.clone()],
        }
    }

    /// The atomic measure whose Fourier transform is this object, when there
    /// is one. Plane waves scaled by hbar need `params` to place their atom.
    pub fn to_measure(&self, params: &Params) -> Option<DiscreteMeasure> {
        let one = Complex64::new(1.0, 0.0);
        let d = self.dim();
        match self {
            FunctionObject::Constant { value, .. } => {
                Some(DiscreteMeasure::single(vec![0.0; d], *value))
            }
            FunctionObject::PlaneWave { k, hbar_scaled, normalized } => {
                let p = k
                    .iter()
                    .map(|v| if *hbar_scaled { v / params.hbar } else { *v })
                    .collect();
                let w = if *normalized {
                    (2.0 * PI * params.hbar).powf(-(d as f64) / 2.0)
                } else {
                    1.0
                };
                Some(DiscreteMeasure::single(p, one * w))
            }
            FunctionObject::FourierMeasure(mu) => Some(mu.clone()),
            FunctionObject::CosNorm { dim: 1 } => Some(
                DiscreteMeasure::new(
                    1,
                    vec![
                        MeasureAtom { point: vec![1.0], weight: one * 0.5 },
                        MeasureAtom { point: vec![-1.0], weight: one * 0.5 },
                    ],
                )
                .ok()?,
            ),
            FunctionObject::Tensor(fs) => {
                let mut acc: Option<DiscreteMeasure> = None;
                for f in fs {
                    let m = f.to_measure(params)?;
                    acc = Some(match acc {
                        None => m,
                        Some(a) => a.product(&m),
                    });
                }
                acc.map(|m| m.canonical())
            }
            FunctionObject::AffineCombo(ts) => {
                let mut atoms = Vec::new();
                for (c, f) in ts {
                    let m = f.to_measure(params)?;
                    atoms.extend(
                        m.atoms.into_iter().map(|a| MeasureAtom { point: a.point, weight: a.weight * c }),
                    );
                }
                Some(DiscreteMeasure { dim: d, atoms }.canonical())
            }
            _ => None,
        }
    }

    /// Whether some factor is (a multiple of) a pure chirp, which has no
    /// finite Sjöstrand norm.
    pub fn is_chirp_like(&self) -> bool {
        match self {
            FunctionObject::Chirp { .. } => true,
            FunctionObject::ComplexGaussian { z } => z.iter().any(|zj| zj.re == 0.0 && zj.im != 0.0),
            FunctionObject::Tensor(fs) => fs.iter().any(|f| f.is_chirp_like()),
            _ => false,
        }
    }
}

/// `(2 pi i hbar)^(-d/2)`, taken as the product of `d` principal square roots.
pub fn chirp_prefactor(d: usize, hbar: f64) -> Complex64 {
    let one = (Complex64::new(0.0, 2.0 * PI * hbar)).sqrt().inv();
    one.powu(d as u32)
}

fn finite_c(c: Complex64, what: &str) -> Result<()> {
    if c.re.is_finite() && c.im.is_finite() {
        Ok(())
    } else {
        Err(bad(format!("{what} must be finite")))
    }
}

/// Tensor product of `fs` in the given coordinate order.
///
/// Nested tensors are flattened, and adjacent factors that have a combined
/// catalog form are merged: constants multiply, complex Gaussians and
/// same-sign chirps concatenate, and plane waves with identical flags join.
pub fn tensorize(fs: Vec<FunctionObject>) -> Result<FunctionObject> {
    if fs.is_empty() {
        return Err(bad("tensor product needs at least one factor"));
    }
    for f in &fs {
        f.validate()?;
    }
    let mut flat: Vec<FunctionObject> = Vec::new();
    for f in fs {
        match f {
            FunctionObject::Tensor(inner) => flat.extend(inner),
            other => flat.push(other),
        }
    }
    let mut out: Vec<FunctionObject> = Vec::new();
    for f in flat {
        let merged = match (out.last(), &f) {
            (
                Some(FunctionObject::Constant { dim: d1, value: v1 }),
                FunctionObject::Constant { dim: d2, value: v2 },
            ) => Some(FunctionObject::Constant { dim: d1 + d2, value: v1 * v2 }),
            (
                Some(FunctionObject::ComplexGaussian { z: z1 }),
                FunctionObject::ComplexGaussian { z: z2 },
            ) => Some(FunctionObject::ComplexGaussian { z: [z1.clone(), z2.clone()].concat() }),
            (Some(FunctionObject::Chirp { dim: d1, sign: s1 }), FunctionObject::Chirp { dim: d2, sign: s2 })
                if s1 == s2 =>
            {
                Some(FunctionObject::Chirp { dim: d1 + d2, sign: *s1 })
            }
            (
                Some(FunctionObject::PlaneWave { k: k1, hbar_scaled: h1, normalized: n1 }),
                FunctionObject::PlaneWave { k: k2, hbar_scaled: h2, normalized: n2 },
            ) if h1 == h2 && n1 == n2 => Some(FunctionObject::PlaneWave {
                k: [k1.clone(), k2.clone()].concat(),
                hbar_scaled: *h1,
                normalized: *n1,
            }),
            _ => None,
        };
        match merged {
            Some(m) => {
                out.pop();
                out.push(m);
            }
            None => out.push(f),
        }
    }
    if out.len() == 1 {
        Ok(out.pop().unwrap())
    } else {
        Ok(FunctionObject::Tensor(out))
    }
}

/// Rewrites `sum_j c_j (A (x) B_j)` as `A (x) sum_j c_j B_j` when every member
/// of an affine combination starts with the same factors. Other objects are
/// returned unchanged.
pub fn factor_common_prefix(f: &FunctionObject) -> FunctionObject {
    let FunctionObject::AffineCombo(ts) = f else {
        return f.clone();
    };
    if ts.len() < 2 {
        return f.clone();
    }
    let lists: Vec<Vec<FunctionObject>> = ts.iter().map(|(_, g)| g.factors()).collect();
    let mut common = 0;
    while let Some(cand) = lists[0].get(common) {
        if lists[1..].iter().any(|l| l.get(common) != Some(cand)) {
            break;
        }
        common += 1;
    }
    if common == 0 {
        return f.clone();
    }
    let prefix: Vec<FunctionObject> = lists[0][..common].to_vec();
    if lists.iter().all(|l| l.len() == common) {
        let c: Complex64 = ts.iter().map(|(c, _)| *c).sum();
        let mut fs = prefix;
        fs[0] = FunctionObject::AffineCombo(vec![(c, fs[0].clone())]);
        return FunctionObject::Tensor(fs);
    }
    if lists.iter().any(|l| l.len() == common) {
        return f.clone();
    }
    let rest: Vec<(Complex64, FunctionObject)> = ts
        .iter()
        .zip(&lists)
        .map(|((c, _), l)| {
            let tail = l[common..].to_vec();
            let g = if tail.len() == 1 {
                tail.into_iter().next().unwrap()
            } else {
                FunctionObject::Tensor(tail)
            };
            (*c, g)
        })
        .collect();
    let mut fs = prefix;
    fs.push(FunctionObject::AffineCombo(rest));
    FunctionObject::Tensor(fs)
}
