//! Cylinder functions on R^infinity and the Fresnel functionals built from
//! the finite-dimensional ones: the minimal functional on cylinder
//! functions, its closure along Cauchy sequences, and the sequential
//! extension through restrictions to R^n.
//!
//! Points of R^infinity are finitely supported vectors with an implicit
//! zero tail.

mod composite;
mod sequences;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use composite::{
    appendix_a_kernel, appendix_a_limit, composite_dual_value, dilated_chirp_stft, dominator_check,
    inversion_from_fourier, phi_dominator, phi_tail_constant, phi_tail_integral, AppendixAGrids, AppendixAValue,
    DominatorReport, DominatorRow, PHI_TAIL_CONSTANT_M2_B1,
};
pub use sequences::{
    default_schedule, l_prime, l_topological, CauchyCertificate, CauchyOptions, CauchyPair, CylinderSequence, LPrimeResult,
    LTopoResult, SequenceFunction,
};

use crate::catalog::{tensorize, FunctionObject};
use crate::error::{FresnelError, Result};
use crate::expansion::Expansion;
use crate::fresnel::{
    fresnel_closed, fresnel_parseval, fresnel_phase_space, uniform_bound_check, FresnelMethod, FresnelResult,
    UniformBound,
};
use crate::gabor::{norm_m_infty_1, NormEstimate, SupMethod};
use crate::params::Params;
use crate::sequence::RealSequence;
use crate::window::{GaussianWindow, Window};

/// The weights `q_j` of the windows `g_n = (2 pi hbar)^(-n/2) exp(-sum_j q_j y_j^2 / 2hbar)`
/// for every `n` at once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSequence {
    pub q: RealSequence,
}

impl WindowSequence {
    pub fn new(q: RealSequence) -> Result<Self> {
        q.validate()?;
        Ok(WindowSequence { q })
    }

    /// `GaussianWindow(q_1, ..., q_n)`; fails if some weight is not positive.
    pub fn gaussian(&self, n: usize, hbar: f64) -> Result<GaussianWindow> {
        GaussianWindow::new(self.q.head(n), hbar)
    }

    pub fn window(&self, n: usize, params: &Params) -> Result<Window> {
        Ok(Window::gaussian(&self.gaussian(n, params.hbar)?))
    }

    /// Whether `sup_n ||L_n||` is finite for these windows.
    pub fn uniform_bound(&self, n_max: usize) -> Result<UniformBound> {
        uniform_bound_check(&self.q, n_max)
    }
}

/// A function on R^infinity that only depends on the first `base_dim`
/// coordinates, where it equals `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderFunction {
    pub base_dim: usize,
    pub base: FunctionObject,
}

impl CylinderFunction {
    pub fn new(base: FunctionObject) -> Result<Self> {
        base.validate()?;
        Ok(CylinderFunction { base_dim: base.dim(), base })
    }

    /// Value at a finitely supported point. Missing coordinates are zero and
    /// coordinates beyond `base_dim` are ignored.
    pub fn evaluate(&self, x: &[f64], params: &Params) -> Result<Complex64> {
        let mut p = vec![0.0; self.base_dim];
        for (dst, src) in p.iter_mut().zip(x) {
            *dst = *src;
        }
        self.base.evaluate(&p, params)
    }

    /// The same function written over the first `n` coordinates.
    pub fn extend(&self, n: usize) -> Result<CylinderFunction> {
        if n < self.base_dim {
            return Err(FresnelError::InvalidParameter(format!(
                "cannot extend a function of {} variables to {n}",
                self.base_dim
            )));
        }
        if n == self.base_dim {
            return Ok(self.clone());
        }
        let base = tensorize(vec![self.base.clone(), FunctionObject::one(n - self.base_dim)])?;
        Ok(CylinderFunction { base_dim: n, base })
    }

    /// True when both represent the same function on R^infinity as catalog
    /// objects, after extension to a common dimension.
    pub fn same_as(&self, other: &CylinderFunction) -> Result<bool> {
        let n = self.base_dim.max(other.base_dim);
        Ok(self.extend(n)?.base == other.extend(n)?.base)
    }
}

/// `||f||_{M^{infty,1}(R^infinity)}`, the Sjöstrand norm of the base against
/// `g_{base_dim}`. Extending by constants does not change it.
pub fn norm_infinite(f: &CylinderFunction, w: &WindowSequence, params: &Params) -> Result<NormEstimate> {
    norm_m_infty_1(&f.base, &w.window(f.base_dim, params)?, params)
}

/// `||f - g||` computed in the larger of the two dimensions.
pub fn cauchy_distance(
    f: &CylinderFunction,
    g: &CylinderFunction,
    w: &WindowSequence,
    params: &Params,
) -> Result<NormEstimate> {
    let n = f.base_dim.max(g.base_dim);
    let (fe, ge) = (f.extend(n)?, g.extend(n)?);
    if fe.base == ge.base {
        return Ok(NormEstimate::exact(0.0, SupMethod::Analytic));
    }
    let one = Complex64::new(1.0, 0.0);
    let diff = FunctionObject::affine_combo(vec![(one, fe.base), (-one, ge.base)])?;
    norm_m_infty_1(&diff, &w.window(n, params)?, params)
}

/// The base with coordinates `k+1, ..., base_dim` set to zero, as a function
/// on R^k. For `k >= base_dim` the base is returned unchanged.
pub fn restrict(f: &CylinderFunction, k: usize, params: &Params) -> Result<FunctionObject> {
    if k == 0 {
        return Err(FresnelError::InvalidParameter("restriction needs at least one coordinate".into()));
    }
    pin_trailing(&f.base, k, params)
}

fn scaled(c: Complex64, f: FunctionObject) -> Result<FunctionObject> {
    if c == Complex64::new(1.0, 0.0) {
        Ok(f)
    } else {
        FunctionObject::affine_combo(vec![(c, f)])
    }
}

fn pin_trailing(f: &FunctionObject, k: usize, params: &Params) -> Result<FunctionObject> {
    let d = f.dim();
    if k >= d {
        return Ok(f.clone());
    }
    let out = match f {
        FunctionObject::Constant { value, .. } => FunctionObject::Constant { dim: k, value: *value },
        FunctionObject::PlaneWave { k: kv, hbar_scaled, normalized } => {
            let pw = FunctionObject::PlaneWave { k: kv[..k].to_vec(), hbar_scaled: *hbar_scaled, normalized: *normalized };
            if *normalized {
                let c = (2.0 * std::f64::consts::PI * params.hbar).powf(-((d - k) as f64) / 2.0);
                scaled(Complex64::new(c, 0.0), pw)?
            } else {
                pw
            }
        }
        FunctionObject::ComplexGaussian { z } => FunctionObject::ComplexGaussian { z: z[..k].to_vec() },
        FunctionObject::Chirp { sign, .. } => scaled(
            crate::catalog::chirp_prefactor(d - k, params.hbar),
            FunctionObject::Chirp { dim: k, sign: *sign },
        )?,
        FunctionObject::FourierMeasure(mu) => FunctionObject::FourierMeasure(mu.project(k)),
        FunctionObject::CosNorm { .. } => FunctionObject::CosNorm { dim: k },
        FunctionObject::Tensor(fs) => {
            let mut kept = Vec::new();
            let mut c = Complex64::new(1.0, 0.0);
            let mut off = 0;
            for g in fs {
                let gd = g.dim();
                if off + gd <= k {
                    kept.push(g.clone());
                } else if off < k {
                    kept.push(pin_trailing(g, k - off, params)?);
                } else {
                    c *= g.evaluate(&vec![0.0; gd], params)?;
                }
                off += gd;
            }
            scaled(c, tensorize(kept)?)?
        }
        FunctionObject::AffineCombo(ts) => FunctionObject::AffineCombo(
            ts.iter().map(|(c, g)| Ok((*c, pin_trailing(g, k, params)?))).collect::<Result<_>>()?,
        ),
        FunctionObject::Sampled(s) => {
            let s = s.clone();
            FunctionObject::sampled(k, format!("{} restricted to R^{k}", s.label), move |x: &[f64]| {
                let mut p = vec![0.0; d];
                p[..k].copy_from_slice(&x[..k]);
                s.call(&p)
            })?
        }
    };
    out.validate()?;
    Ok(out)
}

/// `L_min f = L_n(f_n)`: the Fresnel integral of the base in its own
/// dimension. Fourier transforms of atomic measures use the Parseval
/// identity, Gaussian expansions the closed form, and one-dimensional
/// remainders the phase-space quadrature with the window `g_1`.
pub fn l_min(f: &CylinderFunction, w: &WindowSequence, params: &Params) -> Result<FresnelResult> {
    params.validate()?;
    if f.base.to_measure(params).is_some() {
        return fresnel_parseval(&f.base, params);
    }
    match Expansion::from_object(&f.base, params) {
        // The closed form is the exact limit of the Gaussian-regularized values.
        Ok(_) => Ok(FresnelResult {
            value: fresnel_closed(&f.base, params)?,
            method: FresnelMethod::DirectEps,
            error_estimate: 0.0,
            trace: vec![],
        }),
        Err(FresnelError::NotClosedForm(_)) => {
            let g = w.window(f.base_dim, params)?;
            fresnel_phase_space(&f.base, &g, &g, params, None)
        }
        Err(e) => Err(e),
    }
}
