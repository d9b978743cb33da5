//! Finite-dimensional Fresnel integrals
//! `L(f) = lim_{eps -> 0} (2 pi i hbar)^(-d/2) int exp(i |x|^2 / 2hbar) f(x) phi(eps x) dx`
//! and the operator norms of `L` on Sjöstrand classes.

mod direct;
mod mollifier;
mod phase_space;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use direct::{fresnel_direct, regularized_value, DirectOptions};
pub use mollifier::{Mollifier, RegularizerSchedule};
pub use phase_space::{fresnel_fourier_side, fresnel_phase_space, fresnel_w_infty_1, PhaseGrid};
pub(crate) use phase_space::companion_form;

use crate::catalog::{chirp_prefactor, DiscreteMeasure, FunctionObject};
use crate::error::{FresnelError, Result};
use crate::expansion::{Atom, Expansion};
use crate::params::Params;
use crate::sequence::RealSequence;
use crate::window::{GaussianWindow, Window};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FresnelMethod {
    DirectEps,
    PhaseSpace,
    ParsevalMeasure,
    /// Phase-space integral of the Fourier transform of a Sjöstrand-class member.
    WInfty1,
}

impl FresnelMethod {
    pub fn name(&self) -> &'static str {
        match self {
            FresnelMethod::DirectEps => "direct_eps",
            FresnelMethod::PhaseSpace => "phase_space",
            FresnelMethod::ParsevalMeasure => "parseval_measure",
            FresnelMethod::WInfty1 => "w_infty_1",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FresnelResult {
    pub value: Complex64,
    pub method: FresnelMethod,
    pub error_estimate: f64,
    /// `(eps or grid step, value)` pairs, coarsest first.
    pub trace: Vec<(f64, Complex64)>,
}

/// `int exp(-i hbar |p|^2 / 2) dmu(p)` for a finite atomic measure.
pub fn fresnel_parseval_measure(mu: &DiscreteMeasure, params: &Params) -> Result<Complex64> {
    params.validate()?;
    mu.validate()?;
    Ok(mu
        .atoms
        .iter()
        .map(|a| {
            let p2: f64 = a.point.iter().map(|p| p * p).sum();
            a.weight * Complex64::from_polar(1.0, -0.5 * params.hbar * p2)
        })
        .sum())
}

/// Parseval route packaged as a result, for objects that are Fourier
/// transforms of atomic measures.
pub fn fresnel_parseval(f: &FunctionObject, params: &Params) -> Result<FresnelResult> {
    f.validate()?;
    let mu = f.to_measure(params).ok_or_else(|| {
        FresnelError::NotClosedForm(format!("{} is not the Fourier transform of an atomic measure", f.kind_name()))
    })?;
    Ok(FresnelResult {
        value: fresnel_parseval_measure(&mu, params)?,
        method: FresnelMethod::ParsevalMeasure,
        error_estimate: 0.0,
        trace: vec![],
    })
}

/// Exact Fresnel integral of a Gaussian expansion.
///
/// Each atom `c exp(-a y^2 / 2hbar + b y / hbar)` contributes
/// `c (2 pi i hbar)^(-1/2) (2 pi hbar / (a - i))^(1/2) exp(b^2 / 2hbar (a - i))`,
/// the limit of the Gaussian-regularized value, provided `a != i`.
pub fn fresnel_closed(f: &FunctionObject, params: &Params) -> Result<Complex64> {
    params.validate()?;
    f.validate()?;
    let e = Expansion::closed(f, params)?;
    fresnel_of_expansion(&e, params.hbar)
}

pub(crate) fn fresnel_of_expansion(e: &Expansion, hbar: f64) -> Result<Complex64> {
    let pre = chirp_prefactor(1, hbar);
    let mut acc = Complex64::new(0.0, 0.0);
    for t in &e.terms {
        let mut v = t.weight;
        for a in &t.atoms {
            v *= match *a {
                Atom::Gauss { amp, a, b } => {
                    let big = a - Complex64::i();
                    if big.norm() < 1e-14 {
                        return Err(FresnelError::Divergent { partial: f64::INFINITY });
                    }
                    amp * pre * (Complex64::new(2.0 * PI * hbar, 0.0) / big).sqrt() * (b * b / (2.0 * hbar * big)).exp()
                }
                Atom::Delta { amp, at } => amp * pre * Complex64::from_polar(1.0, at * at / (2.0 * hbar)),
            };
        }
        acc += v;
    }
    Ok(acc)
}

/// `||L_n|| = prod_j (q_j^2 + 1)^(1/4)` on the Sjöstrand class normed by `g_q`.
pub fn op_norm_ln(q: &[f64]) -> Result<f64> {
    if let Some(bad) = q.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(FresnelError::InvalidParameter(format!("window weights must be positive, got {bad}")));
    }
    Ok((0.25 * q.iter().map(|v| (v * v).ln_1p()).sum::<f64>()).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witnesses {
    /// `|<gamma_alpha, g_q>|^(-1)`, an upper bound on the norm.
    pub upper: f64,
    /// `|L(f_eps)| / ||f_eps||`, a lower bound on the norm.
    pub lower: f64,
}

/// Two-sided bounds on `||L_n||` from the chirped windows
/// `gamma_alpha = exp(-(alpha - i)|y|^2 / 2hbar)` and the test functions
/// `f_eps = exp(-(eps + i)|y|^2 / 2hbar)`.
pub fn op_norm_witnesses(q: &[f64], alpha: f64, eps: f64, params: &Params) -> Result<Witnesses> {
    params.validate()?;
    if !(alpha > 0.0 && alpha.is_finite() && eps > 0.0 && eps.is_finite()) {
        return Err(FresnelError::InvalidParameter(format!("alpha and eps must be positive, got {alpha}, {eps}")));
    }
    let g = Window::gaussian(&GaussianWindow::new(q.to_vec(), params.hbar)?);
    let gamma = Window::chirped(alpha, q.len(), params.hbar)?;
    let upper = 1.0 / g.inner(&gamma).norm();
    // |L(f_eps)| = eps^(-n/2), and per coordinate the Sjöstrand norm of f_eps
    // against g_q is (s^2 + 1)^(1/4) ((1 + eps s) / (eps (s^2 + 1)))^(1/2)
    // with s = q + eps. The ratio is formed in logs to survive tiny eps.
    let log_lower: f64 = q
        .iter()
        .map(|qj| {
            let s = qj + eps;
            0.25 * (s * s).ln_1p() - 0.5 * (eps * s).ln_1p()
        })
        .sum();
    Ok(Witnesses { upper, lower: log_lower.exp() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformBound {
    /// `||L_n_max||`, the largest partial product.
    pub partial: f64,
    /// `sup_n ||L_n||` bounded by `partial * exp(tail / 4)`; infinite when no tail bound exists.
    pub sup_estimate: f64,
    /// Upper bound on `sum_{j > n_max} q_j^2`.
    pub tail: Option<f64>,
    pub convergent: bool,
}

/// Uniform bound on `||L_n||` over `n` for window weights `q_j`. Since
/// `ln(1 + t) <= t`, the factors beyond `n_max` contribute at most
/// `exp(tail / 4)`.
pub fn uniform_bound_check(q: &RealSequence, n_max: usize) -> Result<UniformBound> {
    q.validate()?;
    if n_max == 0 {
        return Err(FresnelError::InvalidParameter("n_max must be at least 1".into()));
    }
    let log_partial: f64 = 0.25 * (1..=n_max).map(|j| q.term(j).powi(2).ln_1p()).sum::<f64>();
    let partial = log_partial.exp();
    let tail = q.tail_bound(2.0, n_max);
    let sup_estimate = match tail {
        Some(t) => (log_partial + 0.25 * t).exp(),
        None => f64::INFINITY,
    };
    Ok(UniformBound { partial, sup_estimate, tail, convergent: tail.is_some() })
}

/// The three independent evaluations of one Fresnel integral.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Triangle {
    pub direct: FresnelResult,
    pub phase_space: FresnelResult,
    /// Parseval for Fourier transforms of atomic measures, otherwise the
    /// Fourier-side phase-space route.
    pub third: FresnelResult,
}

impl Triangle {
    pub fn results(&self) -> [&FresnelResult; 3] {
        [&self.direct, &self.phase_space, &self.third]
    }

    /// Largest pairwise difference relative to `max(1, |value|)`.
    pub fn max_disagreement(&self) -> f64 {
        let r = self.results();
        let scale = r.iter().map(|v| v.value.norm()).fold(1.0, f64::max);
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in i + 1..3 {
                worst = worst.max((r[i].value - r[j].value).norm() / scale);
            }
        }
        worst
    }
}

/// Runs the direct regularized limit (halving schedule of depth 16), the
/// phase-space route with the unit window and the chirped companion
/// `gamma_{1/2}`, and the third route on a one-dimensional `f`.
pub fn fresnel_triangle(f: &FunctionObject, mollifier: Mollifier, params: &Params) -> Result<Triangle> {
    let d = f.dim();
    let g = Window::unit(d, params.hbar)?;
    let gamma = Window::chirped(0.5, d, params.hbar)?;
    let direct = fresnel_direct(f, &RegularizerSchedule::halving(mollifier, 16), params, &DirectOptions::default())?;
    let phase_space = fresnel_phase_space(f, &g, &gamma, params, None)?;
    let third = match f.to_measure(params) {
        Some(_) => fresnel_parseval(f, params)?,
        None => fresnel_fourier_side(f, &g, &gamma, params)?,
    };
    Ok(Triangle { direct, phase_space, third })
}
