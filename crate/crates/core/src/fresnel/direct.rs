//! The regularized Fresnel integral
//! `T_eps(f) = (2 pi i hbar)^(-d/2) int exp(i |x|^2 / 2hbar) f(x) phi(eps x) dx`
//! and its limit as `eps -> 0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::mollifier::{Mollifier, RegularizerSchedule};
use super::{FresnelMethod, FresnelResult};
use crate::catalog::{chirp_prefactor, FunctionObject};
use crate::error::{FresnelError, Result};
use crate::expansion::{Atom, Expansion};
use crate::gabor::local_frequency;
use crate::params::Params;
use crate::quadrature::richardson_even;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectOptions {
    /// Relative size allowed for the last change of the extrapolated limit.
    pub tol: f64,
    /// Node budget of one quadrature; coarser levels only are used beyond it.
    pub max_nodes: usize,
    /// Number of Richardson elimination steps.
    pub depth: usize,
    /// Radius beyond which `f` itself is negligible, for quadrature inputs
    /// whose decay the catalog cannot see.
    pub radius: Option<f64>,
}

impl Default for DirectOptions {
    fn default() -> Self {
        DirectOptions { tol: 1e-6, max_nodes: 1 << 23, depth: 4, radius: None }
    }
}

/// `T_eps(f)` for the given cut-off, or `None` when the quadrature would
/// exceed the node budget.
pub fn regularized_value(
    f: &FunctionObject,
    mollifier: Mollifier,
    eps: f64,
    params: &Params,
    max_nodes: usize,
) -> Result<Option<Complex64>> {
    regularized_value_within(f, mollifier, eps, params, max_nodes, None)
}

fn regularized_value_within(
    f: &FunctionObject,
    mollifier: Mollifier,
    eps: f64,
    params: &Params,
    max_nodes: usize,
    radius: Option<f64>,
) -> Result<Option<Complex64>> {
    if mollifier == Mollifier::Gaussian {
        if let Ok(e) = Expansion::from_object(f, params) {
            return Ok(Some(gaussian_regularized(&e, eps, params.hbar)));
        }
    }
    let factors = f.factors();
    if factors.len() > 1 {
        let mut acc = Complex64::new(1.0, 0.0);
        for g in &factors {
            match regularized_value_within(g, mollifier, eps, params, max_nodes, radius)? {
                Some(v) => acc *= v,
                None => return Ok(None),
            }
        }
        return Ok(Some(acc));
    }
    if let FunctionObject::AffineCombo(ts) = f {
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, g) in ts {
            match regularized_value_within(g, mollifier, eps, params, max_nodes, radius)? {
                Some(v) => acc += c * v,
                None => return Ok(None),
            }
        }
        return Ok(Some(acc));
    }
    match f.dim() {
        1 => Ok(quad_1d(f, mollifier, eps, params.hbar, max_nodes, radius)),
        2 => Ok(quad_2d(f, mollifier, eps, params.hbar, max_nodes, radius)),
        d => Err(FresnelError::NotClosedForm(format!(
            "regularized quadrature of a non-separable function in dimension {d}"
        ))),
    }
}

/// Exact regularized integral of a Gaussian expansion with the Gaussian cut-off.
fn gaussian_regularized(e: &Expansion, eps: f64, hbar: f64) -> Complex64 {
    let pre = chirp_prefactor(1, hbar);
    let two_pi_h = Complex64::new(2.0 * PI * hbar, 0.0);
    e.terms
        .iter()
        .map(|t| {
            t.atoms.iter().fold(t.weight, |acc, a| match *a {
                Atom::Gauss { amp, a, b } => {
                    let big = a - Complex64::i() + hbar * eps * eps;
                    acc * amp * pre * (two_pi_h / big).sqrt() * (b * b / (2.0 * hbar * big)).exp()
                }
                Atom::Delta { .. } => unreachable!("object expansions contain no Dirac masses"),
            })
        })
        .sum()
}

fn decay_radius(f: &FunctionObject, hbar: f64) -> f64 {
    match f {
        FunctionObject::ComplexGaussian { z } => {
            let m = z.iter().map(|v| v.re).fold(f64::INFINITY, f64::min);
            if m > 0.0 {
                (2.0 * hbar * 40.0 / m).sqrt()
            } else {
                f64::INFINITY
            }
        }
        _ => f64::INFINITY,
    }
}

fn axis(f: &FunctionObject, mollifier: Mollifier, eps: f64, hbar: f64, radius: Option<f64>) -> (f64, f64) {
    let r = (mollifier.support_radius() / eps)
        .min(decay_radius(f, hbar))
        .min(radius.unwrap_or(f64::INFINITY))
        .max(10.0 * hbar.sqrt());
    let omega = r / hbar + local_frequency(f, r, hbar);
    (r, 2.0 * PI / (1.15 * omega + 2.0))
}

fn quad_1d(f: &FunctionObject, m: Mollifier, eps: f64, hbar: f64, max_nodes: usize, radius: Option<f64>) -> Option<Complex64> {
    let (r, h) = axis(f, m, eps, hbar, radius);
    let n = (r / h).ceil() as i64;
    if (2 * n + 1) as usize > max_nodes {
        return None;
    }
    let h = r / n as f64;
    let sum: Complex64 = (-n..=n)
        .into_par_iter()
        .map(|j| {
            let y = j as f64 * h;
            let w = if j.abs() == n { 0.5 } else { 1.0 };
            Complex64::from_polar(w * m.profile(eps * y), y * y / (2.0 * hbar)) * f.eval_unchecked(&[y], hbar)
        })
        .collect::<Vec<Complex64>>()
        .into_iter()
        .sum();
    Some(chirp_prefactor(1, hbar) * sum * h)
}

fn quad_2d(f: &FunctionObject, m: Mollifier, eps: f64, hbar: f64, max_nodes: usize, radius: Option<f64>) -> Option<Complex64> {
    let (r, h) = axis(f, m, eps, hbar, radius);
    let n = (r / h).ceil() as i64;
    let side = (2 * n + 1) as usize;
    if side.saturating_mul(side) > max_nodes {
        return None;
    }
    let h = r / n as f64;
    let sum: Complex64 = (-n..=n)
        .into_par_iter()
        .map(|j1| {
            let y1 = j1 as f64 * h;
            let w1 = if j1.abs() == n { 0.5 } else { 1.0 };
            let mut row = Complex64::new(0.0, 0.0);
            for j0 in -n..=n {
                let y0 = j0 as f64 * h;
                let w0 = if j0.abs() == n { 0.5 } else { 1.0 };
                let amp = w0 * w1 * m.profile(eps * y0) * m.profile(eps * y1);
                row += Complex64::from_polar(amp, (y0 * y0 + y1 * y1) / (2.0 * hbar))
                    * f.eval_unchecked(&[y0, y1], hbar);
            }
            row
        })
        .collect::<Vec<Complex64>>()
        .into_iter()
        .sum();
    Some(chirp_prefactor(2, hbar) * sum * h * h)
}

/// Fresnel integral as the limit of regularized integrals along the schedule.
///
/// Gaussian expansions with the Gaussian cut-off are integrated exactly at
/// every `eps`; everything else goes through trapezoid sums, which stop at
/// the first level that would exceed the node budget. The limit comes from
/// Richardson extrapolation in `eps^2`. When the extrapolants have not
/// settled to `tol`, the result is `NonConvergent` with the full trace.
pub fn fresnel_direct(
    f: &FunctionObject,
    schedule: &RegularizerSchedule,
    params: &Params,
    opts: &DirectOptions,
) -> Result<FresnelResult> {
    params.validate()?;
    f.validate()?;
    schedule.validate()?;
    let mut trace: Vec<(f64, Complex64)> = Vec::new();
    for &eps in &schedule.eps {
        match regularized_value_within(f, schedule.mollifier, eps, params, opts.max_nodes, opts.radius)? {
            Some(v) => trace.push((eps, v)),
            None => break,
        }
    }
    if trace.len() < 3 {
        return Err(FresnelError::NotClosedForm(format!(
            "only {} regularization levels fit the node budget",
            trace.len()
        )));
    }
    let eps: Vec<f64> = trace.iter().map(|t| t.0).collect();
    let vals: Vec<Complex64> = trace.iter().map(|t| t.1).collect();
    if vals.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(FresnelError::NonConvergent { trace });
    }
    let extrapolants: Vec<Complex64> = (2..vals.len())
        .map(|j| richardson_even(&eps[..=j], &vals[..=j], opts.depth.min(j)).0)
        .collect();
    // Converged when the extrapolants contract over the last four iterates
    // and the final step is below tolerance.
    let last = *extrapolants.last().unwrap();
    let scale = last.norm().max(1.0);
    let steps: Vec<f64> = extrapolants.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let recent = &steps[steps.len().saturating_sub(3)..];
    let floor = 1e-3 * opts.tol * scale;
    let contracting = recent.windows(2).all(|w| w[1] <= w[0].max(floor));
    let spread = recent.last().copied().unwrap_or(f64::INFINITY);
    if !(contracting && spread <= opts.tol * scale) {
        return Err(FresnelError::NonConvergent { trace });
    }
    let (value, err) = richardson_even(&eps, &vals, opts.depth);
    let n = vals.len();
    let raw_gap = (vals[n - 1] - vals[n - 2]).norm();
    Ok(FresnelResult { value, method: FresnelMethod::DirectEps, error_estimate: err.max(raw_gap).max(spread), trace })
}
