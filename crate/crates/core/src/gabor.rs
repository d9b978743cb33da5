//! Short-time Fourier transforms, Sjöstrand-class norms and the dual pairing.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::{factor_common_prefix, FunctionObject};
use crate::error::{FresnelError, Result};
use crate::expansion::{Atom, Expansion};
use crate::params::Params;
use crate::phase_form::PhaseForm;
use crate::quadrature::{integrate_form_2d, trapezoid, GridSpec};
use crate::window::Window;

/// Per-term closed-form STFT factors: `V = sum_t w_t prod_j F_{t,j}(x_j, xi_j)`.
pub type FormSum = Vec<(Complex64, Vec<PhaseForm>)>;

pub fn stft_forms(e: &Expansion, window: &Window) -> FormSum {
    e.terms
        .iter()
        .map(|t| {
            let forms = t
                .atoms
                .iter()
                .zip(&window.factors)
                .map(|(a, w)| a.stft_form(w, window.hbar))
                .collect();
            (t.weight, forms)
        })
        .collect()
}

fn eval_form_sum(forms: &FormSum, x: &[f64], xi: &[f64]) -> Complex64 {
    forms
        .iter()
        .map(|(w, fs)| {
            fs.iter()
                .enumerate()
                .fold(*w, |acc, (j, f)| acc * f.eval(x[j], xi[j]))
        })
        .sum()
}

fn check_point(dim: usize, x: &[f64], xi: &[f64]) -> Result<()> {
    for v in [x, xi] {
        if v.len() != dim {
            return Err(FresnelError::DimensionMismatch { expected: dim, got: v.len() });
        }
    }
    Ok(())
}

/// `V_g f(x, xi)` in closed form.
pub fn stft_closed(f: &FunctionObject, window: &Window, x: &[f64], xi: &[f64], params: &Params) -> Result<Complex64> {
    params.validate()?;
    window.check(f.dim(), params)?;
    check_point(f.dim(), x, xi)?;
    let e = Expansion::closed(f, params)?;
    Ok(eval_form_sum(&stft_forms(&e, window), x, xi))
}

/// `V_g f(x, xi)` for an expansion that may contain Dirac masses.
pub fn stft_expansion(e: &Expansion, window: &Window, x: &[f64], xi: &[f64]) -> Complex64 {
    eval_form_sum(&stft_forms(e, window), x, xi)
}

/// Upper bound on the local angular frequency of `f` on the ball of radius
/// `extent` around the origin. Sampled functions report zero.
pub fn local_frequency(f: &FunctionObject, extent: f64, hbar: f64) -> f64 {
    match f {
        FunctionObject::Constant { .. } | FunctionObject::Sampled(_) => 0.0,
        FunctionObject::PlaneWave { k, hbar_scaled, .. } => {
            let n = k.iter().map(|v| v * v).sum::<f64>().sqrt();
            if *hbar_scaled {
                n / hbar
            } else {
                n
            }
        }
        FunctionObject::ComplexGaussian { z } => z.iter().map(|v| v.im.abs()).fold(0.0, f64::max) * extent / hbar,
        FunctionObject::Chirp { .. } => extent / hbar,
        FunctionObject::FourierMeasure(mu) => mu
            .atoms
            .iter()
            .map(|a| a.point.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max),
        FunctionObject::CosNorm { .. } => 1.0,
        FunctionObject::Tensor(fs) => fs
            .iter()
            .map(|g| local_frequency(g, extent, hbar).powi(2))
            .sum::<f64>()
            .sqrt(),
        FunctionObject::AffineCombo(ts) => ts.iter().map(|(_, g)| local_frequency(g, extent, hbar)).fold(0.0, f64::max),
    }
}

/// `V_g f(x, xi)` by a composite trapezoid sum over a grid centred at `x`.
///
/// The grid must resolve the integrand: the step is refused when it exceeds
/// the Nyquist limit `pi / omega`, where `omega` bounds the local frequency
/// of `exp(-i xi y / hbar) f(y) conj(g(y - x))` on the grid.
pub fn stft_numeric(
    f: &FunctionObject,
    window: &Window,
    x: &[f64],
    xi: &[f64],
    grid: &GridSpec,
    params: &Params,
) -> Result<Complex64> {
    params.validate()?;
    f.validate()?;
    let d = f.dim();
    window.check(d, params)?;
    check_point(d, x, xi)?;
    let h = params.hbar;
    let xmax = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let ximax = xi.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let wfreq = window.factors.iter().map(|w| w.a.im.abs()).fold(0.0, f64::max) * grid.radius / h;
    let omega = ximax / h + local_frequency(f, xmax + grid.radius, h) + wfreq;
    if omega > 0.0 && grid.step * omega > PI {
        return Err(FresnelError::Resolution { h: grid.step, limit: PI / omega });
    }
    let factors = f.factors();
    if factors.len() > 1 {
        let mut acc = Complex64::new(1.0, 0.0);
        let mut off = 0;
        for g in &factors {
            let k = g.dim();
            let w = window.slice(off..off + k);
            acc *= stft_numeric_block(g, &w, &x[off..off + k], &xi[off..off + k], grid, h)?;
            off += k;
        }
        return Ok(acc);
    }
    stft_numeric_block(f, window, x, xi, grid, h)
}

fn stft_numeric_block(
    f: &FunctionObject,
    window: &Window,
    x: &[f64],
    xi: &[f64],
    grid: &GridSpec,
    hbar: f64,
) -> Result<Complex64> {
    let norm = (2.0 * PI * hbar).powf(-(x.len() as f64) / 2.0);
    match x.len() {
        1 => {
            let vals: Vec<Complex64> = grid
                .nodes(x[0])
                .iter()
                .map(|&y| {
                    Complex64::from_polar(1.0, -xi[0] * y / hbar)
                        * f.eval_unchecked(&[y], hbar)
                        * window.eval_factor(0, y - x[0]).conj()
                })
                .collect();
            Ok(norm * trapezoid(&vals, grid.step))
        }
        2 => {
            let ys0 = grid.nodes(x[0]);
            let ys1 = grid.nodes(x[1]);
            let rows: Vec<Complex64> = ys1
                .par_iter()
                .map(|&y1| {
                    let g1 = window.eval_factor(1, y1 - x[1]).conj();
                    let vals: Vec<Complex64> = ys0
                        .iter()
                        .map(|&y0| {
                            Complex64::from_polar(1.0, -(xi[0] * y0 + xi[1] * y1) / hbar)
                                * f.eval_unchecked(&[y0, y1], hbar)
                                * window.eval_factor(0, y0 - x[0]).conj()
                                * g1
                        })
                        .collect();
                    trapezoid(&vals, grid.step)
                })
                .collect();
            Ok(norm * trapezoid(&rows, grid.step))
        }
        d => Err(FresnelError::NotClosedForm(format!(
            "direct quadrature of a non-separable function in dimension {d}"
        ))),
    }
}

/// Checks `V_g f(x, xi) = exp(-i x.xi / hbar) V_{g^} f^(xi, -x)`, returning both sides.
pub fn stft_rotation_check(
    f: &FunctionObject,
    window: &Window,
    x: &[f64],
    xi: &[f64],
    params: &Params,
) -> Result<(Complex64, Complex64)> {
    let lhs = stft_closed(f, window, x, xi, params)?;
    let fhat = Expansion::closed(f, params)?.fourier(params)?;
    let ghat = window.fourier();
    let mx: Vec<f64> = x.iter().map(|v| -v).collect();
    let dot: f64 = x.iter().zip(xi).map(|(a, b)| a * b).sum();
    let rhs = Complex64::from_polar(1.0, -dot / params.hbar) * stft_expansion(&fhat, &ghat, xi, &mx);
    Ok((lhs, rhs))
}

/// How the inner supremum over `x` was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SupMethod {
    /// Maximized analytically; the value is exact.
    Analytic,
    /// A sum of plane-wave terms whose phases align at `x = 0`; exact.
    AlignedPhases,
    /// Sum of the moduli of the almost-periodic terms. This equals the
    /// supremum when the frequencies are rationally independent and is an
    /// upper bound otherwise.
    KroneckerEnvelope,
    /// Only the bracket `[lower, upper]` is certified.
    Bracket,
    /// Supremum over a finite grid; a lower estimate of the true value.
    Grid,
}

impl SupMethod {
    pub fn is_exact(&self) -> bool {
        matches!(self, SupMethod::Analytic | SupMethod::AlignedPhases)
    }

    fn worst(self, other: SupMethod) -> SupMethod {
        let rank = |m: SupMethod| match m {
            SupMethod::Analytic => 0,
            SupMethod::AlignedPhases => 1,
            SupMethod::KroneckerEnvelope => 2,
            SupMethod::Bracket => 3,
            SupMethod::Grid => 4,
        };
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }
}

/// A norm value together with certified lower and upper bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormEstimate {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub method: SupMethod,
}

impl NormEstimate {
    pub fn exact(value: f64, method: SupMethod) -> Self {
        NormEstimate { value, lower: value, upper: value, method }
    }

    fn times(&self, o: &NormEstimate) -> NormEstimate {
        NormEstimate {
            value: self.value * o.value,
            lower: self.lower * o.lower,
            upper: self.upper * o.upper,
            method: self.method.worst(o.method),
        }
    }

    pub fn scale(&self, c: f64) -> NormEstimate {
        NormEstimate { value: self.value * c, lower: self.lower * c, upper: self.upper * c, method: self.method }
    }
}

/// `||f||_{M^{infty,1}} = int sup_x |V_g f(x, xi)| dxi`.
///
/// Tensor products factor into products of norms. Sums are reduced by
/// pulling out common leading factors; what remains is evaluated term by
/// term from the closed-form STFTs. A non-decaying envelope, as for chirps,
/// gives `FresnelError::Divergent`.
pub fn norm_m_infty_1(f: &FunctionObject, window: &Window, params: &Params) -> Result<NormEstimate> {
    params.validate()?;
    f.validate()?;
    window.check(f.dim(), params)?;
    norm_rec(f, window, params)
}

fn norm_rec(f: &FunctionObject, window: &Window, params: &Params) -> Result<NormEstimate> {
    let factors = f.factors();
    if factors.len() > 1 {
        let mut acc = NormEstimate::exact(1.0, SupMethod::Analytic);
        let mut off = 0;
        for g in &factors {
            let k = g.dim();
            acc = acc.times(&norm_rec(g, &window.slice(off..off + k), params)?);
            off += k;
        }
        return Ok(acc);
    }
    if let FunctionObject::AffineCombo(ts) = f {
        if ts.len() == 1 {
            return Ok(norm_rec(&ts[0].1, window, params)?.scale(ts[0].0.norm()));
        }
        let g = factor_common_prefix(f);
        if matches!(g, FunctionObject::Tensor(_)) {
            return norm_rec(&g, window, params);
        }
    }
    let e = Expansion::closed(f, params)?;
    norm_of_expansion(&e, window)
}

/// `int sup_x |V| dxi` for each term separately.
fn term_envelopes(forms: &FormSum) -> Result<Vec<f64>> {
    forms
        .iter()
        .map(|(w, fs)| {
            let mut v = w.norm();
            for f in fs {
                v *= f.integral_of_sup_x()?;
            }
            Ok(v)
        })
        .collect()
}

fn phases_align(forms: &FormSum) -> bool {
    let real = |c: Complex64| c.im.abs() <= 1e-14 * c.norm().max(1e-300);
    let mut arg0: Option<Complex64> = None;
    for (w, fs) in forms {
        if !fs.iter().all(|f| real(f.kk) && real(f.k) && real(f.c0)) {
            return false;
        }
        let p = fs.iter().fold(*w, |acc, f| acc * f.pref);
        let u = p / p.norm();
        match arg0 {
            None => arg0 = Some(u),
            Some(a) => {
                if (u - a).norm() > 1e-12 {
                    return false;
                }
            }
        }
    }
    true
}

pub(crate) fn norm_of_expansion(e: &Expansion, window: &Window) -> Result<NormEstimate> {
    if e.terms.is_empty() {
        return Ok(NormEstimate::exact(0.0, SupMethod::Analytic));
    }
    let forms = stft_forms(e, window);
    let env = term_envelopes(&forms)?;
    let total: f64 = env.iter().sum();
    if e.terms.len() == 1 {
        return Ok(NormEstimate::exact(total, SupMethod::Analytic));
    }
    if e.is_plane_wave_sum() {
        if e.terms.len() == 2 || phases_align(&forms) {
            return Ok(NormEstimate::exact(total, SupMethod::AlignedPhases));
        }
        let lower = env.iter().cloned().fold(0.0, f64::max);
        return Ok(NormEstimate { value: total, lower, upper: total, method: SupMethod::KroneckerEnvelope });
    }
    // Mixed sums. Sending every coordinate of x to infinity kills the terms
    // that decay in x and leaves the almost-periodic part, whose supremum is
    // at least any of its Bohr coefficients.
    let persistent: FormSum = e
        .terms
        .iter()
        .zip(&forms)
        .filter(|(t, _)| t.is_plane_wave())
        .map(|(_, f)| f.clone())
        .collect();
    let lower = if persistent.is_empty() {
        0.0
    } else {
        let penv = term_envelopes(&persistent)?;
        if persistent.len() <= 2 || phases_align(&persistent) {
            penv.iter().sum()
        } else {
            penv.iter().cloned().fold(0.0, f64::max)
        }
    };
    Ok(NormEstimate { value: total, lower, upper: total, method: SupMethod::Bracket })
}

/// Grid evaluation of `int sup_x |V_g f| dxi` for one-dimensional functions
/// without a closed form. The STFT is computed by quadrature on `y`.
pub fn norm_m_infty_1_grid(
    f: &FunctionObject,
    window: &Window,
    x: &GridSpec,
    xi: &GridSpec,
    y: &GridSpec,
    params: &Params,
) -> Result<NormEstimate> {
    if f.dim() != 1 {
        return Err(FresnelError::NotClosedForm("grid norms are implemented for d = 1".into()));
    }
    let xs = x.nodes(0.0);
    let xis = xi.nodes(0.0);
    let sups: Vec<f64> = xis
        .par_iter()
        .map(|&k| {
            xs.iter()
                .map(|&p| stft_numeric(f, window, &[p], &[k], y, params).map(|v| v.norm()))
                .try_fold(0.0f64, |m, v| v.map(|v| m.max(v)))
        })
        .collect::<Result<_>>()?;
    let peak = sups.iter().cloned().fold(0.0, f64::max);
    let edge = sups[0].max(*sups.last().unwrap());
    let vals: Vec<Complex64> = sups.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    let total = trapezoid(&vals, xi.step).re;
    if edge > 1e-8 * peak.max(1e-300) {
        return Err(FresnelError::Divergent { partial: total });
    }
    Ok(NormEstimate { value: total, lower: total, upper: f64::INFINITY, method: SupMethod::Grid })
}

/// `||f||_{M^{1,infty}} = sup_xi int |V_g f(x, xi)| dx`.
pub fn norm_m_1_infty(f: &FunctionObject, window: &Window, params: &Params) -> Result<NormEstimate> {
    params.validate()?;
    f.validate()?;
    window.check(f.dim(), params)?;
    let factors = f.factors();
    if factors.len() > 1 {
        let mut acc = NormEstimate::exact(1.0, SupMethod::Analytic);
        let mut off = 0;
        for g in &factors {
            let k = g.dim();
            acc = acc.times(&norm_m_1_infty(g, &window.slice(off..off + k), params)?);
            off += k;
        }
        return Ok(acc);
    }
    let e = Expansion::closed(f, params)?;
    let forms = stft_forms(&e, window);
    let per_term: Vec<f64> = forms
        .iter()
        .map(|(w, fs)| {
            let mut v = w.norm();
            for f in fs {
                v *= f.sup_of_integral_x()?;
            }
            Ok(v)
        })
        .collect::<Result<_>>()?;
    let total: f64 = per_term.iter().sum();
    if per_term.len() <= 1 {
        Ok(NormEstimate::exact(total, SupMethod::Analytic))
    } else {
        Ok(NormEstimate { value: total, lower: 0.0, upper: total, method: SupMethod::Bracket })
    }
}

/// `<h, f>_* = <g, gamma>^(-1) int int V_gamma h conj(V_g f) dx dxi`.
///
/// Each product of closed-form STFT factors is integrated over its
/// two-dimensional phase space by a trapezoid sum.
pub fn dual_pairing(
    h: &FunctionObject,
    f: &FunctionObject,
    g: &Window,
    gamma: &Window,
    params: &Params,
) -> Result<Complex64> {
    params.validate()?;
    let d = h.dim();
    if f.dim() != d {
        return Err(FresnelError::DimensionMismatch { expected: d, got: f.dim() });
    }
    g.check(d, params)?;
    gamma.check(d, params)?;
    let eh = Expansion::closed(h, params)?;
    let ef = Expansion::closed(f, params)?;
    dual_pairing_expansions(&eh, &ef, g, gamma)
}

pub(crate) fn dual_pairing_expansions(eh: &Expansion, ef: &Expansion, g: &Window, gamma: &Window) -> Result<Complex64> {
    let norm = g.inner(gamma);
    if norm.norm() < 1e-300 {
        return Err(FresnelError::InvalidParameter("windows with <g, gamma> = 0".into()));
    }
    let fh = stft_forms(eh, gamma);
    let ff = stft_forms(ef, g);
    let mut acc = Complex64::new(0.0, 0.0);
    for (wh, ah) in &fh {
        for (wf, af) in &ff {
            let mut v = wh * wf.conj();
            for (p, q) in ah.iter().zip(af) {
                v *= integrate_form_2d(&p.mul(&q.conj()))?;
            }
            acc += v;
        }
    }
    Ok(acc / norm)
}

/// True when every atom of every term is a Gaussian-type factor.
pub fn has_no_dirac(e: &Expansion) -> bool {
    e.terms.iter().all(|t| t.atoms.iter().all(|a| matches!(a, Atom::Gauss { .. })))
}
