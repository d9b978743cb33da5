//! Phase-space formulas for composites `h(k.x)` on R^infinity: the dual
//! pairing that gives their Fresnel integrals, the inversion formula behind
//! it, the windowed plane-wave kernel, and the envelope `Phi_{m,B}` that
//! dominates the dilated chirps uniformly in `n`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::FunctionObject;
use crate::error::{FresnelError, Result};
use crate::expansion::Expansion;
use crate::fresnel::{companion_form, regularized_value, Mollifier};
use crate::gabor::{dual_pairing_expansions, stft_expansion};
use crate::params::Params;
use crate::quadrature::{integrate_form_2d, trapezoid_weight, GridSpec};
use crate::sequence::RealSequence;
use crate::window::Window;

fn one_dim(g: &Window, params: &Params) -> Result<()> {
    g.check(1, params)
}

/// `<h^, G_lambda>_*` with `G_lambda(y) = (2 pi hbar)^(-1/2) exp(i lambda^2 y^2 / 2hbar)`,
/// computed as `<g, g>^(-1) int int V_g h^ conj(V_g G_lambda) dx dxi`.
///
/// This is `L_n(h(k.x))` whenever `lambda = ||pi_n k||`, and `h(0)` at
/// `lambda = 0`. `h^` must have a closed form, so `h` is a Gaussian
/// combination or the Fourier transform of an atomic measure.
pub fn composite_dual_value(h: &FunctionObject, lambda: f64, g: &Window, params: &Params) -> Result<Complex64> {
    params.validate()?;
    h.validate()?;
    if h.dim() != 1 {
        return Err(FresnelError::DimensionMismatch { expected: 1, got: h.dim() });
    }
    one_dim(g, params)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(FresnelError::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
    }
    let eh = Expansion::closed(h, params)?.fourier(params)?;
    let g_lambda = FunctionObject::affine_combo(vec![(
        Complex64::new((2.0 * PI * params.hbar).powf(-0.5), 0.0),
        FunctionObject::complex_gaussian(vec![Complex64::new(0.0, -lambda * lambda)])?,
    )])?;
    let ef = Expansion::from_object(&g_lambda, params)?;
    dual_pairing_expansions(&eh, &ef, g, g)
}

/// `V_g (F_+ o lambda)(x, xi)` through the dilation identity
/// `V_g (f o lambda)(x, xi) = lambda^(-1) V_{g o lambda^(-1)} f(lambda x, xi / lambda)`.
pub fn dilated_chirp_stft(lambda: f64, g: &Window, x: f64, xi: f64, params: &Params) -> Result<Complex64> {
    one_dim(g, params)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(FresnelError::InvalidParameter(format!("lambda must be > 0, got {lambda}")));
    }
    let e = Expansion::from_object(&FunctionObject::chirp(1, 1)?, params)?;
    Ok(stft_expansion(&e, &g.dilate(lambda), &[lambda * x], &[xi / lambda]) / lambda)
}

/// `h(t) = <gamma, g>^(-1) int int V_g h^(x, xi) W_gamma psi_t(x, xi) dx dxi`,
/// where `psi_t(y) = (2 pi hbar)^(-d/2) exp(i t.y / hbar)` and `W_gamma` is
/// the companion transform.
pub fn inversion_from_fourier(
    h: &FunctionObject,
    t: &[f64],
    g: &Window,
    gamma: &Window,
    params: &Params,
) -> Result<Complex64> {
    params.validate()?;
    h.validate()?;
    let d = h.dim();
    if t.len() != d {
        return Err(FresnelError::DimensionMismatch { expected: d, got: t.len() });
    }
    g.check(d, params)?;
    gamma.check(d, params)?;
    let overlap = gamma.inner(g);
    if overlap.norm() < 1e-300 {
        return Err(FresnelError::InvalidParameter("windows with <gamma, g> = 0".into()));
    }
    let hbar = params.hbar;
    let eh = Expansion::closed(h, params)?.fourier(params)?;
    let psi = Expansion::from_object(&FunctionObject::plane_wave(t.to_vec(), true, true)?, params)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for th in &eh.terms {
        for tp in &psi.terms {
            let mut v = th.weight * tp.weight;
            for j in 0..d {
                let form = th.atoms[j].stft_form(&g.factors[j], hbar).mul(&companion_form(
                    &tp.atoms[j],
                    &gamma.factors[j],
                    hbar,
                ));
                v *= integrate_form_2d(&form)?;
            }
            acc += v;
        }
    }
    Ok(acc / overlap)
}

/// Quadrature grids for the right-hand side of the windowed plane-wave kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppendixAGrids {
    pub lambda: GridSpec,
    pub w: GridSpec,
}

impl Default for AppendixAGrids {
    fn default() -> Self {
        AppendixAGrids { lambda: GridSpec { radius: 10.0, step: 0.01 }, w: GridSpec { radius: 30.0, step: 0.01 } }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AppendixAValue {
    /// The regularized Fresnel integral over R^n, when the direct quadrature
    /// fits in the node budget.
    pub lhs: Option<Complex64>,
    pub rhs: Complex64,
}

/// Both sides of
/// `(2 pi i hbar)^(-n/2) int exp(i|y|^2 / 2hbar) conj(V_g psi_{-k.y}(x, xi)) phi(eps y) dy
///  = exp(i x xi / hbar) (2 pi hbar)^(-1) int int exp(-i |(lambda + x) k + eps hbar w|^2 / 2hbar)
///    phi^(w) exp(i lambda xi / hbar) g(lambda) dw dlambda`.
///
/// The right side is a nested quadrature: the `w` integral factors over the
/// coordinates of `k`. The left side goes through the direct regularized
/// quadrature on R^n.
#[allow(clippy::too_many_arguments)]
pub fn appendix_a_kernel(
    k: &[f64],
    x: f64,
    xi: f64,
    eps: f64,
    mollifier: Mollifier,
    g: &Window,
    grids: &AppendixAGrids,
    params: &Params,
    max_nodes: usize,
) -> Result<AppendixAValue> {
    params.validate()?;
    one_dim(g, params)?;
    if k.is_empty() {
        return Err(FresnelError::InvalidParameter("k needs at least one coordinate".into()));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(FresnelError::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let hbar = params.hbar;
    let lam = grids.lambda.nodes(0.0);
    let ws = grids.w.nodes(0.0);
    let kmax = k.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let k2: f64 = k.iter().map(|v| v * v).sum();
    let reach = grids.lambda.radius + x.abs();
    let freq_w = eps * (reach * kmax + eps * hbar * grids.w.radius);
    if grids.w.step * freq_w > 1.0 {
        return Err(FresnelError::Resolution { h: grids.w.step, limit: 1.0 / freq_w });
    }
    let freq_l = (reach * k2 + xi.abs()) / hbar;
    if grids.lambda.step * freq_l > 1.0 {
        return Err(FresnelError::Resolution { h: grids.lambda.step, limit: 1.0 / freq_l });
    }
    let dens: Vec<f64> = ws.iter().map(|w| mollifier.fourier_density(*w)).collect();
    let nw = ws.len();
    let j_of = |c: f64| -> Complex64 {
        ws.iter()
            .enumerate()
            .map(|(m, w)| {
                let s = c + eps * hbar * w;
                Complex64::from_polar(dens[m] * trapezoid_weight(m, nw, grids.w.step), -s * s / (2.0 * hbar))
            })
            .sum()
    };
    let nl = lam.len();
    let inner: Complex64 = lam
        .par_iter()
        .enumerate()
        .map(|(m, &l)| {
            let gl = g.eval_factor(0, l);
            if gl.norm() < 1e-300 {
                return Complex64::new(0.0, 0.0);
            }
            let prod: Complex64 = k.iter().map(|kj| j_of((l + x) * kj)).product();
            prod * gl * Complex64::from_polar(trapezoid_weight(m, nl, grids.lambda.step), l * xi / hbar)
        })
        .collect::<Vec<Complex64>>()
        .into_iter()
        .sum();
    let rhs = Complex64::from_polar(1.0 / (2.0 * PI * hbar), x * xi / hbar) * inner;

    let ghat = g.fourier();
    let kv = k.to_vec();
    let norm = (2.0 * PI * hbar).powf(-0.5);
    let integrand = FunctionObject::sampled(k.len(), "windowed plane-wave kernel", move |y: &[f64]| {
        let alpha: f64 = kv.iter().zip(y).map(|(a, b)| a * b).sum();
        Complex64::from_polar(norm, x * (xi + alpha) / hbar) * ghat.eval_factor(0, -alpha - xi)
    })?;
    let lhs = regularized_value(&integrand, mollifier, eps, params, max_nodes)?;
    Ok(AppendixAValue { lhs, rhs })
}

/// The `eps -> 0` limit of the kernel for a centred Gaussian window
/// `g(l) = c exp(-a l^2 / 2hbar)`:
/// `exp(i x xi / hbar) (2 pi hbar)^(-1) int exp(-i |k|^2 (l + x)^2 / 2hbar) exp(i l xi / hbar) g(l) dl`.
pub fn appendix_a_limit(k: &[f64], x: f64, xi: f64, g: &Window, params: &Params) -> Result<Complex64> {
    params.validate()?;
    one_dim(g, params)?;
    let hbar = params.hbar;
    let kk: f64 = k.iter().map(|v| v * v).sum();
    let f = g.factors[0];
    let big_a = f.a + Complex64::new(0.0, kk);
    let big_b = Complex64::new(0.0, xi - kk * x);
    let gauss = (Complex64::new(2.0 * PI * hbar, 0.0) / big_a).sqrt() * (big_b * big_b / (2.0 * hbar * big_a)).exp();
    Ok(Complex64::from_polar(1.0 / (2.0 * PI * hbar), (x * xi - 0.5 * kk * x * x) / hbar) * f.amp * gauss)
}

/// `Phi_{m,B}(x, xi)`: 1 on the cone `|xi| <= B^2 |x|` and
/// `(1 + B^(-2) min(|xi - B^2 x|, |xi + B^2 x|)^2)^(-m)` outside.
pub fn phi_dominator(m: u32, b: f64, x: f64, xi: f64) -> f64 {
    let b2 = b * b;
    if xi.abs() <= b2 * x.abs() {
        return 1.0;
    }
    let d = (xi - b2 * x).abs().min((xi + b2 * x).abs());
    (1.0 + d * d / b2).powi(-(m as i32))
}

/// `Gamma(m - 1/2) / Gamma(m)` for integer `m >= 1`.
fn gamma_ratio(m: u32) -> f64 {
    (1..m).fold(PI.sqrt(), |acc, j| acc * (j as f64 - 0.5) / j as f64)
}

/// `int Phi_{m,B}(x, xi) dxi = 2 B^2 |x| + B sqrt(pi) Gamma(m - 1/2) / Gamma(m)`.
pub fn phi_tail_integral(m: u32, b: f64, x: f64) -> Result<f64> {
    if m == 0 || !(b > 0.0) {
        return Err(FresnelError::InvalidParameter(format!("need m >= 1 and B > 0, got m={m}, B={b}")));
    }
    Ok(2.0 * b * b * x.abs() + b * PI.sqrt() * gamma_ratio(m))
}

/// The smallest `C` with `int Phi_{m,B}(x, .) <= C <x>` for all `x`, namely
/// `(4 B^4 + c^2)^(1/2)` where `c` is the value of the integral at `x = 0`.
pub fn phi_tail_constant(m: u32, b: f64) -> Result<f64> {
    let c = phi_tail_integral(m, b, 0.0)?;
    Ok((4.0 * b.powi(4) + c * c).sqrt())
}

/// `phi_tail_constant(2, 1) = (4 + pi^2 / 4)^(1/2)`.
pub const PHI_TAIL_CONSTANT_M2_B1: f64 = 2.543_108_550_627_035;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DominatorRow {
    pub n: usize,
    pub lambda: f64,
    /// `max |V_g (F_+ o lambda_n)| / Phi_{m,B}` over the sample.
    pub max_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominatorReport {
    pub b: f64,
    pub m: u32,
    pub rows: Vec<DominatorRow>,
    /// One constant valid for every tested `n`.
    pub constant: f64,
    /// `(max - min) / min` of the per-`n` maxima.
    pub spread: f64,
    pub stable: bool,
}

/// Samples `|V_g (F_+ o ||pi_n k||)(x, xi)| / Phi_{m,B}(x, xi)` with
/// `B = ||k||_{l^2}` on the square `grid x grid` and reports the maxima
/// for each `n`. The maxima count as stable when they spread by at most 5%.
pub fn dominator_check(
    k: &RealSequence,
    n_list: &[usize],
    m: u32,
    g: &Window,
    grid: &GridSpec,
    params: &Params,
) -> Result<DominatorReport> {
    params.validate()?;
    k.validate()?;
    one_dim(g, params)?;
    if n_list.is_empty() || m == 0 {
        return Err(FresnelError::InvalidParameter("need at least one n and m >= 1".into()));
    }
    let n_max = *n_list.iter().max().unwrap();
    let tail = k
        .tail_bound(2.0, n_max)
        .ok_or_else(|| FresnelError::InvalidParameter("k needs a square-summable tail certificate".into()))?;
    let b = (k.partial_sum(2.0, n_max) + tail).sqrt();
    let nodes = grid.nodes(0.0);
    let rows = n_list
        .iter()
        .map(|&n| {
            let lambda = k.partial_sum(2.0, n).sqrt();
            if lambda == 0.0 {
                return Err(FresnelError::InvalidParameter(format!("||pi_n k|| = 0 at n = {n}")));
            }
            let max_ratio = nodes
                .par_iter()
                .map(|&x| {
                    nodes.iter().try_fold(0.0f64, |acc, &xi| {
                        let v = dilated_chirp_stft(lambda, g, x, xi, params)?.norm();
                        Ok(acc.max(v / phi_dominator(m, b, x, xi)))
                    })
                })
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            Ok(DominatorRow { n, lambda, max_ratio })
        })
        .collect::<Result<Vec<_>>>()?;
    let hi = rows.iter().map(|r| r.max_ratio).fold(0.0, f64::max);
    let lo = rows.iter().map(|r| r.max_ratio).fold(f64::INFINITY, f64::min);
    let spread = (hi - lo) / lo;
    Ok(DominatorReport { b, m, rows, constant: hi, spread, stable: spread <= 0.05 })
}
