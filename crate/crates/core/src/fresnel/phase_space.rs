//! The Fresnel integral as a phase-space integral,
//! `<gamma, g>^(-1) int int V_g F_+(x, xi) W_gamma f(x, xi) dx dxi`,
//! where `W_gamma f(x, xi) = (2 pi hbar)^(-d/2) int exp(i xi.y / hbar) f(y) gamma(y - x) dy`.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{FresnelMethod, FresnelResult};
use crate::catalog::{chirp_prefactor, FunctionObject};
use crate::error::{FresnelError, Result};
use crate::expansion::{Atom, Expansion};
use crate::gabor::norm_of_expansion;
use crate::params::Params;
use crate::phase_form::PhaseForm;
use crate::quadrature::{integrate_form_2d, trapezoid_weight, GridSpec};
use crate::window::{Window, WindowFactor};

/// Grids for the quadrature route, used when `f` has no closed-form STFT.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseGrid {
    pub x: GridSpec,
    pub xi: GridSpec,
    /// Support of the window around `x` for the inner `y` integral.
    pub y: GridSpec,
}

impl Default for PhaseGrid {
    fn default() -> Self {
        PhaseGrid {
            x: GridSpec { radius: 12.0, step: 0.04 },
            xi: GridSpec { radius: 12.0, step: 0.04 },
            y: GridSpec { radius: 10.0, step: 0.04 },
        }
    }
}

fn chirp_atom(hbar: f64) -> Atom {
    Atom::Gauss { amp: chirp_prefactor(1, hbar), a: Complex64::new(0.0, -1.0), b: Complex64::new(0.0, 0.0) }
}

/// The companion transform `W_gamma` of one atom, as a phase form.
pub(crate) fn companion_form(a: &Atom, gamma: &WindowFactor, hbar: f64) -> PhaseForm {
    let conj = WindowFactor { amp: gamma.amp.conj(), a: gamma.a.conj() };
    a.stft_form(&conj, hbar).flip_xi()
}

fn atom_key(a: &Atom) -> [u64; 5] {
    let b = |v: f64| (v + 0.0).to_bits();
    match *a {
        Atom::Gauss { amp, a, b: bb } => [b(amp.re) ^ b(amp.im).rotate_left(7), b(a.re), b(a.im), b(bb.re), b(bb.im)],
        Atom::Delta { amp, at } => [b(amp.re) ^ b(amp.im).rotate_left(7), b(at), 1, 0, 0],
    }
}

/// Phase-space integral for an expansion (Dirac masses allowed). Returns the
/// value and the change when every grid is coarsened by a third.
pub(crate) fn phase_space_expansion(
    e: &Expansion,
    g: &Window,
    gamma: &Window,
    hbar: f64,
) -> Result<(Complex64, f64)> {
    let overlap = gamma.inner(g);
    if overlap.norm() < 1e-300 {
        return Err(FresnelError::InvalidParameter("windows with <gamma, g> = 0".into()));
    }
    let fplus = chirp_atom(hbar);
    let mut cache: HashMap<(usize, [u64; 5]), Complex64> = HashMap::new();
    let mut acc = Complex64::new(0.0, 0.0);
    for t in &e.terms {
        let mut v = t.weight;
        for (j, a) in t.atoms.iter().enumerate() {
            let key = (j, atom_key(a));
            let val = match cache.get(&key) {
                Some(v) => *v,
                None => {
                    let form = fplus.stft_form(&g.factors[j], hbar).mul(&companion_form(a, &gamma.factors[j], hbar));
                    let v = integrate_form_2d(&form)?;
                    cache.insert(key, v);
                    v
                }
            };
            v *= val;
        }
        acc += v;
    }
    // The trapezoid sums converge spectrally; a coarse check on the first
    // term bounds the quadrature error from above.
    let err = match e.terms.first() {
        Some(t) => {
            let mut fine = t.weight;
            let mut coarse = t.weight;
            for (j, a) in t.atoms.iter().enumerate() {
                let form = fplus.stft_form(&g.factors[j], hbar).mul(&companion_form(a, &gamma.factors[j], hbar));
                fine *= integrate_form_2d(&form)?;
                coarse *= crate::quadrature::integrate_form_2d_coarse(&form, 1.5)?;
            }
            (fine - coarse).norm() / overlap.norm()
        }
        None => 0.0,
    };
    Ok((acc / overlap, err))
}

/// Phase-space route for one-dimensional functions without a closed-form
/// STFT. The companion transform is evaluated on the grid by quadrature.
fn phase_space_grid(f: &FunctionObject, g: &Window, gamma: &Window, grid: &PhaseGrid, hbar: f64) -> Result<Complex64> {
    let xs = grid.x.nodes(0.0);
    let xis = grid.xi.nodes(0.0);
    let hy = grid.y.step;
    let my = grid.y.half_count() as i64;
    let ny = xis.len();
    let fplus = chirp_atom(hbar).stft_form(&g.factors[0], hbar);
    let norm = (2.0 * PI * hbar).powf(-0.5);
    let nx = xs.len();
    let total: Complex64 = xs
        .par_iter()
        .enumerate()
        .map(|(ix, &x)| {
            // W_gamma f(x, xi_k) for all k, by accumulating rotating phases.
            let mut w = vec![Complex64::new(0.0, 0.0); ny];
            let base = (x / hy).round() as i64;
            for m in (base - my)..=(base + my) {
                let y = m as f64 * hy;
                let coef = f.eval_unchecked(&[y], hbar) * gamma.eval_factor(0, y - x) * hy;
                if coef == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let mut z = coef * Complex64::from_polar(1.0, xis[0] * y / hbar);
                let rot = Complex64::from_polar(1.0, grid.xi.step * y / hbar);
                for slot in w.iter_mut() {
                    *slot += z;
                    z *= rot;
                }
            }
            let wx = trapezoid_weight(ix, nx, grid.x.step);
            w.iter()
                .enumerate()
                .map(|(k, v)| fplus.eval(x, xis[k]) * v * norm * trapezoid_weight(k, ny, grid.xi.step) * wx)
                .sum::<Complex64>()
        })
        .collect::<Vec<Complex64>>()
        .into_iter()
        .sum();
    Ok(total / gamma.inner(g))
}

/// Fresnel integral of `f` through its phase-space representation.
///
/// Closed-form STFTs are used whenever `f` has a Gaussian expansion; the
/// product with `V_g F_+` is then integrated by tensorized trapezoid sums.
/// Otherwise `f` must be one-dimensional and `grid` drives a quadrature for
/// the companion transform.
pub fn fresnel_phase_space(
    f: &FunctionObject,
    g: &Window,
    gamma: &Window,
    params: &Params,
    grid: Option<&PhaseGrid>,
) -> Result<FresnelResult> {
    params.validate()?;
    f.validate()?;
    g.check(f.dim(), params)?;
    gamma.check(f.dim(), params)?;
    match Expansion::from_object(f, params) {
        Ok(e) => {
            norm_of_expansion(&e, g)?;
            let (value, err) = phase_space_expansion(&e, g, gamma, params.hbar)?;
            Ok(FresnelResult { value, method: FresnelMethod::PhaseSpace, error_estimate: err, trace: vec![] })
        }
        Err(FresnelError::NotClosedForm(_)) if f.dim() == 1 => {
            let grid = grid.copied().unwrap_or_default();
            let fine = phase_space_grid(f, g, gamma, &grid, params.hbar)?;
            let coarse_grid = PhaseGrid {
                x: GridSpec { radius: grid.x.radius, step: grid.x.step * 2.0 },
                xi: GridSpec { radius: grid.xi.radius, step: grid.xi.step * 2.0 },
                y: GridSpec { radius: grid.y.radius, step: grid.y.step * 2.0 },
            };
            let coarse = phase_space_grid(f, g, gamma, &coarse_grid, params.hbar)?;
            Ok(FresnelResult {
                value: fine,
                method: FresnelMethod::PhaseSpace,
                error_estimate: (fine - coarse).norm(),
                trace: vec![(coarse_grid.x.step, coarse), (grid.x.step, fine)],
            })
        }
        Err(e) => Err(e),
    }
}

/// Fresnel integral of `f = F u` for `u` in the Sjöstrand class, where `F`
/// is the hbar-scaled Fourier transform. `u` is given, `f` is not.
pub fn fresnel_w_infty_1(
    u: &FunctionObject,
    g: &Window,
    gamma: &Window,
    params: &Params,
) -> Result<FresnelResult> {
    params.validate()?;
    u.validate()?;
    g.check(u.dim(), params)?;
    gamma.check(u.dim(), params)?;
    let e = Expansion::closed(u, params)?;
    norm_of_expansion(&e, g)?;
    let fe = e.fourier(params)?;
    let (value, err) = phase_space_expansion(&fe, g, gamma, params.hbar)?;
    Ok(FresnelResult { value, method: FresnelMethod::WInfty1, error_estimate: err, trace: vec![] })
}

/// The same route when `f` itself is given: the Sjöstrand-class preimage
/// `u = F^(-1) f` is formed analytically from the Gaussian expansion of `f`.
pub fn fresnel_fourier_side(f: &FunctionObject, g: &Window, gamma: &Window, params: &Params) -> Result<FresnelResult> {
    params.validate()?;
    f.validate()?;
    g.check(f.dim(), params)?;
    gamma.check(f.dim(), params)?;
    let u = Expansion::closed(f, params)?.inverse_fourier(params)?;
    norm_of_expansion(&u, g)?;
    let (value, err) = phase_space_expansion(&u.fourier(params)?, g, gamma, params.hbar)?;
    Ok(FresnelResult { value, method: FresnelMethod::WInfty1, error_estimate: err, trace: vec![] })
}
