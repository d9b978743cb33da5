//! Uniform grids, composite trapezoid sums and Richardson extrapolation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FresnelError, Result};
use crate::phase_form::PhaseForm;

/// A symmetric uniform grid `center + j * step`, `|j * step| <= radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub radius: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn new(radius: f64, step: f64) -> Result<Self> {
        if !(radius > 0.0 && step > 0.0 && radius.is_finite() && step.is_finite()) {
            return Err(FresnelError::InvalidParameter(format!(
                "grid needs positive radius and step, got radius={radius} step={step}"
            )));
        }
        Ok(GridSpec { radius, step })
    }

    pub fn half_count(&self) -> usize {
        (self.radius / self.step).round() as usize
    }

    pub fn nodes(&self, center: f64) -> Vec<f64> {
        let m = self.half_count() as i64;
        (-m..=m).map(|j| center + j as f64 * self.step).collect()
    }
}

/// Composite trapezoid sum of equally spaced samples.
pub fn trapezoid(values: &[Complex64], step: f64) -> Complex64 {
    match values.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => Complex64::new(0.0, 0.0),
        n => {
            let inner: Complex64 = values[1..n - 1].iter().sum();
            (inner + (values[0] + values[n - 1]) * 0.5) * step
        }
    }
}

/// Trapezoid weights for `n` equally spaced nodes.
pub fn trapezoid_weight(j: usize, n: usize, step: f64) -> f64 {
    if j == 0 || j + 1 == n {
        0.5 * step
    } else {
        step
    }
}

/// Richardson extrapolation to `eps = 0` for samples `T(eps_j)` whose error
/// expands in even powers of `eps`. The last `depth + 1` samples are fitted
/// by a polynomial in `eps^2` (Neville's scheme), so any decreasing
/// schedule works.
///
/// Returns the extrapolated value and the gap between the two highest-order
/// estimates as an error estimate.
pub fn richardson_even(eps: &[f64], values: &[Complex64], depth: usize) -> (Complex64, f64) {
    let n = values.len().min(eps.len());
    if n == 0 {
        return (Complex64::new(0.0, 0.0), f64::INFINITY);
    }
    if n == 1 {
        return (values[0], f64::INFINITY);
    }
    let start = n.saturating_sub(depth + 1);
    let t: Vec<f64> = eps[start..n].iter().map(|e| e * e).collect();
    let mut p: Vec<Complex64> = values[start..n].to_vec();
    let m = p.len();
    // After level L, p[i] interpolates samples i-L..=i. The error estimate
    // compares the full fit with the fit that drops the coarsest sample.
    let mut second = p[m - 1];
    for level in 1..m {
        second = p[m - 1];
        for i in (level..m).rev() {
            let (ti, tj) = (t[i], t[i - level]);
            p[i] = (p[i] * tj - p[i - 1] * ti) / (tj - ti);
        }
    }
    let top = p[m - 1];
    let prev_top = second;
    (top, (top - prev_top).norm())
}

/// `int_{R^2} pref * exp(Q(x, xi)) dx dxi` by a trapezoid sum on a box sized
/// from the Gaussian envelope and a step sized from the phase gradient.
pub fn integrate_form_2d(f: &PhaseForm) -> Result<Complex64> {
    integrate_form_2d_coarse(f, 1.0)
}

/// As [`integrate_form_2d`] with both steps multiplied by `coarsen`.
pub fn integrate_form_2d_coarse(f: &PhaseForm, coarsen: f64) -> Result<Complex64> {
    let env = f.envelope().ok_or(FresnelError::Divergent { partial: f64::INFINITY })?;
    if f.pref == Complex64::new(0.0, 0.0) {
        return Ok(f.pref);
    }
    const WIDTH: f64 = 9.5;
    const MAX_AXIS: usize = 6000;
    let (cx, ck) = env.center;
    let (sx, sk) = env.sigma;
    let (wx, wk) = (WIDTH * sx, WIDTH * sk);
    let mut omega_x: f64 = 0.0;
    let mut omega_k: f64 = 0.0;
    for (x, k) in [(cx - wx, ck - wk), (cx - wx, ck + wk), (cx + wx, ck - wk), (cx + wx, ck + wk)] {
        omega_x = omega_x.max((2.0 * f.xx.im * x + f.xk.im * k + f.x.im).abs());
        omega_k = omega_k.max((2.0 * f.kk.im * k + f.xk.im * x + f.k.im).abs());
    }
    let hx = coarsen * 2.0 * std::f64::consts::PI / (omega_x + 10.0 / sx);
    let hk = coarsen * 2.0 * std::f64::consts::PI / (omega_k + 10.0 / sk);
    let nx = ((wx / hx).ceil() as usize).max(8);
    let nk = ((wk / hk).ceil() as usize).max(8);
    if 2 * nx + 1 > MAX_AXIS || 2 * nk + 1 > MAX_AXIS {
        return Err(FresnelError::NotClosedForm(format!(
            "phase-space integrand too oscillatory ({} x {} nodes)",
            2 * nx + 1,
            2 * nk + 1
        )));
    }
    let hx = wx / nx as f64;
    let hk = wk / nk as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for jk in -(nk as i64)..=(nk as i64) {
        let k = ck + jk as f64 * hk;
        let mut row = Complex64::new(0.0, 0.0);
        for jx in -(nx as i64)..=(nx as i64) {
            let x = cx + jx as f64 * hx;
            row += f.exponent(x, k).exp();
        }
        acc += row;
    }
    Ok(f.pref * acc * hx * hk)
}
