//! The free Schrödinger evolution `u(t) = exp(i hbar t Delta / 2) f`, i.e.
//! `u(t, x) = (2 pi i hbar t)^(-d/2) int exp(i |y|^2 / 2 hbar t) f(x - y) dy`,
//! and its sharp norm from the Sjöstrand class to bounded functions.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::catalog::FunctionObject;
use crate::error::{FresnelError, Result};
use crate::expansion::{Atom, Expansion, Term};
use crate::fresnel::op_norm_witnesses;
use crate::params::Params;
use crate::quadrature::GridSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagatorSpec {
    pub t: f64,
    pub params: Params,
    /// Periodic sampling lattice for the multiplier path, one dimension.
    pub grid: GridSpec,
}

impl PropagatorSpec {
    pub fn new(t: f64, params: Params, grid: GridSpec) -> Result<Self> {
        let s = PropagatorSpec { t, params, grid };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !self.t.is_finite() {
            return Err(FresnelError::InvalidParameter(format!("time must be finite, got {}", self.t)));
        }
        GridSpec::new(self.grid.radius, self.grid.step)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolutionPath {
    ClosedForm,
    Multiplier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolvedField {
    pub x: Vec<f64>,
    pub u: Vec<Complex64>,
    pub path: EvolutionPath,
}

impl EvolvedField {
    pub fn sup_norm(&self) -> f64 {
        self.u.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Discrete `L^2` norm with the lattice step as weight.
    pub fn l2_norm(&self) -> f64 {
        let h = if self.x.len() > 1 { self.x[1] - self.x[0] } else { 1.0 };
        (self.u.iter().map(|v| v.norm_sqr()).sum::<f64>() * h).sqrt()
    }
}

/// `(1 + i t a)^(1/2)` on the branch reached continuously from `t = 0`.
fn focal_root(w: Complex64, t: f64) -> Complex64 {
    if w.im == 0.0 && w.re < 0.0 && t < 0.0 {
        Complex64::new(0.0, -(-w.re).sqrt())
    } else {
        w.sqrt()
    }
}

/// Exact evolution of one atom `c exp(-a y^2 / 2hbar + b y / hbar)`: the
/// parameters become `a / (1 + i t a)` and `b / (1 + i t a)`, and the
/// amplitude picks up `(1 + i t a)^(-1/2) exp(i t b^2 / 2hbar (1 + i t a))`.
fn evolve_atom(atom: &Atom, t: f64, hbar: f64) -> Result<Atom> {
    match *atom {
        Atom::Gauss { amp, a, b } => {
            let w = Complex64::new(1.0, 0.0) + Complex64::i() * t * a;
            if w.norm() < 1e-14 {
                return Err(FresnelError::InvalidParameter(format!("t = {t} is a focal time of the input")));
            }
            let amp = amp / focal_root(w, t) * (Complex64::i() * t * b * b / (2.0 * hbar * w)).exp();
            Ok(Atom::Gauss { amp, a: a / w, b: b / w })
        }
        Atom::Delta { .. } => Err(FresnelError::NotClosedForm("evolution of a Dirac mass".into())),
    }
}

/// Exact evolution of a Gaussian expansion.
pub fn evolve_expansion(e: &Expansion, t: f64, hbar: f64) -> Result<Expansion> {
    let terms = e
        .terms
        .iter()
        .map(|term| {
            Ok(Term {
                weight: term.weight,
                atoms: term.atoms.iter().map(|a| evolve_atom(a, t, hbar)).collect::<Result<Vec<_>>>()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Expansion { dim: e.dim, terms })
}

/// `u(t, x)` at one point for catalog objects with a Gaussian expansion.
pub fn evolve_closed(f: &FunctionObject, t: f64, x: &[f64], params: &Params) -> Result<Complex64> {
    params.validate()?;
    let e = Expansion::from_object(f, params)?;
    if x.len() != e.dim {
        return Err(FresnelError::DimensionMismatch { expected: e.dim, got: x.len() });
    }
    evolve_expansion(&e, t, params.hbar)?.eval(x, params)
}

/// Applies the multiplier `exp(-i hbar t kappa^2 / 2)` to samples on the
/// periodic lattice of `spec.grid`.
///
/// The samples must be resolved by the lattice: their spectrum has to fall
/// below `1e-12` of its peak before the Nyquist frequency, and the phase of
/// the multiplier may change by at most `pi` between neighbouring bins over
/// the occupied band. Otherwise the result is a `Resolution` error.
pub fn evolve_samples(samples: &[Complex64], spec: &PropagatorSpec) -> Result<Vec<Complex64>> {
    spec.validate()?;
    let n = samples.len();
    if n != 2 * spec.grid.half_count() + 1 {
        return Err(FresnelError::DimensionMismatch { expected: 2 * spec.grid.half_count() + 1, got: n });
    }
    let h = spec.grid.step;
    let period = n as f64 * h;
    let dk = 2.0 * PI / period;
    let mut planner = FftPlanner::<f64>::new();
    let mut buf = samples.to_vec();
    planner.plan_fft_forward(n).process(&mut buf);

    let freq = |m: usize| if 2 * m < n { m as f64 * dk } else { (m as f64 - n as f64) * dk };
    let peak = buf.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); n]);
    }
    let occupied: Vec<usize> = (0..n).filter(|&m| buf[m].norm() > 1e-12 * peak).collect();
    let band = occupied.iter().map(|&m| freq(m).abs()).fold(0.0, f64::max);
    let nyquist = PI / h;
    if band >= nyquist - 1.5 * dk {
        return Err(FresnelError::Resolution { h, limit: PI / band.max(1e-300) * 0.5 });
    }
    let hbar = spec.params.hbar;
    let per_bin = hbar * spec.t.abs() * band * dk;
    if per_bin > PI {
        // The lattice is too short for the distance travelled by the band edge.
        return Err(FresnelError::ShortPeriod { period, needed: 2.0 * hbar * spec.t.abs() * band });
    }
    for (m, v) in buf.iter_mut().enumerate() {
        let k = freq(m);
        *v *= Complex64::from_polar(1.0 / n as f64, -0.5 * hbar * spec.t * k * k);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    Ok(buf)
}

/// `u(t, .)` on the lattice of `spec.grid` for a one-dimensional input.
///
/// Inputs with a Gaussian expansion are evolved exactly; anything else is
/// sampled and pushed through the discrete multiplier.
pub fn evolve_free(f: &FunctionObject, spec: &PropagatorSpec) -> Result<EvolvedField> {
    spec.validate()?;
    f.validate()?;
    if f.dim() != 1 {
        return Err(FresnelError::DimensionMismatch { expected: 1, got: f.dim() });
    }
    let x = spec.grid.nodes(0.0);
    let hbar = spec.params.hbar;
    match Expansion::from_object(f, &spec.params) {
        Ok(e) => {
            let ev = evolve_expansion(&e, spec.t, hbar)?;
            let u = x.iter().map(|&xi| ev.eval(&[xi], &spec.params)).collect::<Result<Vec<_>>>()?;
            Ok(EvolvedField { x, u, path: EvolutionPath::ClosedForm })
        }
        Err(FresnelError::NotClosedForm(_)) => evolve_multiplier(f, spec),
        Err(e) => Err(e),
    }
}

/// Multiplier path for any one-dimensional input, closed form or not.
pub fn evolve_multiplier(f: &FunctionObject, spec: &PropagatorSpec) -> Result<EvolvedField> {
    spec.validate()?;
    f.validate()?;
    let x = spec.grid.nodes(0.0);
    let samples: Vec<Complex64> = x.iter().map(|&xi| f.evaluate(&[xi], &spec.params)).collect::<Result<_>>()?;
    let u = evolve_samples(&samples, spec)?;
    Ok(EvolvedField { x, u, path: EvolutionPath::Multiplier })
}

/// `prod_j (t^2 q_j^2 + 1)^(1/4)`, the norm of `exp(i hbar t Delta / 2)` from
/// the Sjöstrand class normed by `g_q` to bounded functions.
pub fn sharp_norm_formula(t: f64, q: &[f64]) -> Result<f64> {
    if let Some(bad) = q.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(FresnelError::InvalidParameter(format!("window weights must be positive, got {bad}")));
    }
    if !t.is_finite() {
        return Err(FresnelError::InvalidParameter(format!("time must be finite, got {t}")));
    }
    Ok((0.25 * q.iter().map(|v| (t * t * v * v).ln_1p()).sum::<f64>()).exp())
}

/// Ratio `||u(t)||_inf / ||f_eps||` for `f_eps = exp(-(eps + i)|y|^2 / 2 hbar t)`.
///
/// Evolving for time `t` is a Fresnel integral with `hbar t` in place of
/// `hbar`, and the Sjöstrand norm with window `g_q` at `hbar` equals the one
/// with window `g_{tq}` at `hbar t`. The ratio is therefore the lower
/// witness of the Fresnel functional at `(hbar t, t q)`.
pub fn sharp_norm_witness(t: f64, q: &[f64], eps: f64, params: &Params) -> Result<f64> {
    params.validate()?;
    if t == 0.0 || !t.is_finite() {
        return Err(FresnelError::InvalidParameter(format!("time must be finite and nonzero, got {t}")));
    }
    let tq: Vec<f64> = q.iter().map(|v| v * t.abs()).collect();
    let scaled = Params::new(params.hbar * t.abs())?;
    Ok(op_norm_witnesses(&tq, 1.0, eps, &scaled)?.lower)
}
