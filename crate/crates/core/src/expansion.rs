//! Finite sums of separable Gaussian-type terms.
//!
//! An [`Expansion`] writes a catalog object as `sum_t w_t prod_j a_{t,j}(y_j)`
//! where each one-dimensional atom is either a (possibly degenerate or
//! chirped) Gaussian `exp(-(a/2hbar) y^2 + (b/hbar) y)` or a Dirac mass.
//! Dirac masses only arise as Fourier transforms of plane waves.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::catalog::{chirp_prefactor, DiscreteMeasure, FunctionObject};
use crate::error::{FresnelError, Result};
use crate::params::Params;
use crate::phase_form::PhaseForm;
use crate::window::WindowFactor;

const MAX_TERMS: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Atom {
    /// `amp * exp(-(a / 2hbar) y^2 + (b / hbar) y)`, `Re a >= 0`.
    Gauss { amp: Complex64, a: Complex64, b: Complex64 },
    /// `amp * delta(y - at)`.
    Delta { amp: Complex64, at: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub weight: Complex64,
    pub atoms: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub dim: usize,
    pub terms: Vec<Term>,
}

fn cz() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn c1() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

impl Atom {
    pub fn one() -> Atom {
        Atom::Gauss { amp: c1(), a: cz(), b: cz() }
    }

    fn amp(&self) -> Complex64 {
        match self {
            Atom::Gauss { amp, .. } | Atom::Delta { amp, .. } => *amp,
        }
    }

    fn with_unit_amp(&self) -> Atom {
        match *self {
            Atom::Gauss { a, b, .. } => Atom::Gauss { amp: c1(), a, b },
            Atom::Delta { at, .. } => Atom::Delta { amp: c1(), at },
        }
    }

    /// A plane wave `exp(i beta y / hbar)` or a constant.
    pub fn is_plane_wave(&self) -> bool {
        matches!(self, Atom::Gauss { a, b, .. } if *a == cz() && b.re == 0.0)
    }

    fn key(&self) -> [u64; 5] {
        let bits = |v: f64| (v + 0.0).to_bits();
        match *self {
            Atom::Gauss { a, b, .. } => [0, bits(a.re), bits(a.im), bits(b.re), bits(b.im)],
            Atom::Delta { at, .. } => [1, bits(at), 0, 0, 0],
        }
    }

    pub fn eval(&self, y: f64, hbar: f64) -> Result<Complex64> {
        match *self {
            Atom::Gauss { amp, a, b } => Ok(amp * ((-a * y * y / 2.0 + b * y) / hbar).exp()),
            Atom::Delta { .. } => Err(FresnelError::NotClosedForm("Dirac mass has no pointwise value".into())),
        }
    }

    /// hbar-scaled Fourier transform `(2 pi hbar)^(-1/2) int exp(-i xi y / hbar) f(y) dy`.
    pub fn fourier(&self, hbar: f64) -> Result<Atom> {
        match *self {
            Atom::Gauss { amp, a, b } if a != cz() => Ok(Atom::Gauss {
                amp: amp / a.sqrt() * (b * b / (2.0 * hbar * a)).exp(),
                a: a.inv(),
                b: -Complex64::i() * b / a,
            }),
            Atom::Gauss { amp, b, .. } => {
                if b.re != 0.0 {
                    return Err(FresnelError::NotClosedForm("exponentially growing atom".into()));
                }
                Ok(Atom::Delta { amp: amp * (2.0 * PI * hbar).sqrt(), at: b.im })
            }
            Atom::Delta { amp, at } => Ok(Atom::Gauss {
                amp: amp / (2.0 * PI * hbar).sqrt(),
                a: cz(),
                b: Complex64::new(0.0, -at),
            }),
        }
    }

    /// `y -> f(-y)`.
    pub fn reflect(&self) -> Atom {
        match *self {
            Atom::Gauss { amp, a, b } => Atom::Gauss { amp, a, b: -b },
            Atom::Delta { amp, at } => Atom::Delta { amp, at: -at },
        }
    }

    /// Closed-form short-time Fourier transform against one window factor:
    /// `V(x, xi) = (2 pi hbar)^(-1/2) int exp(-i xi y / hbar) f(y) conj(w(y - x)) dy`.
    pub fn stft_form(&self, w: &WindowFactor, hbar: f64) -> PhaseForm {
        let i = Complex64::i();
        let aw = w.a.conj();
        match *self {
            Atom::Gauss { amp, a, b } => {
                let big = a + aw;
                let h = hbar;
                PhaseForm {
                    pref: amp * w.amp.conj() / big.sqrt(),
                    xx: -a * aw / (2.0 * h * big),
                    xk: -i * aw / (h * big),
                    kk: -1.0 / (2.0 * h * big),
                    x: b * aw / (h * big),
                    k: -i * b / (h * big),
                    c0: b * b / (2.0 * h * big),
                }
            }
            Atom::Delta { amp, at } => PhaseForm {
                pref: amp * w.amp.conj() / (2.0 * PI * hbar).sqrt(),
                xx: -aw / (2.0 * hbar),
                xk: cz(),
                kk: cz(),
                x: aw * at / hbar,
                k: Complex64::new(0.0, -at / hbar),
                c0: -aw * at * at / (2.0 * hbar),
            },
        }
    }
}

impl Term {
    pub fn is_plane_wave(&self) -> bool {
        self.atoms.iter().all(|a| a.is_plane_wave())
    }
}

impl Expansion {
    pub fn zero(dim: usize) -> Self {
        Expansion { dim, terms: Vec::new() }
    }

    /// Expansion of catalog kinds that are sums of Gaussian-type terms.
    /// `CosNorm` and `Sampled` are refused.
    pub fn from_object(f: &FunctionObject, params: &Params) -> Result<Self> {
        f.validate()?;
        let h = params.hbar;
        let i = Complex64::i();
        let e = match f {
            FunctionObject::Constant { dim, value } => {
                if *value == cz() {
                    Expansion::zero(*dim)
                } else {
                    Expansion { dim: *dim, terms: vec![Term { weight: *value, atoms: vec![Atom::one(); *dim] }] }
                }
            }
            FunctionObject::PlaneWave { k, hbar_scaled, normalized } => {
                let amp = if *normalized { (2.0 * PI * h).powf(-0.5) } else { 1.0 };
                let atoms = k
                    .iter()
                    .map(|kj| Atom::Gauss {
                        amp: Complex64::new(amp, 0.0),
                        a: cz(),
                        b: i * if *hbar_scaled { *kj } else { h * kj },
                    })
                    .collect();
                Expansion { dim: k.len(), terms: vec![Term { weight: c1(), atoms }] }
            }
            FunctionObject::ComplexGaussian { z } => Expansion {
                dim: z.len(),
                terms: vec![Term {
                    weight: c1(),
                    atoms: z.iter().map(|zj| Atom::Gauss { amp: c1(), a: *zj, b: cz() }).collect(),
                }],
            },
            FunctionObject::Chirp { dim, sign } => Expansion {
                dim: *dim,
                terms: vec![Term {
                    weight: c1(),
                    atoms: vec![
                        Atom::Gauss {
                            amp: chirp_prefactor(1, h),
                            a: Complex64::new(0.0, -(*sign as f64)),
                            b: cz(),
                        };
                        *dim
                    ],
                }],
            },
            FunctionObject::FourierMeasure(mu) => Expansion::from_measure(mu, params),
            FunctionObject::CosNorm { .. } | FunctionObject::Sampled(_) => {
                return Err(FresnelError::NotClosedForm(format!("{} has no Gaussian expansion", f.kind_name())))
            }
            FunctionObject::Tensor(fs) => {
                let mut acc = Expansion {
                    dim: 0,
                    terms: vec![Term { weight: c1(), atoms: Vec::new() }],
                };
                for g in fs {
                    acc = acc.tensor(&Expansion::from_object(g, params)?)?;
                }
                acc
            }
            FunctionObject::AffineCombo(ts) => {
                let mut terms = Vec::new();
                for (c, g) in ts {
                    let e = Expansion::from_object(g, params)?;
                    terms.extend(e.terms.into_iter().map(|t| Term { weight: t.weight * c, atoms: t.atoms }));
                    if terms.len() > MAX_TERMS {
                        return Err(too_large());
                    }
                }
                Expansion { dim: f.dim(), terms }
            }
        };
        Ok(e.canonical())
    }

    /// Like [`Expansion::from_object`], but objects without a Gaussian
    /// expansion that are Fourier transforms of atomic measures go through
    /// their measure.
    pub fn closed(f: &FunctionObject, params: &Params) -> Result<Self> {
        match Expansion::from_object(f, params) {
            Ok(e) => Ok(e),
            Err(err) => match f.to_measure(params) {
                Some(mu) => Ok(Expansion::from_measure(&mu, params)),
                None => Err(err),
            },
        }
    }

    pub fn from_measure(mu: &DiscreteMeasure, params: &Params) -> Self {
        let h = params.hbar;
        Expansion {
            dim: mu.dim,
            terms: mu
                .atoms
                .iter()
                .map(|a| Term {
                    weight: a.weight,
                    atoms: a
                        .point
                        .iter()
                        .map(|p| Atom::Gauss { amp: c1(), a: cz(), b: Complex64::new(0.0, h * p) })
                        .collect(),
                })
                .collect(),
        }
        .canonical()
    }

    pub fn tensor(&self, other: &Expansion) -> Result<Expansion> {
        if self.terms.len().saturating_mul(other.terms.len()) > MAX_TERMS {
            return Err(too_large());
        }
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for s in &self.terms {
            for o in &other.terms {
                terms.push(Term { weight: s.weight * o.weight, atoms: [s.atoms.clone(), o.atoms.clone()].concat() });
            }
        }
        Ok(Expansion { dim: self.dim + other.dim, terms })
    }

    /// Folds atom amplitudes into the weights, merges terms whose atoms are
    /// bit-identical and drops zero weights.
    pub fn canonical(self) -> Expansion {
        let mut index: HashMap<Vec<[u64; 5]>, usize> = HashMap::new();
        let mut terms: Vec<Term> = Vec::new();
        for t in self.terms {
            let w = t.weight * t.atoms.iter().map(|a| a.amp()).product::<Complex64>();
            let atoms: Vec<Atom> = t.atoms.iter().map(|a| a.with_unit_amp()).collect();
            let key: Vec<[u64; 5]> = atoms.iter().map(|a| a.key()).collect();
            match index.get(&key) {
                Some(&j) => terms[j].weight += w,
                None => {
                    index.insert(key, terms.len());
                    terms.push(Term { weight: w, atoms });
                }
            }
        }
        terms.retain(|t| t.weight != cz());
        Expansion { dim: self.dim, terms }
    }

    pub fn fourier(&self, params: &Params) -> Result<Expansion> {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                Ok(Term {
                    weight: t.weight,
                    atoms: t.atoms.iter().map(|a| a.fourier(params.hbar)).collect::<Result<_>>()?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Expansion { dim: self.dim, terms }.canonical())
    }

    pub fn inverse_fourier(&self, params: &Params) -> Result<Expansion> {
        let f = self.fourier(params)?;
        Ok(Expansion {
            dim: f.dim,
            terms: f
                .terms
                .into_iter()
                .map(|t| Term { weight: t.weight, atoms: t.atoms.iter().map(|a| a.reflect()).collect() })
                .collect(),
        }
        .canonical())
    }

    pub fn eval(&self, y: &[f64], params: &Params) -> Result<Complex64> {
        let mut acc = cz();
        for t in &self.terms {
            let mut v = t.weight;
            for (a, yj) in t.atoms.iter().zip(y) {
                v *= a.eval(*yj, params.hbar)?;
            }
            acc += v;
        }
        Ok(acc)
    }

    pub fn is_plane_wave_sum(&self) -> bool {
        self.terms.iter().all(|t| t.is_plane_wave())
    }
}

fn too_large() -> FresnelError {
    FresnelError::NotClosedForm(format!("expansion exceeds {MAX_TERMS} terms"))
}
