//! Fresnel integrals of functions in the Sjöstrand class, computed through
//! Gabor phase-space analysis, with the sharp operator norm of the Fresnel
//! functional, the free Schrödinger propagator, and the projective-limit
//! construction on R^infinity.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod error;
pub mod expansion;
pub mod fresnel;
pub mod gabor;
pub mod params;
pub mod phase_form;
pub mod projective;
pub mod quadrature;
pub mod schrodinger;
pub mod sequence;
pub mod window;

pub use catalog::{tensorize, DiscreteMeasure, FunctionObject, MeasureAtom};
pub use error::{FresnelError, Result};
pub use num_complex::Complex64;
pub use params::Params;
pub use quadrature::GridSpec;
pub use window::{GaussianWindow, Window};
