//! Named test functions and the parsing of `--f` style arguments.

use std::path::Path;

use fresnelio::catalog::{DiscreteMeasure, FunctionObject, MeasureAtom};
use fresnelio::{Complex64, Params};

use crate::report::CliError;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A corpus function with its exact Fresnel integral when one is known.
pub struct Entry {
    pub name: String,
    pub f: FunctionObject,
    pub oracle: Option<Complex64>,
}

pub const DELTA_1: [(f64, (f64, f64)); 2] = [(1.0, (0.5, 0.0)), (-3.0, (0.0, 0.25))];
pub const DELTA_2: [(f64, (f64, f64)); 3] = [(1.0, (0.5, 0.0)), (-0.5, (0.2, 0.3)), (2.0, (-0.1, 0.4))];
pub const DELTA_3: [(f64, (f64, f64)); 4] =
    [(0.0, (1.0, 0.0)), (0.5, (-0.3, 0.2)), (-1.5, (0.0, 0.1)), (2.5, (0.2, 0.0))];
const PLANE_COMBO: [(f64, (f64, f64)); 2] = [(0.8, (0.7, 0.0)), (-1.3, (0.2, -0.4))];

pub fn atoms(set: &[(f64, (f64, f64))]) -> Result<FunctionObject, CliError> {
    let atoms = set.iter().map(|(p, (a, b))| MeasureAtom { point: vec![*p], weight: c(*a, *b) }).collect();
    Ok(FunctionObject::fourier_measure(DiscreteMeasure::new(1, atoms)?)?)
}

/// Sum of `w exp(-i hbar p^2 / 2)`.
fn parseval(set: &[(f64, (f64, f64))], hbar: f64) -> Complex64 {
    set.iter().map(|(p, (a, b))| c(*a, *b) * Complex64::from_polar(1.0, -0.5 * hbar * p * p)).sum()
}

/// `(1 + i z)^(-1/2)` for `exp(-z x^2 / 2hbar)`.
fn gaussian_value(z: Complex64) -> Complex64 {
    (c(1.0, 0.0) + c(0.0, 1.0) * z).sqrt().inv()
}

pub const NAMES: [&str; 13] = [
    "constant1",
    "gaussian",
    "chirp",
    "chirp-",
    "cos-norm",
    "damped-chirp-1",
    "damped-chirp-0.1",
    "damped-chirp-0.01",
    "delta-1",
    "delta-2",
    "delta-3",
    "plane-combo",
    "modulated-gaussian",
];

/// The functions compared by the three Fresnel routes.
pub const TRIANGLE: [&str; 10] = [
    "constant1",
    "delta-1",
    "delta-2",
    "delta-3",
    "damped-chirp-1",
    "damped-chirp-0.1",
    "damped-chirp-0.01",
    "cos-norm",
    "plane-combo",
    "gaussian",
];

pub fn named(name: &str, params: &Params) -> Result<Option<Entry>, CliError> {
    let h = params.hbar;
    let (f, oracle) = match name {
        "constant1" => (FunctionObject::one(1), Some(c(1.0, 0.0))),
        "gaussian" => (FunctionObject::complex_gaussian(vec![c(1.0, 0.0)])?, Some(gaussian_value(c(1.0, 0.0)))),
        "chirp" => (FunctionObject::chirp(1, 1)?, None),
        "chirp-" => (FunctionObject::chirp(1, -1)?, None),
        "cos-norm" => (FunctionObject::cos_norm(1)?, Some(Complex64::from_polar(1.0, -0.5 * h))),
        "damped-chirp-1" | "damped-chirp-0.1" | "damped-chirp-0.01" => {
            let eps: f64 = name["damped-chirp-".len()..].parse().expect("literal");
            let z = c(eps, 1.0);
            (FunctionObject::complex_gaussian(vec![z])?, Some(gaussian_value(z)))
        }
        "delta-1" => (atoms(&DELTA_1)?, Some(parseval(&DELTA_1, h))),
        "delta-2" => (atoms(&DELTA_2)?, Some(parseval(&DELTA_2, h))),
        "delta-3" => (atoms(&DELTA_3)?, Some(parseval(&DELTA_3, h))),
        "plane-combo" => {
            let terms = PLANE_COMBO
                .iter()
                .map(|(k, (a, b))| Ok((c(*a, *b), FunctionObject::plane_wave(vec![*k], true, false)?)))
                .collect::<Result<Vec<_>, CliError>>()?;
            // exp(i k x / hbar) integrates to exp(-i k^2 / 2hbar)
            let v = PLANE_COMBO.iter().map(|(k, (a, b))| c(*a, *b) * Complex64::from_polar(1.0, -k * k / (2.0 * h))).sum();
            (FunctionObject::affine_combo(terms)?, Some(v))
        }
        "modulated-gaussian" => {
            // exp(-(1 - 0.5i) x^2 / 2hbar) plus a narrower bump, for the propagator checks
            let a = FunctionObject::complex_gaussian(vec![c(1.0, -0.5)])?;
            let b = FunctionObject::complex_gaussian(vec![c(3.0, 0.0)])?;
            let f = FunctionObject::affine_combo(vec![(c(1.0, 0.0), a), (c(0.0, 0.5), b)])?;
            let v = gaussian_value(c(1.0, -0.5)) + c(0.0, 0.5) * gaussian_value(c(3.0, 0.0));
            (f, Some(v))
        }
        _ => return Ok(None),
    };
    Ok(Some(Entry { name: name.to_string(), f, oracle }))
}

/// A catalog name, inline JSON, or a path to a JSON function spec.
pub fn parse_function(arg: &str, params: &Params) -> Result<Entry, CliError> {
    let arg = arg.trim();
    if arg.starts_with('{') {
        let f = FunctionObject::from_json(arg)?;
        return Ok(Entry { name: "inline".into(), f, oracle: None });
    }
    if let Some(e) = named(arg, params)? {
        return Ok(e);
    }
    let path = Path::new(arg);
    if path.extension().is_some_and(|e| e == "json") || path.is_file() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read function spec {}: {e}", path.display())))?;
        let f = FunctionObject::from_json(&text)?;
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| arg.to_string());
        return Ok(Entry { name, f, oracle: None });
    }
    Err(CliError::Usage(format!("unknown function `{arg}`; expected one of {} or a JSON spec", NAMES.join(", "))))
}

/// `--f corpus` expands to the triangle corpus.
pub fn parse_functions(arg: &str, params: &Params) -> Result<Vec<Entry>, CliError> {
    if arg.trim() == "corpus" {
        TRIANGLE.iter().map(|n| Ok(named(n, params)?.expect("corpus names are registered"))).collect()
    } else {
        Ok(vec![parse_function(arg, params)?])
    }
}
