//! Python bindings. Functions are described by the same JSON specs the CLI
//! accepts, e.g. `{"dim": 1, "kind": "ComplexGaussian", "params": {"z": [[1, 0]]}}`.

use fresnelio::fresnel::{
    fresnel_direct, fresnel_parseval, fresnel_phase_space, fresnel_triangle, op_norm_ln as core_op_norm_ln,
    op_norm_witnesses as core_witnesses, uniform_bound_check, DirectOptions, FresnelResult, Mollifier,
    RegularizerSchedule,
};
use fresnelio::gabor::{norm_m_infty_1, stft_closed};
use fresnelio::projective::{
    default_schedule, l_prime as core_l_prime, l_topological as core_l_topological, CauchyOptions, CylinderSequence,
    SequenceFunction, WindowSequence,
};
use fresnelio::schrodinger;
use fresnelio::sequence::RealSequence;
use fresnelio::{Complex64, FresnelError, FunctionObject, GaussianWindow, Params, Window};
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(fresnelio_py, NumericalError, PyRuntimeError, "A computation did not converge or could not be resolved.");
create_exception!(fresnelio_py, CauchyCheckFailed, NumericalError, "A sequence failed the finite Cauchy check.");

fn to_py(e: FresnelError) -> PyErr {
    match e {
        FresnelError::InvalidParameter(_)
        | FresnelError::DimensionMismatch { .. }
        | FresnelError::UnboundedGaussian { .. }
        | FresnelError::Config(_) => PyValueError::new_err(e.to_string()),
        FresnelError::CauchyCheckFailed { .. } => CauchyCheckFailed::new_err(e.to_string()),
        _ => NumericalError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for fresnelio::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn params(hbar: f64) -> PyResult<Params> {
    Params::new(hbar).py()
}

fn function(spec: &str) -> PyResult<FunctionObject> {
    FunctionObject::from_json(spec).py()
}

fn window(q: Option<Vec<f64>>, dim: usize, hbar: f64) -> PyResult<Window> {
    match q {
        None => Window::unit(dim, hbar).py(),
        Some(q) => Ok(Window::gaussian(&GaussianWindow::new(q, hbar).py()?)),
    }
}

fn mollifier(name: &str) -> PyResult<Mollifier> {
    match name {
        "gaussian" => Ok(Mollifier::Gaussian),
        "sech" => Ok(Mollifier::Sech),
        other => Err(PyValueError::new_err(format!("unknown mollifier {other:?}"))),
    }
}

fn result_dict<'py>(py: Python<'py>, r: &FresnelResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("value", r.value)?;
    d.set_item("method", r.method.name())?;
    d.set_item("error_estimate", r.error_estimate)?;
    d.set_item("trace", r.trace.clone())?;
    Ok(d)
}

/// Fresnel integral of `spec`. `method` is "direct", "phase_space",
/// "parseval" or "all"; "all" returns a dict of the three routes plus
/// their largest relative disagreement.
#[pyfunction]
#[pyo3(signature = (spec, method = "direct", hbar = 1.0, mollifier_name = "gaussian"))]
fn fresnel<'py>(py: Python<'py>, spec: &str, method: &str, hbar: f64, mollifier_name: &str) -> PyResult<Bound<'py, PyDict>> {
    let p = params(hbar)?;
    let f = function(spec)?;
    let m = mollifier(mollifier_name)?;
    let d = f.dim();
    match method {
        "direct" => {
            let r = py.detach(|| fresnel_direct(&f, &RegularizerSchedule::halving(m, 16), &p, &DirectOptions::default())).py()?;
            result_dict(py, &r)
        }
        "phase_space" => {
            let g = Window::unit(d, hbar).py()?;
            let gamma = Window::chirped(0.5, d, hbar).py()?;
            let r = py.detach(|| fresnel_phase_space(&f, &g, &gamma, &p, None)).py()?;
            result_dict(py, &r)
        }
        "parseval" => result_dict(py, &fresnel_parseval(&f, &p).py()?),
        "all" => {
            let t = py.detach(|| fresnel_triangle(&f, m, &p)).py()?;
            let out = PyDict::new(py);
            out.set_item("direct", result_dict(py, &t.direct)?)?;
            out.set_item("phase_space", result_dict(py, &t.phase_space)?)?;
            out.set_item("third", result_dict(py, &t.third)?)?;
            out.set_item("disagreement", t.max_disagreement())?;
            Ok(out)
        }
        other => Err(PyValueError::new_err(format!("unknown method {other:?}"))),
    }
}

/// Closed-form short-time Fourier transform at `(x, xi)`; `q` selects the
/// Gaussian window weights, the L2-normalized unit window when omitted.
#[pyfunction]
#[pyo3(signature = (spec, x, xi, q = None, hbar = 1.0))]
fn stft(spec: &str, x: Vec<f64>, xi: Vec<f64>, q: Option<Vec<f64>>, hbar: f64) -> PyResult<Complex64> {
    let p = params(hbar)?;
    let f = function(spec)?;
    let g = window(q, f.dim(), hbar)?;
    stft_closed(&f, &g, &x, &xi, &p).py()
}

/// Sjöstrand norm as `(value, lower, upper)`.
#[pyfunction]
#[pyo3(signature = (spec, q, hbar = 1.0))]
fn norm(spec: &str, q: Vec<f64>, hbar: f64) -> PyResult<(f64, f64, f64)> {
    let p = params(hbar)?;
    let f = function(spec)?;
    let g = window(Some(q), f.dim(), hbar)?;
    let e = norm_m_infty_1(&f, &g, &p).py()?;
    Ok((e.value, e.lower, e.upper))
}

#[pyfunction]
fn op_norm_ln(q: Vec<f64>) -> PyResult<f64> {
    core_op_norm_ln(&q).py()
}

/// `(upper, lower)` witnesses of the operator norm.
#[pyfunction]
#[pyo3(signature = (q, alpha, eps, hbar = 1.0))]
fn op_norm_witnesses(q: Vec<f64>, alpha: f64, eps: f64, hbar: f64) -> PyResult<(f64, f64)> {
    let w = core_witnesses(&q, alpha, eps, &params(hbar)?).py()?;
    Ok((w.upper, w.lower))
}

/// `(sup_estimate, convergent)` for geometric weights `q_j = first * ratio^(j-1)`.
#[pyfunction]
#[pyo3(signature = (first, ratio, n_max = 64))]
fn uniform_bound(first: f64, ratio: f64, n_max: usize) -> PyResult<(f64, bool)> {
    let b = uniform_bound_check(&RealSequence::geometric(first, ratio), n_max).py()?;
    Ok((b.sup_estimate, b.convergent))
}

#[pyfunction]
fn sharp_norm_formula(t: f64, q: Vec<f64>) -> PyResult<f64> {
    schrodinger::sharp_norm_formula(t, &q).py()
}

#[pyfunction]
#[pyo3(signature = (t, q, eps, hbar = 1.0))]
fn sharp_norm_witness(t: f64, q: Vec<f64>, eps: f64, hbar: f64) -> PyResult<f64> {
    schrodinger::sharp_norm_witness(t, &q, eps, &params(hbar)?).py()
}

/// Sequential limit over restrictions; `function` is a JSON sequence
/// function such as `{"kind": "gaussian_l1", "r": {"type": "geometric", "first": 0.5, "ratio": 0.5}}`.
#[pyfunction]
#[pyo3(signature = (function, hbar = 1.0, schedule = None, tol = 1e-10))]
fn l_prime<'py>(
    py: Python<'py>,
    function: &str,
    hbar: f64,
    schedule: Option<Vec<usize>>,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let f: SequenceFunction = serde_json::from_str(function).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let p = params(hbar)?;
    let sched = schedule.unwrap_or_else(default_schedule);
    let r = py.detach(|| core_l_prime(&f, &p, &sched, tol)).py()?;
    let d = PyDict::new(py);
    d.set_item("value", r.value)?;
    d.set_item("trace", r.trace)?;
    d.set_item("error_estimate", r.error_estimate)?;
    d.set_item("certified", r.certified)?;
    Ok(d)
}

/// Closure of the minimal functional along a cylinder sequence, with window
/// weights `q_j = 2^-(j-1)`. Raises `CauchyCheckFailed` for sequences that
/// are not Cauchy.
#[pyfunction]
#[pyo3(signature = (sequence, hbar = 1.0, tol = 1e-4, max_n = 32))]
fn l_topological(py: Python<'_>, sequence: &str, hbar: f64, tol: f64, max_n: usize) -> PyResult<(Complex64, f64)> {
    let seq: CylinderSequence = serde_json::from_str(sequence).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let p = params(hbar)?;
    let w = WindowSequence::new(RealSequence::geometric(1.0, 0.5)).py()?;
    let r = py.detach(|| core_l_topological(&seq, &w, &p, &CauchyOptions { tol, max_n })).py()?;
    Ok((r.value, r.error_estimate))
}

#[pymodule]
fn fresnelio_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add("CauchyCheckFailed", m.py().get_type::<CauchyCheckFailed>())?;
    m.add_function(wrap_pyfunction!(fresnel, m)?)?;
    m.add_function(wrap_pyfunction!(stft, m)?)?;
    m.add_function(wrap_pyfunction!(norm, m)?)?;
    m.add_function(wrap_pyfunction!(op_norm_ln, m)?)?;
    m.add_function(wrap_pyfunction!(op_norm_witnesses, m)?)?;
    m.add_function(wrap_pyfunction!(uniform_bound, m)?)?;
    m.add_function(wrap_pyfunction!(sharp_norm_formula, m)?)?;
    m.add_function(wrap_pyfunction!(sharp_norm_witness, m)?)?;
    m.add_function(wrap_pyfunction!(l_prime, m)?)?;
    m.add_function(wrap_pyfunction!(l_topological, m)?)?;
    Ok(())
}
