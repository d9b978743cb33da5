//! One function per subcommand. Each returns a `Report` whose checks decide
//! the exit code.

use fresnelio::fresnel::{
    fresnel_direct, fresnel_fourier_side, fresnel_parseval, fresnel_phase_space, fresnel_triangle, op_norm_ln,
    op_norm_witnesses, DirectOptions, FresnelResult, Mollifier, RegularizerSchedule,
};
use fresnelio::gabor::{norm_m_infty_1, norm_m_infty_1_grid, stft_closed, stft_numeric};
use fresnelio::projective::{
    appendix_a_kernel, appendix_a_limit, cauchy_distance, composite_dual_value, default_schedule, dominator_check,
    l_prime, l_topological, norm_infinite, phi_tail_constant, phi_tail_integral, AppendixAGrids, CauchyOptions,
    CylinderSequence, SequenceFunction, WindowSequence,
};
use fresnelio::schrodinger::{evolve_free, evolve_multiplier, sharp_norm_formula, sharp_norm_witness, PropagatorSpec};
use fresnelio::sequence::RealSequence;
use fresnelio::{Complex64, FresnelError, FunctionObject, GaussianWindow, GridSpec, Params, Window};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::args::*;
use crate::corpus::{self, Entry};
use crate::report::{cjson, cnum, num, CliError, Report, Table};

pub fn run(e: &Experiment, g: &Globals) -> Result<Report, CliError> {
    match e {
        Experiment::Stft(a) => stft(a, g),
        Experiment::Norm(a) => norm(a, g),
        Experiment::Fresnel(a) => fresnel(a, g),
        Experiment::NormLn(a) => norm_ln(a, g),
        Experiment::Schrodinger(a) => schrodinger(a, g),
        Experiment::Cylinder(a) => cylinder(a, g),
        Experiment::Ltopo(a) => ltopo(a, g),
        Experiment::Lprime(a) => lprime(a, g),
        Experiment::AppendixA(a) => appendix_a(a, g),
        Experiment::AppendixB(a) => appendix_b(a, g),
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn list(v: &[f64]) -> String {
    v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(" ")
}

fn halves() -> RealSequence {
    RealSequence::geometric(1.0, 0.5)
}

fn two_pow_minus_j() -> RealSequence {
    RealSequence::geometric(0.5, 0.5)
}

/// A window with weights `q`, repeated to `dim` when a single weight is given.
fn window_for(q: &[f64], dim: usize, hbar: f64) -> Result<Window, CliError> {
    if q.is_empty() {
        return Ok(Window::unit(dim, hbar)?);
    }
    let q = match q.len() {
        1 => vec![q[0]; dim],
        n if n == dim => q.to_vec(),
        n => return Err(usage(format!("{n} window weights for a function of {dim} variables"))),
    };
    Ok(Window::gaussian(&GaussianWindow::new(q, hbar)?))
}

fn relative_gap(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

// ------------------------------------------------------------------ stft

fn stft(a: &StftArgs, g: &Globals) -> Result<Report, CliError> {
    let p = Params::new(a.hbar)?;
    let e = corpus::parse_function(&a.f, &p)?;
    let d = e.f.dim();
    let w = window_for(&a.q, d, a.hbar)?;
    let grid = GridSpec::new(a.grid_radius, a.grid_step)?;
    if !(a.extent > 0.0) || a.points == 0 {
        return Err(usage("--box must be positive and --points at least 1"));
    }
    let tol = g.tol.unwrap_or(1e-6);
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let pts: Vec<(Vec<f64>, Vec<f64>)> = (0..a.points)
        .map(|_| {
            let x = (0..d).map(|_| rng.gen_range(-a.extent..=a.extent)).collect();
            let xi = (0..d).map(|_| rng.gen_range(-a.extent..=a.extent)).collect();
            (x, xi)
        })
        .collect();

    let mut t = Table::new(
        "stft",
        &[
            format!("closed-form STFT against trapezoid quadrature, f = {}", e.name),
            format!("hbar = {}, seed = {}, points drawn from [-{b}, {b}]^{}", num(a.hbar), g.seed, 2 * d, b = num(a.extent)),
            format!("quadrature grid radius {} step {}", num(a.grid_radius), num(a.grid_step)),
        ],
        &["x", "xi", "closed_re", "closed_im", "numeric_re", "numeric_im", "abs_err"],
    );
    let mut worst = (0.0f64, 0usize);
    for (x, xi) in &pts {
        let cl = stft_closed(&e.f, &w, x, xi, &p)?;
        let nu = stft_numeric(&e.f, &w, x, xi, &grid, &p)?;
        let err = (cl - nu).norm();
        let row = t.push(vec![list(x), list(xi), num(cl.re), num(cl.im), num(nu.re), num(nu.im), num(err)]);
        if err >= worst.0 {
            worst = (err, row);
        }
    }
    let mut r = Report::new("stft");
    r.check("max_abs_error", worst.0 < tol, format!("max |closed - numeric| = {} (tol {})", num(worst.0), num(tol)), Some((0, worst.1)));
    r.set("value", json!(worst.0));
    r.set("error_estimate", json!(worst.0));
    r.tables.push(t);
    Ok(r)
}

// ------------------------------------------------------------------ norm

fn norm(a: &NormArgs, g: &Globals) -> Result<Report, CliError> {
    let p = Params::new(a.hbar)?;
    let e = corpus::parse_function(&a.f, &p)?;
    let d = e.f.dim();
    let w = window_for(&a.q, d, a.hbar)?;
    let mut t = Table::new(
        "norm",
        &[
            format!("Sjostrand norm of {} with Gaussian window weights {}", e.name, list(&a.q)),
            format!("hbar = {}", num(a.hbar)),
        ],
        &["method", "value", "lower", "upper"],
    );
    let est = norm_m_infty_1(&e.f, &w, &p)?;
    t.push(vec![format!("{:?}", est.method).to_lowercase(), num(est.value), num(est.lower), num(est.upper)]);
    let mut r = Report::new("norm");
    r.check("bracket", est.lower <= est.value && est.value <= est.upper, format!("{} <= {} <= {}", num(est.lower), num(est.value), num(est.upper)), Some((0, 0)));
    if a.grid {
        let tol = g.tol.unwrap_or(1e-2);
        let grid = norm_m_infty_1_grid(
            &e.f,
            &w,
            &GridSpec::new(6.0, 0.1)?,
            &GridSpec::new(10.0, 0.05)?,
            &GridSpec::new(12.0, 0.02)?,
            &p,
        )?;
        let row = t.push(vec!["grid".into(), num(grid.value), num(grid.lower), num(grid.upper)]);
        let gap = (grid.value - est.value).abs() / est.value;
        r.check("grid_agreement", gap < tol, format!("relative gap {} (tol {})", num(gap), num(tol)), Some((0, row)));
    }
    r.set("value", json!(est.value));
    r.set("error_estimate", json!(est.upper - est.lower));
    r.tables.push(t);
    Ok(r)
}

// ------------------------------------------------------------------ fresnel

fn mollifier(name: &str) -> Result<Mollifier, CliError> {
    match name {
        "gaussian" => Ok(Mollifier::Gaussian),
        "sech" => Ok(Mollifier::Sech),
        other => Err(usage(format!("unknown mollifier `{other}`; expected gaussian or sech"))),
    }
}

fn single_method(f: &FunctionObject, method: &str, m: Mollifier, p: &Params) -> Result<FresnelResult, CliError> {
    let d = f.dim();
    let gw = Window::unit(d, p.hbar)?;
    let gamma = Window::chirped(0.5, d, p.hbar)?;
    Ok(match method {
        "direct" => fresnel_direct(f, &RegularizerSchedule::halving(m, 16), p, &DirectOptions::default())?,
        "phase-space" => fresnel_phase_space(f, &gw, &gamma, p, None)?,
        "parseval" => fresnel_parseval(f, p)?,
        "fourier-side" => fresnel_fourier_side(f, &gw, &gamma, p)?,
        other => {
            return Err(usage(format!(
                "unknown method `{other}`; expected all, direct, phase-space, parseval or fourier-side"
            )))
        }
    })
}

fn fresnel(a: &FresnelArgs, g: &Globals) -> Result<Report, CliError> {
    let p = Params::new(a.hbar)?;
    let mut f_arg = a.f.clone();
    let mut method = a.method.clone();
    if let Some(preset) = &a.preset {
        match preset.as_str() {
            "cos-norm" => {
                f_arg = "cos-norm".into();
                method = "all".into();
            }
            other => return Err(usage(format!("unknown fresnel preset `{other}`; expected cos-norm"))),
        }
    }
    let m = mollifier(&a.mollifier)?;
    let other_m = if m == Mollifier::Gaussian { Mollifier::Sech } else { Mollifier::Gaussian };
    let entries = corpus::parse_functions(&f_arg, &p)?;
    let tol = g.tol.unwrap_or(1e-3);
    let oracle_tol = g.tol.unwrap_or(1e-6);

    let header = vec![
        format!("Fresnel integral by {method}, mollifier {}, hbar = {}", a.mollifier, num(a.hbar)),
        "direct: eps-regularized integrals with Richardson extrapolation in eps^2".to_string(),
        "phase_space: STFT pairing with the unit window and the chirped window of parameter 1/2".to_string(),
    ];
    let mut values = Table::new("fresnel_values", &header, &["f", "method", "re", "im", "error_estimate"]);
    let mut trace = Table::new("fresnel_trace", &header, &["f", "method", "eps_or_step", "re", "im"]);
    let mut r = Report::new("fresnel");
    let mut summary = Vec::new();

    let push = |values: &mut Table, trace: &mut Table, name: &str, res: &FresnelResult| -> usize {
        for (s, v) in &res.trace {
            trace.push(vec![name.into(), res.method.name().into(), num(*s), num(v.re), num(v.im)]);
        }
        values.push(vec![name.into(), res.method.name().into(), num(res.value.re), num(res.value.im), num(res.error_estimate)])
    };

    for Entry { name, f, oracle } in &entries {
        if method == "all" {
            let tri = fresnel_triangle(f, m, &p)?;
            let mut rows = Vec::new();
            for res in tri.results() {
                rows.push(push(&mut values, &mut trace, name, res));
            }
            let dis = tri.max_disagreement();
            r.check(format!("{name}/triangle"), dis < tol, format!("max pairwise relative disagreement {} (tol {})", num(dis), num(tol)), Some((0, rows[0])));
            let swapped = fresnel_direct(f, &RegularizerSchedule::halving(other_m, 16), &p, &DirectOptions::default())?;
            let srow = push(&mut values, &mut trace, &format!("{name}[{}]", if other_m == Mollifier::Sech { "sech" } else { "gaussian" }), &swapped);
            let swap = relative_gap(swapped.value, tri.direct.value);
            r.check(format!("{name}/mollifier_swap"), swap < tol, format!("direct value moves by {} (tol {})", num(swap), num(tol)), Some((0, srow)));
            if let Some(o) = oracle {
                for (res, row) in tri.results().iter().zip(&rows) {
                    let gap = relative_gap(res.value, *o);
                    r.check(format!("{name}/{}_exact", res.method.name()), gap < oracle_tol.max(res.error_estimate), format!("|value - exact| = {} (exact {})", num(gap), cnum(*o)), Some((0, *row)));
                }
            }
            summary.push(json!({"f": name, "value": cjson(tri.direct.value), "error_estimate": dis, "disagreement": dis, "mollifier_swap": swap}));
        } else {
            let res = single_method(f, &method, m, &p)?;
            let row = push(&mut values, &mut trace, name, &res);
            if let Some(o) = oracle {
                let gap = relative_gap(res.value, *o);
                r.check(format!("{name}/exact"), gap < oracle_tol.max(res.error_estimate), format!("|value - exact| = {}", num(gap)), Some((0, row)));
            }
            summary.push(json!({"f": name, "value": cjson(res.value), "error_estimate": res.error_estimate}));
        }
    }
    if summary.len() == 1 {
        let s = summary.pop().unwrap();
        r.set("value", s["value"].clone());
        r.set("error_estimate", s["error_estimate"].clone());
    } else {
        let worst = summary.iter().filter_map(|s| s["error_estimate"].as_f64()).fold(0.0, f64::max);
        r.set("value", json!(summary));
        r.set("error_estimate", json!(worst));
    }
    r.tables.push(values);
    r.tables.push(trace);
    Ok(r)
}

// ------------------------------------------------------------------ norm-ln

fn schedule(s: &str) -> Result<Vec<f64>, CliError> {
    if s == "default" {
        return Ok(vec![1.0, 1e-1, 1e-2, 1e-3, 1e-4]);
    }
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| usage(format!("bad witness schedule entry `{t}`: {e}"))))
        .collect::<Result<_, _>>()?;
    if v.is_empty() || v.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
        return Err(usage("witness schedule entries must be positive"));
    }
    Ok(v)
}

fn norm_ln(a: &NormLnArgs, g: &Globals) -> Result<Report, CliError> {
    let p = Params::new(a.hbar)?;
    let sched = schedule(&a.witness_schedule)?;
    let exact = op_norm_ln(&a.q)?;
    let tol = g.tol.unwrap_or(1e-2);
    let mut t = Table::new(
        "norm_ln",
        &[
            format!("two-sided witnesses of the Fresnel functional norm, q = {}", list(&a.q)),
            "upper: chirped window of parameter alpha; lower: |L(f_eps)| / ||f_eps||".to_string(),
            format!("exact norm prod (q_j^2 + 1)^(1/4) = {}", num(exact)),
        ],
        &["alpha", "upper", "eps", "lower", "exact"],
    );
    let mut r = Report::new("norm-ln");
    let mut last = None;
    for s in &sched {
        let w = op_norm_witnesses(&a.q, *s, *s, &p)?;
        let row = t.push(vec![num(*s), num(w.upper), num(*s), num(w.lower), num(exact)]);
        let slack = 1e-12 * exact;
        r.check(
            format!("sandwich@{}", num(*s)),
            w.lower <= exact + slack && exact <= w.upper + slack,
            format!("{} <= {} <= {}", num(w.lower), num(exact), num(w.upper)),
            Some((0, row)),
        );
        last = Some((w, row));
    }
    let (w, row) = last.expect("schedule is not empty");
    let gap = w.upper - w.lower;
    r.check("final_gap", gap < tol * exact, format!("upper - lower = {} (tol {} x exact)", num(gap), num(tol)), Some((0, row)));
    r.set("value", json!(exact));
    r.set("error_estimate", json!(gap));
    r.set("witnesses", json!({"upper": w.upper, "lower": w.lower}));
    r.tables.push(t);
    Ok(r)
}

// ------------------------------------------------------------------ schrodinger

fn schrodinger(a: &SchrodingerArgs, g: &Globals) -> Result<Report, CliError> {
    let p = Params::new(a.hbar)?;
    let formula = sharp_norm_formula(a.t, &a.q)?;
    let tol = g.tol.unwrap_or(1e-2);
    if a.eps.is_empty() {
        return Err(usage("--eps needs at least one value"));
    }
    let mut t = Table::new(
        "schrodinger_witness",
        &[
            format!("sharp bound of the free evolution from the Sjostrand class to bounded functions, hbar = {}", num(a.hbar)),
            "formula prod (t^2 q_j^2 + 1)^(1/4); witness ||u(t)||_inf / ||f_eps|| for f_eps = exp(-(eps + i) x^2 / 2 hbar t)".to_string(),
        ],
        &["t", "q", "formula", "eps", "witness", "ratio"],
    );
    let mut r = Report::new("schrodinger");
    let mut eps = a.eps.clone();
    eps.sort_by(|x, y| y.total_cmp(x));
    let mut prev = 0.0;
    let mut last = (0.0, 0);
    for e in &eps {
        let w = sharp_norm_witness(a.t, &a.q, *e, &p)?;
        let row = t.push(vec![num(a.t), list(&a.q), num(formula), num(*e), num(w), num(w / formula)]);
        r.check(format!("below_formula@{}", num(*e)), w <= formula * (1.0 + 1e-12), format!("{} <= {}", num(w), num(formula)), Some((0, row)));
        r.check(format!("monotone@{}", num(*e)), w >= prev - 1e-12, format!("{} after {}", num(w), num(prev)), Some((0, row)));
        prev = w;
        last = (w, row);
    }
    let close = (1.0 - last.0 / formula).abs();
    r.check("witness_within_tol", close < tol, format!("witness at eps = {} is {} of the formula (tol {})", num(*eps.last().unwrap()), num(last.0 / formula), num(tol)), Some((0, last.1)));
    r.tables.push(t);

    if a.q.len() == 1 {
        let spec = PropagatorSpec::new(a.t, p, GridSpec::new(a.grid_radius, a.grid_step)?)?;
        let win = Window::gaussian(&GaussianWindow::new(a.q.clone(), a.hbar)?);
        let mut ft = Table::new(
            "schrodinger_propagator",
            &[
                format!("FFT propagator on [-{r}, {r}] with step {}, t = {}", num(a.grid_step), num(a.t), r = num(a.grid_radius)),
                "l2 norms before and after; sup of u(t) against formula x Sjostrand norm".to_string(),
            ],
            &["f", "l2_before", "l2_after", "sup", "bound"],
        );
        let names: Vec<&str> = if a.f == "corpus" {
            vec!["gaussian", "modulated-gaussian", "damped-chirp-1", "damped-chirp-0.1"]
        } else {
            vec![a.f.as_str()]
        };
        for n in names {
            let e = corpus::parse_function(n, &p)?;
            if e.f.dim() != 1 {
                return Err(CliError::Compute(FresnelError::DimensionMismatch { expected: 1, got: e.f.dim() }));
            }
            let start = PropagatorSpec::new(0.0, p, spec.grid)?;
            let before = evolve_multiplier(&e.f, &start)?.l2_norm();
            let after = evolve_multiplier(&e.f, &spec)?.l2_norm();
            let sup = evolve_free(&e.f, &spec)?.sup_norm();
            let bound = formula * norm_m_infty_1(&e.f, &win, &p)?.upper;
            let row = ft.push(vec![e.name.clone(), num(before), num(after), num(sup), num(bound)]);
            r.check(format!("{}/unitary", e.name), (after - before).abs() < 1e-8, format!("|l2 after - l2 before| = {}", num((after - before).abs())), Some((1, row)));
            r.check(format!("{}/sup_bound", e.name), sup <= bound * (1.0 + 1e-6), format!("{} <= {}", num(sup), num(bound)), Some((1, row)));
        }
        r.tables.push(ft);
    }
    r.set("value", json!(formula));
    r.set("error_estimate", json!(formula - last.0));
    Ok(r)
}

// ------------------------------------------------------------------ cylinder and ltopo

struct Preset {
    seq: CylinderSequence,
    describe: &'static str,
}

fn cylinder_preset(name: &str) -> Result<Preset, CliError> {
    Ok(match name {
        "product-family" => Preset {
            seq: CylinderSequence::ProductFamily {
                a: two_pow_minus_j(),
                k: RealSequence::Constant { value: 1.0 },
                hbar_scaled: true,
            },
            describe: "partial products of 1 + 2^-j exp(i x_j / hbar)",
        },
        "plane-wave-partials" => Preset {
            seq: CylinderSequence::PlaneWave { k: two_pow_minus_j() },
            describe: "plane waves exp(i (pi_n k).x / hbar) with k_j = 2^-j",
        },
        "gaussian-partials" => Preset {
            seq: CylinderSequence::Gaussian { r: two_pow_minus_j() },
            describe: "Gaussians exp(-sum_{j<=n} 2^-j x_j^2 / 2hbar)",
        },
        other => return Err(usage(format!("unknown preset `{other}`; expected product-family, plane-wave-partials or gaussian-partials"))),
    })
}

fn doubling_pairs(max_n: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    let mut m = 1;
    while 2 * m <= max_n {
        v.push((m, 2 * m));
        m *= 2;
    }
    v
}

/// `prod_{j in (from, to]} (1 + 2^-j)`.
fn product_norm(from: usize, to: usize) -> f64 {
    (from + 1..=to).map(|j| 1.0 + 0.5f64.powi(j as i32)).product()
}

fn cylinder(a: &CylinderArgs, g: &Globals) -> Result<Report, CliError> {
    let p = Params::new(a.hbar)?;
    let pre = cylinder_preset(&a.preset)?;
    if a.max_n < 2 {
        return Err(usage("--max-n must be at least 2"));
    }
    let w = WindowSequence::new(halves())?;
    let tol = g.tol.unwrap_or(1e-6);
    let header = [
        format!("preset {}: {}", a.preset, pre.describe),
        format!("window weights q_j = 2^-(j-1), hbar = {}", num(a.hbar)),
    ];
    let mut norms = Table::new("cylinder_norms", &header, &["n", "value", "lower", "upper", "expected"]);
    let mut pairs = Table::new("cylinder_pairs", &header, &["m", "n", "lower", "upper", "reference"]);
    let mut r = Report::new("cylinder");

    let mut n = 1;
    while n <= a.max_n {
        let est = norm_infinite(&pre.seq.term(n, &p)?, &w, &p)?;
        let expected = match a.preset.as_str() {
            "product-family" => product_norm(0, n),
            _ => 1.0,
        };
        let row = norms.push(vec![n.to_string(), num(est.value), num(est.lower), num(est.upper), num(expected)]);
        let ok = match a.preset.as_str() {
            "product-family" => (est.value - expected).abs() <= 1e-12 * expected,
            "plane-wave-partials" => (est.value - 1.0).abs() <= 1e-12,
            _ => est.lower >= 1.0 - tol,
        };
        r.check(format!("norm@{n}"), ok, format!("norm {} against {}", num(est.value), num(expected)), Some((0, row)));
        n *= 2;
    }
    let mut last = 0.0;
    for (m, n) in doubling_pairs(a.max_n) {
        let d = cauchy_distance(&pre.seq.term(n, &p)?, &pre.seq.term(m, &p)?, &w, &p)?;
        let (reference, ok, what) = match a.preset.as_str() {
            "product-family" => {
                let b = product_norm(0, m) * (product_norm(m, n) - 1.0);
                (b, d.upper <= b * (1.0 + 1e-12), "product bound")
            }
            "plane-wave-partials" => (2.0, (d.value - 2.0).abs() < tol && (d.lower - 2.0).abs() < tol, "exact distance"),
            _ => (1.0, d.lower >= 1.0 - tol, "lower bound"),
        };
        let row = pairs.push(vec![m.to_string(), n.to_string(), num(d.lower), num(d.upper), num(reference)]);
        r.check(format!("distance({m},{n})"), ok, format!("[{}, {}] against {what} {}", num(d.lower), num(d.upper), num(reference)), Some((1, row)));
        last = d.upper;
    }
    r.set("value", json!(last));
    r.set("error_estimate", json!(0.0));
    r.tables.push(norms);
    r.tables.push(pairs);
    Ok(r)
}

fn product_value(hbar: f64) -> Complex64 {
    // L_1(exp(i t / hbar)) = exp(-i / 2hbar)
    let e = Complex64::from_polar(1.0, -0.5 / hbar);
    (1..=80).map(|j| Complex64::new(1.0, 0.0) + 0.5f64.powi(j) * e).product()
}

fn ltopo(a: &LtopoArgs, g: &Globals) -> Result<Report, CliError> {
    let p = Params::new(a.hbar)?;
    let (seq, preset, describe) = match &a.sequence {
        Some(s) => (
            serde_json::from_str::<CylinderSequence>(s).map_err(|e| usage(format!("invalid --sequence: {e}")))?,
            None,
            "custom sequence".to_string(),
        ),
        None => {
            let pre = cylinder_preset(&a.preset)?;
            (pre.seq, Some(a.preset.as_str()), format!("preset {}: {}", a.preset, pre.describe))
        }
    };
    let w = WindowSequence::new(halves())?;
    let opts = CauchyOptions { tol: g.tol.unwrap_or(1e-4), max_n: a.max_n };
    let mut t = Table::new(
        "ltopo_pairs",
        &[describe, format!("Cauchy check on pairs (m, 2m), tol {}, window weights q_j = 2^-(j-1), hbar = {}", num(opts.tol), num(a.hbar))],
        &["m", "n", "lower", "upper"],
    );
    let mut r = Report::new("ltopo");
    match l_topological(&seq, &w, &p, &opts) {
        Ok(res) => {
            for pr in &res.certificate.pairs {
                t.push(vec![pr.m.to_string(), pr.n.to_string(), num(pr.lower), num(pr.upper)]);
            }
            let last = t.rows.len().saturating_sub(1);
            match preset {
                Some("product-family") => {
                    let exact = product_value(a.hbar);
                    let gap = (res.value - exact).norm();
                    r.check("closed_product", gap < 1e-8, format!("|L - prod| = {}", num(gap)), Some((0, last)));
                }
                Some(other) => r.check("rejected", false, format!("{other} passed the Cauchy check"), Some((0, last))),
                None => r.check("cauchy", true, "passed", None),
            }
            r.set("value", cjson(res.value));
            r.set("error_estimate", json!(res.error_estimate));
        }
        Err(FresnelError::CauchyCheckFailed { n, m, distance }) => {
            for (pm, pn) in doubling_pairs(a.max_n) {
                let d = cauchy_distance(&seq.term(pn, &p)?, &seq.term(pm, &p)?, &w, &p)?;
                t.push(vec![pm.to_string(), pn.to_string(), num(d.lower), num(d.upper)]);
            }
            let last = t.rows.len().saturating_sub(1);
            let detail = format!("CauchyCheckFailed between n={n} and m={m}: distance {}", num(distance));
            match preset {
                Some("plane-wave-partials") => r.check("rejected", (distance - 2.0).abs() < 1e-6, detail, Some((0, last))),
                Some("gaussian-partials") => r.check("rejected", distance >= 1.0 - 1e-6, detail, Some((0, last))),
                _ => r.check("cauchy", false, detail, Some((0, last))),
            }
            r.set("value", serde_json::Value::Null);
            r.set("error_estimate", json!(distance));
            r.set("cauchy_failure", json!({"n": n, "m": m, "distance": distance}));
        }
        Err(e) => return Err(e.into()),
    }
    r.tables.push(t);
    Ok(r)
}

// ------------------------------------------------------------------ lprime

fn three_atom_pushforward(lambda2: f64, hbar: f64) -> Complex64 {
    corpus::DELTA_2
        .iter()
        .map(|(s, (a, b))| Complex64::new(*a, *b) * Complex64::from_polar(1.0, -0.5 * hbar * s * s * lambda2))
        .sum()
}

fn lprime(a: &LprimeArgs, g: &Globals) -> Result<Report, CliError> {
    let p = Params::new(a.hbar)?;
    let (f, preset, oracle, oracle_tol, describe) = match &a.function {
        Some(s) => (
            serde_json::from_str::<SequenceFunction>(s).map_err(|e| usage(format!("invalid --function: {e}")))?,
            None,
            None,
            0.0,
            "custom function".to_string(),
        ),
        None => match a.preset.as_str() {
            "plane-wave-geometric" => (
                SequenceFunction::PlaneWaveL2 { k: two_pow_minus_j() },
                Some("plane-wave-geometric"),
                // |k|^2 = 1/3
                Some(Complex64::from_polar(1.0, -1.0 / (6.0 * a.hbar))),
                1e-8,
                "exp(i k.x / hbar) with k_j = 2^-j".to_string(),
            ),
            "gaussian-r-geometric" => {
                let v: Complex64 = (1..=80)
                    .map(|j| Complex64::new(1.0, 0.5f64.powi(j)).sqrt().inv())
                    .product();
                (
                    SequenceFunction::GaussianL1 { r: two_pow_minus_j() },
                    Some("gaussian-r-geometric"),
                    Some(v),
                    1e-10,
                    "exp(-sum_j 2^-j x_j^2 / 2hbar)".to_string(),
                )
            }
            "three-atom-composite" => (
                SequenceFunction::Composite1D { h: corpus::atoms(&corpus::DELTA_2)?, k: two_pow_minus_j() },
                Some("three-atom-composite"),
                Some(three_atom_pushforward(1.0 / 3.0, a.hbar)),
                1e-10,
                "h(k.x) for h the Fourier transform of a three-atom measure, k_j = 2^-j".to_string(),
            ),
            "product-family" => (
                SequenceFunction::ProductFamily {
                    a: two_pow_minus_j(),
                    k: RealSequence::Constant { value: 1.0 },
                    hbar_scaled: true,
                },
                Some("product-family"),
                Some(product_value(a.hbar)),
                1e-10,
                "prod_j (1 + 2^-j exp(i x_j / hbar))".to_string(),
            ),
            other => {
                return Err(usage(format!(
                    "unknown preset `{other}`; expected plane-wave-geometric, gaussian-r-geometric, three-atom-composite or product-family"
                )))
            }
        },
    };
    let sched = if a.schedule.is_empty() { default_schedule() } else { a.schedule.clone() };
    let settle = g.tol.unwrap_or(a.settle);
    let header = [describe.clone(), format!("limit of L_n over the restrictions to R^n, hbar = {}, settling tolerance {}", num(a.hbar), num(settle))];
    let mut t = Table::new("lprime_trace", &header, &["n", "re", "im", "step"]);
    let mut r = Report::new("lprime");
    match l_prime(&f, &p, &sched, settle) {
        Ok(res) => {
            let mut prev: Option<Complex64> = None;
            for (n, v) in &res.trace {
                let step = prev.map_or(String::new(), |q| num((*v - q).norm()));
                t.push(vec![n.to_string(), num(v.re), num(v.im), step]);
                prev = Some(*v);
            }
            let last = t.rows.len() - 1;
            r.check("settled", true, format!("trace settled to {}", num(settle)), None);
            if let Some(o) = oracle {
                let gap = (res.value - o).norm();
                r.check("closed_limit", gap < oracle_tol, format!("|L' - exact| = {} (tol {}), exact {}", num(gap), num(oracle_tol), cnum(o)), Some((0, last)));
            }
            r.set("value", cjson(res.value));
            r.set("error_estimate", json!(if res.certified { res.error_estimate } else { f64::NAN }));
            r.set("certified", json!(res.certified));
        }
        Err(FresnelError::NonConvergent { trace }) => {
            let mut prev: Option<Complex64> = None;
            for (n, v) in &trace {
                let step = prev.map_or(String::new(), |q| num((*v - q).norm()));
                t.push(vec![num(*n), num(v.re), num(v.im), step]);
                prev = Some(*v);
            }
            let last = t.rows.len().saturating_sub(1);
            r.check("settled", false, format!("trace did not settle to {}", num(settle)), Some((0, last)));
            r.set("value", serde_json::Value::Null);
            r.set("error_estimate", json!(f64::INFINITY));
        }
        Err(e) => return Err(e.into()),
    }
    r.tables.push(t);

    if preset == Some("three-atom-composite") {
        // The same limit through the phase-space pairing with dilated chirps.
        let gw = Window::unit(1, a.hbar)?;
        let h = corpus::atoms(&corpus::DELTA_2)?;
        let k = two_pow_minus_j();
        let b2: f64 = 1.0 / 3.0;
        let limit = composite_dual_value(&h, b2.sqrt(), &gw, &p)?;
        let mut pt = Table::new(
            "lprime_pairing",
            &[describe, "pairing of the Fourier transform of h with the dilated chirp at lambda = |pi_n k|".to_string()],
            &["n", "lambda", "pairing_re", "pairing_im", "pushforward_re", "pushforward_im", "gap", "gap_to_limit"],
        );
        let ptol = g.tol.unwrap_or(1e-4);
        let mut last_gap = 0.0;
        for n in [1usize, 2, 4, 8, 16] {
            let lam2 = k.partial_sum(2.0, n);
            let v = composite_dual_value(&h, lam2.sqrt(), &gw, &p)?;
            let o = three_atom_pushforward(lam2, a.hbar);
            let gap = (v - o).norm();
            last_gap = (v - limit).norm();
            let row = pt.push(vec![n.to_string(), num(lam2.sqrt()), num(v.re), num(v.im), num(o.re), num(o.im), num(gap), num(last_gap)]);
            if n <= 8 {
                r.check(format!("pushforward@{n}"), gap < ptol, format!("gap {} (tol {})", num(gap), num(ptol)), Some((1, row)));
            }
        }
        let row = pt.rows.len() - 1;
        r.check("pairing_settles", last_gap < 1e-5, format!("gap to the lambda = |k| value {}", num(last_gap)), Some((1, row)));
        r.tables.push(pt);
    }
    Ok(r)
}

// ------------------------------------------------------------------ appendix-a

fn appendix_a(a: &AppendixAArgs, g: &Globals) -> Result<Report, CliError> {
    let p = Params::new(a.hbar)?;
    if a.x.len() != a.xi.len() || a.x.is_empty() {
        return Err(usage("--x and --xi must be non-empty lists of the same length"));
    }
    let eps: Vec<f64> = match a.eps.len() {
        1 => vec![a.eps[0]; a.x.len()],
        n if n == a.x.len() => a.eps.clone(),
        _ => return Err(usage("--eps must have one value or one per point")),
    };
    let gw = Window::unit(1, a.hbar)?;
    let tol = g.tol.unwrap_or(1e-4);
    let mut t = Table::new(
        "appendix_a",
        &[
            format!("windowed plane-wave kernel, k = {}, hbar = {}, Gaussian cut-off", list(&a.k), num(a.hbar)),
            "lhs: regularized Fresnel integral over R^n; rhs: nested lambda and w quadrature; limit: eps -> 0 closed form".to_string(),
        ],
        &["x", "xi", "eps", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "abs_diff", "limit_re", "limit_im"],
    );
    let mut r = Report::new("appendix-a");
    let mut worst = 0.0f64;
    for ((x, xi), e) in a.x.iter().zip(&a.xi).zip(&eps) {
        let v = appendix_a_kernel(&a.k, *x, *xi, *e, Mollifier::Gaussian, &gw, &AppendixAGrids::default(), &p, a.max_nodes)?;
        let lim = appendix_a_limit(&a.k, *x, *xi, &gw, &p)?;
        let (lre, lim_, diff) = match v.lhs {
            Some(l) => (num(l.re), num(l.im), (l - v.rhs).norm()),
            None => ("".into(), "".into(), f64::INFINITY),
        };
        let row = t.push(vec![num(*x), num(*xi), num(*e), lre, lim_, num(v.rhs.re), num(v.rhs.im), num(diff), num(lim.re), num(lim.im)]);
        let detail = if v.lhs.is_some() {
            format!("|lhs - rhs| = {} (tol {})", num(diff), num(tol))
        } else {
            "direct side exceeds the node budget".to_string()
        };
        r.check(format!("sides@({},{})", num(*x), num(*xi)), diff < tol, detail, Some((0, row)));
        worst = worst.max(diff);
    }
    r.set("value", json!(worst));
    r.set("error_estimate", json!(worst));
    r.tables.push(t);
    Ok(r)
}

// ------------------------------------------------------------------ appendix-b

fn appendix_b(a: &AppendixBArgs, g: &Globals) -> Result<Report, CliError> {
    let p = Params::new(a.hbar)?;
    let constant = phi_tail_constant(a.m, a.b)?;
    let mut tail = Table::new(
        "appendix_b_tail",
        &[
            format!("integral over xi of the envelope Phi_(m={}, B={})(x, xi) against C <x>", a.m, num(a.b)),
            format!("C = {}", num(constant)),
        ],
        &["x", "integral", "bound", "ratio"],
    );
    let mut r = Report::new("appendix-b");
    for x in &a.x {
        let v = phi_tail_integral(a.m, a.b, *x)?;
        let bound = constant * (1.0 + x * x).sqrt();
        let row = tail.push(vec![num(*x), num(v), num(bound), num(v / bound)]);
        r.check(format!("tail@{}", num(*x)), v <= bound, format!("{} <= {}", num(v), num(bound)), Some((0, row)));
    }
    let gw = Window::unit(1, a.hbar)?;
    let grid = GridSpec::new(a.grid_radius, a.grid_step)?;
    let rep = dominator_check(&two_pow_minus_j(), &a.n, a.m, &gw, &grid, &p)?;
    let mut dom = Table::new(
        "appendix_b_dominator",
        &[
            format!("max over the grid of |V_g(F_+ o lambda_n)| / Phi_(m={}, B={})", a.m, num(rep.b)),
            format!("k_j = 2^-j, B = |k|, unit window, grid radius {} step {}", num(a.grid_radius), num(a.grid_step)),
        ],
        &["n", "lambda", "max_ratio"],
    );
    for row in &rep.rows {
        dom.push(vec![row.n.to_string(), num(row.lambda), num(row.max_ratio)]);
    }
    let tol = g.tol.unwrap_or(0.05);
    let worst_row = rep.rows.iter().enumerate().max_by(|x, y| x.1.max_ratio.total_cmp(&y.1.max_ratio)).map(|v| v.0);
    r.check(
        "dominator_stable",
        rep.spread <= tol,
        format!("maxima spread by {} (tol {}), uniform constant {}", num(rep.spread), num(tol), num(rep.constant)),
        worst_row.map(|i| (1, i)),
    );
    r.set("value", json!(rep.constant));
    r.set("error_estimate", json!(rep.spread));
    r.set("tail_constant", json!(constant));
    r.tables.push(tail);
    r.tables.push(dom);
    Ok(r)
}
