use std::f64::consts::PI;
use std::time::Instant;

use fresnelio::catalog::{tensorize, DiscreteMeasure, FunctionObject, MeasureAtom};
use fresnelio::fresnel::*;
use fresnelio::gabor::norm_m_infty_1;
use fresnelio::sequence::RealSequence;
use fresnelio::{Complex64, FresnelError, GaussianWindow, Params, Window};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn measure(atoms: &[(f64, Complex64)]) -> DiscreteMeasure {
    DiscreteMeasure::new(1, atoms.iter().map(|(p, w)| MeasureAtom { point: vec![*p], weight: *w }).collect()).unwrap()
}

fn parseval_oracle(atoms: &[(f64, Complex64)], hbar: f64) -> Complex64 {
    atoms.iter().map(|(p, w)| w * Complex64::from_polar(1.0, -hbar * p * p / 2.0)).sum()
}

fn direct(f: &FunctionObject, m: Mollifier, p: &Params) -> Result<FresnelResult, FresnelError> {
    fresnel_direct(f, &RegularizerSchedule::halving(m, 16), p, &DirectOptions::default())
}

fn windows(hbar: f64) -> (Window, Window) {
    (Window::unit(1, hbar).unwrap(), Window::chirped(0.5, 1, hbar).unwrap())
}

#[test]
fn constant_one_is_normalized() {
    let p = Params::default();
    let (g, gamma) = windows(1.0);
    let t = Instant::now();
    let d = direct(&FunctionObject::one(1), Mollifier::Gaussian, &p).unwrap();
    let s = fresnel_phase_space(&FunctionObject::one(1), &g, &gamma, &p, None).unwrap();
    assert!(t.elapsed().as_secs_f64() < 5.0);
    assert!((d.value - 1.0).norm() < 1e-6, "{}", d.value);
    assert!((s.value - 1.0).norm() < 1e-6, "{}", s.value);
    assert_eq!(d.method, FresnelMethod::DirectEps);
}

#[test]
fn error_estimate_dominates_last_trace_gap() {
    let p = Params::default();
    for m in [Mollifier::Gaussian, Mollifier::Sech] {
        let r = direct(&FunctionObject::cos_norm(1).unwrap(), m, &p).unwrap();
        let n = r.trace.len();
        assert!(r.error_estimate >= (r.trace[n - 1].1 - r.trace[n - 2].1).norm());
        assert!(r.trace.windows(2).all(|w| w[1].0 < w[0].0));
    }
}

#[test]
fn single_frequency_gives_its_parseval_phase() {
    let p = Params::default();
    let f = FunctionObject::fourier_measure(measure(&[(2.0, c(1.0, 0.0))])).unwrap();
    let want = Complex64::from_polar(1.0, -2.0);
    for m in [Mollifier::Gaussian, Mollifier::Sech] {
        let r = direct(&f, m, &p).unwrap();
        assert!((r.value - want).norm() < 1e-6, "{m:?}: {}", r.value);
    }
    assert!((fresnel_parseval_measure(&measure(&[(2.0, c(1.0, 0.0))]), &p).unwrap() - want).norm() < 1e-15);
}

#[test]
fn narrow_chirped_gaussian_blows_up_like_inverse_root() {
    let p = Params::default();
    let f = FunctionObject::complex_gaussian(vec![c(0.01, 1.0)]).unwrap();
    let want = c(0.0, 0.01).sqrt().inv();
    for m in [Mollifier::Gaussian, Mollifier::Sech] {
        let r = direct(&f, m, &p).unwrap();
        assert!((r.value - want).norm() < 1e-6 * 10.0, "{m:?}: {}", r.value);
        assert!((r.value.norm() - 10.0).abs() < 1e-5);
    }
}

#[test]
fn phase_space_matches_parseval_and_direct() {
    let p = Params::default();
    let (g, gamma) = windows(1.0);
    let atoms = [(1.0, c(0.5, 0.0)), (-3.0, c(0.0, 0.25))];
    let f = FunctionObject::fourier_measure(measure(&atoms)).unwrap();
    let r = fresnel_phase_space(&f, &g, &gamma, &p, None).unwrap();
    assert!((r.value - parseval_oracle(&atoms, 1.0)).norm() < 1e-9, "{}", r.value);

    let cos = FunctionObject::cos_norm(1).unwrap();
    let ps = fresnel_phase_space(&cos, &g, &gamma, &p, None).unwrap();
    let d = direct(&cos, Mollifier::Gaussian, &p).unwrap();
    assert!((ps.value - d.value).norm() < 1e-3, "{} vs {}", ps.value, d.value);
}

#[test]
fn phase_space_is_window_independent() {
    let hbar = 0.4;
    let p = Params::new(hbar).unwrap();
    let f = FunctionObject::affine_combo(vec![
        (c(1.0, 0.0), FunctionObject::complex_gaussian(vec![c(0.3, -0.7)]).unwrap()),
        (c(0.0, 2.0), FunctionObject::plane_wave(vec![1.3], false, false).unwrap()),
    ])
    .unwrap();
    let exact = fresnel_closed(&f, &p).unwrap();
    for (g, gamma) in [
        (Window::unit(1, hbar).unwrap(), Window::unit(1, hbar).unwrap()),
        (
            Window::gaussian(&GaussianWindow::new(vec![2.0], hbar).unwrap()),
            Window::chirped(0.3, 1, hbar).unwrap(),
        ),
    ] {
        let r = fresnel_phase_space(&f, &g, &gamma, &p, None).unwrap();
        assert!((r.value - exact).norm() < 1e-9, "{} vs {exact}", r.value);
    }
}

#[test]
fn parseval_examples() {
    let p = Params::default();
    assert_eq!(fresnel_parseval_measure(&measure(&[(0.0, c(1.0, 0.0))]), &p).unwrap(), c(1.0, 0.0));
    // Separable atoms in three dimensions give a product of phases.
    let hbar = 0.7;
    let p = Params::new(hbar).unwrap();
    let m1 = measure(&[(1.0, c(0.5, 0.0)), (-2.0, c(0.0, 1.0))]);
    let m2 = measure(&[(0.3, c(1.0, 1.0))]);
    let m3 = measure(&[(1.5, c(2.0, 0.0)), (0.0, c(-1.0, 0.0))]);
    let prod = m1.product(&m2).product(&m3);
    let v = fresnel_parseval_measure(&prod, &p).unwrap();
    let want = fresnel_parseval_measure(&m1, &p).unwrap()
        * fresnel_parseval_measure(&m2, &p).unwrap()
        * fresnel_parseval_measure(&m3, &p).unwrap();
    assert!((v - want).norm() < 1e-14);
}

#[test]
fn fourier_side_route_on_gaussians() {
    let hbar = 1.0;
    let p = Params::new(hbar).unwrap();
    let (g, gamma) = windows(hbar);
    let unit = FunctionObject::complex_gaussian(vec![c(1.0, 0.0)]).unwrap();
    let a = fresnel_w_infty_1(&unit, &g, &gamma, &p).unwrap();
    let b = fresnel_phase_space(&unit, &g, &gamma, &p, None).unwrap();
    assert!((a.value - b.value).norm() < 1e-10);

    // exp(-z y^2 / 2hbar) has transform z^(-1/2) exp(-xi^2 / 2hbar z).
    let z = c(1.0, 1.0);
    let u = FunctionObject::complex_gaussian(vec![z]).unwrap();
    let fhat = FunctionObject::affine_combo(vec![(z.sqrt().inv(), FunctionObject::complex_gaussian(vec![z.inv()]).unwrap())])
        .unwrap();
    let a = fresnel_w_infty_1(&u, &g, &gamma, &p).unwrap();
    let b = fresnel_phase_space(&fhat, &g, &gamma, &p, None).unwrap();
    assert!((a.value - b.value).norm() < 1e-10, "{} vs {}", a.value, b.value);
}

#[test]
fn fourier_side_route_on_a_pure_frequency() {
    // The transform of exp(i k y) is (2 pi hbar)^(1/2) delta_{hbar k}, whose
    // Fresnel integral is i^(-1/2) exp(i hbar k^2 / 2).
    for hbar in [1.0, 0.3] {
        let p = Params::new(hbar).unwrap();
        let (g, gamma) = windows(hbar);
        let k = 1.4;
        let u = FunctionObject::fourier_measure(measure(&[(k, c(1.0, 0.0))])).unwrap();
        let r = fresnel_w_infty_1(&u, &g, &gamma, &p).unwrap();
        let want = c(0.0, 1.0).sqrt().inv() * Complex64::from_polar(1.0, hbar * k * k / 2.0);
        assert!((r.value - want).norm() < 1e-9, "{} vs {want}", r.value);
        assert_eq!(r.method, FresnelMethod::WInfty1);
    }
}

#[test]
fn reversed_chirp_does_not_converge() {
    let p = Params::default();
    let f = FunctionObject::chirp(1, -1).unwrap();
    for m in [Mollifier::Gaussian, Mollifier::Sech] {
        match direct(&f, m, &p) {
            Err(FresnelError::NonConvergent { trace }) => {
                assert!(trace.len() >= 4);
                let n = trace.len();
                assert!(trace[n - 1].1.norm() > 1.9 * trace[n - 2].1.norm());
            }
            other => panic!("expected NonConvergent, got {other:?}"),
        }
    }
    assert!(fresnel_closed(&f, &p).is_err());
}

#[test]
fn direct_quadrature_in_two_dimensions() {
    // exp(-<Ay, y>/2) with A = [[1, 1/2], [1/2, 1]]; rotating to the
    // eigenbasis gives i^(-1) ((3/2 - i)(1/2 - i))^(-1/2).
    let p = Params::default();
    let f = FunctionObject::sampled(2, "coupled gaussian", |y: &[f64]| {
        c((-(y[0] * y[0] + y[1] * y[1] + y[0] * y[1]) / 2.0).exp(), 0.0)
    })
    .unwrap();
    let want = c(0.0, 1.0).sqrt().inv().powu(2) * (c(1.5, -1.0).sqrt() * c(0.5, -1.0).sqrt()).inv();
    let opts = DirectOptions { radius: Some(12.0), ..DirectOptions::default() };
    let r = fresnel_direct(&f, &RegularizerSchedule::halving(Mollifier::Gaussian, 16), &p, &opts).unwrap();
    assert!((r.value - want).norm() < 1e-8, "{} vs {want}", r.value);
}

#[test]
fn tensor_products_factor() {
    let hbar = 0.5;
    let p = Params::new(hbar).unwrap();
    let a = FunctionObject::complex_gaussian(vec![c(0.2, 0.5)]).unwrap();
    let b = FunctionObject::cos_norm(1).unwrap();
    let ab = tensorize(vec![a.clone(), b.clone()]).unwrap();
    let want = fresnel_closed(&a, &p).unwrap() * fresnel_parseval(&b, &p).unwrap().value;
    let r = direct(&ab, Mollifier::Gaussian, &p).unwrap();
    assert!((r.value - want).norm() < 1e-6, "{} vs {want}", r.value);
}

#[test]
fn operator_norm_values() {
    assert!((op_norm_ln(&[1.0]).unwrap() - 2f64.powf(0.25)).abs() < 1e-15);
    assert!((op_norm_ln(&[0.5, 0.25]).unwrap() - 1.0735190064).abs() < 1e-9);
    assert!((op_norm_ln(&[1e-9; 4]).unwrap() - 1.0).abs() < 1e-15);
    assert!(op_norm_ln(&[1.0, 0.0]).is_err());
}

#[test]
fn witnesses_approach_the_norm() {
    let p = Params::default();
    let w = op_norm_witnesses(&[1.0], 1e-9, 1e-4, &p).unwrap();
    let n = 2f64.powf(0.25);
    assert!((w.upper - n).abs() < 1e-8);
    assert!(w.lower <= n && w.lower > 0.995 * n, "{}", w.lower);
    let w = op_norm_witnesses(&[0.1, 0.2, 0.3], 1e-4, 1e-4, &Params::new(0.2).unwrap()).unwrap();
    assert!(w.upper - w.lower < 1e-2);

    // Both gaps shrink monotonically along halving schedules.
    let q = [0.5, 2.0];
    let norm = op_norm_ln(&q).unwrap();
    let mut last = (f64::INFINITY, f64::INFINITY);
    for j in 0..20 {
        let t = 0.5f64.powi(j);
        let w = op_norm_witnesses(&q, t, t, &p).unwrap();
        let gaps = (w.upper - norm, norm - w.lower);
        assert!(gaps.0 >= 0.0 && gaps.1 >= 0.0);
        assert!(gaps.0 < last.0 && gaps.1 < last.1);
        last = gaps;
    }
}

#[test]
fn lower_witness_is_a_value_over_a_norm() {
    for (q, eps, hbar) in [(1.0, 0.1, 0.6), (0.3, 1.0, 1.0), (3.0, 1e-3, 0.2)] {
        let p = Params::new(hbar).unwrap();
        let w = op_norm_witnesses(&[q, 0.5], 1.0, eps, &p).unwrap();
        let f = FunctionObject::complex_gaussian(vec![c(eps, 1.0); 2]).unwrap();
        let g = Window::gaussian(&GaussianWindow::new(vec![q, 0.5], hbar).unwrap());
        let ratio = fresnel_closed(&f, &p).unwrap().norm() / norm_m_infty_1(&f, &g, &p).unwrap().value;
        assert!((w.lower / ratio - 1.0).abs() < 1e-10, "{} vs {ratio}", w.lower);
    }
}

#[test]
fn uniform_bounds() {
    let geo = uniform_bound_check(&RealSequence::geometric(0.5, 0.5), 30).unwrap();
    assert!(geo.convergent);
    let brute: f64 = (0.25 * (1..200).map(|j| 0.25f64.powi(j).ln_1p()).sum::<f64>()).exp();
    assert!(geo.partial <= brute && brute <= geo.sup_estimate);
    assert!(geo.sup_estimate - geo.partial < 1e-15);

    let flat = uniform_bound_check(&RealSequence::Constant { value: 1.0 }, 40).unwrap();
    assert!(!flat.convergent && flat.sup_estimate.is_infinite());
    assert!((flat.partial - 2f64.powf(10.0)).abs() < 1e-9);

    let harmonic = uniform_bound_check(&RealSequence::Power { scale: 1.0, exponent: 1.0 }, 1000).unwrap();
    assert!(harmonic.convergent);
    let limit = (0.25 * (1..2_000_000).map(|j| (1.0 / (j as f64).powi(2)).ln_1p()).sum::<f64>()).exp();
    assert!(harmonic.partial <= limit && limit <= harmonic.sup_estimate);
    assert!(harmonic.sup_estimate < (PI * PI / 24.0).exp());
}

fn inequality_corpus() -> Vec<FunctionObject> {
    vec![
        FunctionObject::one(1),
        FunctionObject::fourier_measure(measure(&[(1.0, c(0.5, 0.0)), (-3.0, c(0.0, 0.25))])).unwrap(),
        FunctionObject::complex_gaussian(vec![c(0.1, 1.0)]).unwrap(),
        FunctionObject::complex_gaussian(vec![c(1.0, -2.0)]).unwrap(),
        FunctionObject::affine_combo(vec![
            (c(1.0, 0.0), FunctionObject::plane_wave(vec![0.5], false, false).unwrap()),
            (c(0.0, -1.0), FunctionObject::plane_wave(vec![-1.5], false, false).unwrap()),
        ])
        .unwrap(),
    ]
}

#[test]
fn fresnel_values_respect_the_operator_norm() {
    for hbar in [1.0, 0.25] {
        let p = Params::new(hbar).unwrap();
        for q in [0.2, 1.0, 3.0] {
            let g = Window::gaussian(&GaussianWindow::new(vec![q], hbar).unwrap());
            let gamma = Window::chirped(0.4, 1, hbar).unwrap();
            for f in inequality_corpus() {
                let v = fresnel_phase_space(&f, &g, &gamma, &p, None).unwrap().value.norm();
                let n = norm_m_infty_1(&f, &g, &p).unwrap();
                assert!(v <= op_norm_ln(&[q]).unwrap() * n.upper * (1.0 + 1e-9), "{f:?} q={q}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn witnesses_sandwich_the_norm(
        q in prop::collection::vec(0.05f64..5.0, 1..4),
        alpha in 1e-6f64..3.0,
        eps in 1e-6f64..3.0,
        hbar in 0.05f64..2.0,
    ) {
        let w = op_norm_witnesses(&q, alpha, eps, &Params::new(hbar).unwrap()).unwrap();
        let n = op_norm_ln(&q).unwrap();
        prop_assert!(w.lower <= n * (1.0 + 1e-12));
        prop_assert!(n <= w.upper * (1.0 + 1e-12));
        let upper: f64 = q.iter().map(|v| ((alpha + v).powi(2) + 1.0).powf(0.25)).product();
        prop_assert!((w.upper / upper - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_equals_regularized_limit(
        re in 0.05f64..3.0,
        im in -3.0f64..3.0,
        k in -2.0f64..2.0,
        hbar in 0.1f64..2.0,
    ) {
        let p = Params::new(hbar).unwrap();
        let f = FunctionObject::affine_combo(vec![
            (c(1.0, 0.0), FunctionObject::complex_gaussian(vec![c(re, im)]).unwrap()),
            (c(0.5, 0.5), FunctionObject::plane_wave(vec![k], false, false).unwrap()),
        ]).unwrap();
        let exact = fresnel_closed(&f, &p).unwrap();
        let r = direct(&f, Mollifier::Gaussian, &p).unwrap();
        prop_assert!((r.value - exact).norm() < 1e-6 * (1.0 + exact.norm()));
    }

    #[test]
    fn parseval_is_linear_and_unimodular(
        pts in prop::collection::vec((-5.0f64..5.0, -2.0f64..2.0, -2.0f64..2.0), 1..6),
        hbar in 0.05f64..2.0,
    ) {
        let p = Params::new(hbar).unwrap();
        let atoms: Vec<(f64, Complex64)> = pts.iter().map(|(x, a, b)| (*x, c(*a, *b))).collect();
        let v = fresnel_parseval_measure(&measure(&atoms), &p).unwrap();
        prop_assert!((v - parseval_oracle(&atoms, hbar)).norm() < 1e-12);
        let tv: f64 = atoms.iter().map(|a| a.1.norm()).sum();
        prop_assert!(v.norm() <= tv + 1e-12);
    }
}
