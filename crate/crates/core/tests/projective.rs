use std::f64::consts::PI;

use fresnelio::catalog::{tensorize, DiscreteMeasure, FunctionObject, MeasureAtom};
use fresnelio::fresnel::{fresnel_direct, DirectOptions, Mollifier, RegularizerSchedule};
use fresnelio::gabor::norm_m_infty_1;
use fresnelio::projective::*;
use fresnelio::sequence::{RealSequence, TailTemplate};
use fresnelio::{Complex64, FresnelError, GridSpec, Params, Window};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn p1() -> Params {
    Params::new(1.0).unwrap()
}

fn halves() -> WindowSequence {
    WindowSequence::new(RealSequence::geometric(1.0, 0.5)).unwrap()
}

fn cyl(f: FunctionObject) -> CylinderFunction {
    CylinderFunction::new(f).unwrap()
}

fn one() -> Complex64 {
    c(1.0, 0.0)
}

/// Closed-form members of dimension `m`, indexed by `kind`.
fn corpus_member(kind: usize, m: usize, rng: &mut ChaCha8Rng) -> FunctionObject {
    let mut vec = |lo: f64, hi: f64| (0..m).map(|_| rng.gen_range(lo..hi)).collect::<Vec<f64>>();
    match kind % 6 {
        0 => FunctionObject::plane_wave(vec(-2.0, 2.0), false, false).unwrap(),
        1 => {
            let r = vec(0.3, 2.0);
            let s = vec(-1.0, 1.0);
            FunctionObject::complex_gaussian(r.iter().zip(&s).map(|(a, b)| c(*a, *b)).collect()).unwrap()
        }
        2 => {
            let (p, q) = (vec(-1.5, 1.5), vec(-1.5, 1.5));
            FunctionObject::fourier_measure(
                DiscreteMeasure::new(
                    m,
                    vec![MeasureAtom { point: p, weight: c(0.7, 0.2) }, MeasureAtom { point: q, weight: c(-0.3, 0.4) }],
                )
                .unwrap(),
            )
            .unwrap()
        }
        3 if m >= 2 => {
            let r = vec(0.3, 2.0)[0];
            let k = vec(-2.0, 2.0);
            tensorize(vec![
                FunctionObject::complex_gaussian(vec![c(r, 0.3)]).unwrap(),
                FunctionObject::plane_wave(k[1..].to_vec(), true, false).unwrap(),
            ])
            .unwrap()
        }
        3 | 4 => {
            let k = vec(-2.0, 2.0);
            FunctionObject::affine_combo(vec![
                (c(0.5, -0.5), FunctionObject::one(m)),
                (c(1.5, 0.0), FunctionObject::plane_wave(k, true, false).unwrap()),
            ])
            .unwrap()
        }
        _ => FunctionObject::one(m),
    }
}

// ---------------------------------------------------------------- extension

#[test]
fn extend_keeps_values_and_composes() {
    let p = p1();
    let f = cyl(FunctionObject::plane_wave(vec![0.7], true, false).unwrap());
    let f3 = f.extend(3).unwrap();
    assert_eq!(f3.base_dim, 3);
    for x in [[0.3, -1.0, 2.0], [1.7, 4.0, -0.2]] {
        let a = f.evaluate(&x, &p).unwrap();
        let b = f3.evaluate(&x, &p).unwrap();
        assert!((a - b).norm() < 1e-15);
    }
    assert_eq!(f3.extend(5).unwrap(), f.extend(5).unwrap());
    assert!(f.same_as(&f3).unwrap());
    assert!(matches!(f3.extend(2), Err(FresnelError::InvalidParameter(_))));
}

#[test]
fn representation_independence_random_triples() {
    let p = p1();
    let w = halves();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for trial in 0..20 {
        let m = rng.gen_range(1..=3);
        let n = rng.gen_range(m + 1..=6);
        let big_n = rng.gen_range(n..=7);
        let f = cyl(corpus_member(trial, m, &mut rng));
        let fe = f.extend(n).unwrap();
        assert_eq!(fe.extend(big_n).unwrap(), f.extend(big_n).unwrap());

        let a = norm_infinite(&f, &w, &p).unwrap();
        let b = norm_infinite(&fe, &w, &p).unwrap();
        assert!((a.value - b.value).abs() <= 1e-12 * a.value.max(1.0), "trial {trial}: {a:?} vs {b:?}");
        assert!((a.upper - b.upper).abs() <= 1e-12 * a.upper.max(1.0));

        let la = l_min(&f, &w, &p).unwrap().value;
        let lb = l_min(&fe, &w, &p).unwrap().value;
        assert!((la - lb).norm() <= 1e-12 * la.norm().max(1.0), "trial {trial}: {la} vs {lb}");

        let x: Vec<f64> = (0..big_n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        assert!((f.evaluate(&x, &p).unwrap() - fe.evaluate(&x, &p).unwrap()).norm() < 1e-14);
    }
}

// ---------------------------------------------------------------- norms

#[test]
fn constant_one_has_unit_norm_in_every_dimension() {
    let p = Params::new(0.7).unwrap();
    for n in [1, 3, 8] {
        let f = cyl(FunctionObject::one(n));
        let v = norm_infinite(&f, &halves(), &p).unwrap();
        assert!((v.value - 1.0).abs() < 1e-12 && v.method.is_exact());
        assert!((l_min(&f, &halves(), &p).unwrap().value - one()).norm() < 1e-12);
    }
}

fn product_sequence(hbar_scaled: bool) -> CylinderSequence {
    CylinderSequence::ProductFamily {
        a: RealSequence::geometric(0.5, 0.5),
        k: RealSequence::Constant { value: 2.0 },
        hbar_scaled,
    }
}

#[test]
fn product_family_norm_is_product_of_one_plus_a() {
    for hbar in [1.0, 0.4] {
        let p = Params::new(hbar).unwrap();
        for n in [1, 3, 6] {
            let f = product_sequence(true).term(n, &p).unwrap();
            let v = norm_infinite(&f, &halves(), &p).unwrap();
            let expect: f64 = (1..=n).map(|j| 1.0 + 0.5f64.powi(j as i32)).product();
            assert!((v.value - expect).abs() < 1e-12 * expect, "n={n}: {v:?} vs {expect}");
            assert!(v.method.is_exact());
        }
    }
}

#[test]
fn product_family_cauchy_bound() {
    let p = p1();
    let w = halves();
    let seq = product_sequence(true);
    for (m, n) in [(1, 2), (2, 5), (3, 8)] {
        let fm = seq.term(m, &p).unwrap();
        let fnn = seq.term(n, &p).unwrap();
        let d = cauchy_distance(&fnn, &fm, &w, &p).unwrap();
        let norm_m: f64 = (1..=m).map(|j| 1.0 + 0.5f64.powi(j as i32)).product();
        let tail: f64 = (m + 1..=n).map(|j| 1.0 + 0.5f64.powi(j as i32)).product();
        let bound = norm_m * (tail - 1.0);
        assert!(d.upper <= bound * (1.0 + 1e-12), "({m},{n}): {d:?} vs {bound}");
        assert!(d.lower > 0.0);
    }
}

#[test]
fn identical_functions_are_at_distance_zero() {
    let p = p1();
    let f = cyl(FunctionObject::complex_gaussian(vec![c(1.0, 0.5)]).unwrap());
    let d = cauchy_distance(&f.extend(3).unwrap(), &f, &halves(), &p).unwrap();
    assert_eq!(d.value, 0.0);
    assert_eq!(d.upper, 0.0);
}

#[test]
fn plane_waves_with_different_projections_are_two_apart() {
    let p = Params::new(0.8).unwrap();
    let seq = CylinderSequence::PlaneWave { k: RealSequence::geometric(1.0, 0.5) };
    for (m, n) in [(1, 2), (2, 3), (4, 8)] {
        let d = cauchy_distance(&seq.term(n, &p).unwrap(), &seq.term(m, &p).unwrap(), &halves(), &p).unwrap();
        assert!((d.value - 2.0).abs() < 1e-6, "({m},{n}): {d:?}");
        assert!((d.lower - 2.0).abs() < 1e-6);
    }
}

// ---------------------------------------------------------------- restriction

#[test]
fn restricting_a_plane_wave_drops_components() {
    let p = Params::new(0.5).unwrap();
    let f = cyl(FunctionObject::plane_wave(vec![1.0, -2.0, 3.0], true, false).unwrap());
    let r = restrict(&f, 2, &p).unwrap();
    assert_eq!(r, FunctionObject::plane_wave(vec![1.0, -2.0], true, false).unwrap());
    assert_eq!(restrict(&f, 5, &p).unwrap(), f.base);
    assert!(restrict(&f, 0, &p).is_err());
}

#[test]
fn restriction_pins_trailing_coordinates_for_every_kind() {
    let p = Params::new(0.9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let extra = [
        FunctionObject::chirp(3, -1).unwrap(),
        FunctionObject::plane_wave(vec![0.3, 0.1, -0.4], true, true).unwrap(),
        FunctionObject::sampled(3, "cos sum", |x: &[f64]| c((x[0] + 2.0 * x[1] - x[2]).cos(), 0.0)).unwrap(),
    ];
    let mut objects: Vec<FunctionObject> = (0..6).map(|k| corpus_member(k, 3, &mut rng)).collect();
    objects.extend(extra);
    for f in objects {
        let cf = cyl(f.clone());
        for k in 1..3 {
            let r = restrict(&cf, k, &p).unwrap();
            assert_eq!(r.dim(), k);
            for _ in 0..5 {
                let x: Vec<f64> = (0..k).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let mut full = x.clone();
                full.resize(3, 0.0);
                let a = r.evaluate(&x, &p).unwrap();
                let b = f.evaluate(&full, &p).unwrap();
                assert!((a - b).norm() < 1e-13 * b.norm().max(1.0), "{}: {a} vs {b}", f.kind_name());
            }
        }
    }
}

#[test]
fn restriction_does_not_increase_the_norm() {
    let p = p1();
    let w = halves();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for trial in 0..18 {
        let n = rng.gen_range(2..=4);
        let f = cyl(corpus_member(trial, n, &mut rng));
        let full = norm_infinite(&f, &w, &p).unwrap();
        for k in 1..n {
            let r = restrict(&f, k, &p).unwrap();
            let part = norm_m_infty_1(&r, &w.window(k, &p).unwrap(), &p).unwrap();
            assert!(
                part.lower <= full.upper * (1.0 + 1e-10),
                "trial {trial} ({}), k={k}: {part:?} vs {full:?}",
                f.base.kind_name()
            );
        }
    }
    let f = cyl(FunctionObject::one(4));
    let r = restrict(&f, 2, &p).unwrap();
    let ratio = norm_m_infty_1(&r, &w.window(2, &p).unwrap(), &p).unwrap().value / norm_infinite(&f, &w, &p).unwrap().value;
    assert!((ratio - 1.0).abs() < 1e-14);
}

#[test]
fn restriction_limit_inequality_on_product_partials() {
    let p = p1();
    let w = halves();
    let seq = product_sequence(true);
    for (m, n, k) in [(2, 4, 1), (2, 6, 3), (4, 8, 2), (3, 5, 5)] {
        let gap = cauchy_distance(&seq.term(n, &p).unwrap(), &seq.term(m, &p).unwrap(), &w, &p).unwrap();
        let rn = cyl(restrict(&seq.term(n, &p).unwrap(), k, &p).unwrap());
        let rm = cyl(restrict(&seq.term(m, &p).unwrap(), k, &p).unwrap());
        let rgap = cauchy_distance(&rn, &rm, &w, &p).unwrap();
        assert!(rgap.lower <= gap.upper * (1.0 + 1e-10), "({m},{n},{k}): {rgap:?} vs {gap:?}");
    }
}

// ---------------------------------------------------------------- pointwise bounds

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pointwise_difference_is_below_the_distance(seed in 0u64..1000, kf in 0usize..6, kg in 0usize..6, m in 1usize..3, n in 1usize..4) {
        let p = p1();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = cyl(corpus_member(kf, m, &mut rng));
        let g = cyl(corpus_member(kg, n, &mut rng));
        let d = cauchy_distance(&f, &g, &halves(), &p).unwrap();
        for _ in 0..10 {
            let len = rng.gen_range(1..6);
            let x: Vec<f64> = (0..len).map(|_| rng.gen_range(-4.0..4.0)).collect();
            let gap = (f.evaluate(&x, &p).unwrap() - g.evaluate(&x, &p).unwrap()).norm();
            prop_assert!(gap <= d.upper * (1.0 + 1e-9) + 1e-12, "gap {} vs {:?}", gap, d);
        }
    }

    #[test]
    fn sup_norm_is_below_the_sjostrand_norm(seed in 0u64..1000, kind in 0usize..6, m in 1usize..4) {
        let p = Params::new(0.6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = cyl(corpus_member(kind, m, &mut rng));
        let v = norm_infinite(&f, &halves(), &p).unwrap();
        for _ in 0..200 {
            let x: Vec<f64> = (0..m).map(|_| rng.gen_range(-5.0..5.0)).collect();
            prop_assert!(f.evaluate(&x, &p).unwrap().norm() <= v.upper * (1.0 + 1e-12));
        }
    }
}

// ---------------------------------------------------------------- L_min and L

#[test]
fn l_min_of_plane_wave_cylinder() {
    let p = Params::new(0.3).unwrap();
    let k = [0.5, -1.0, 0.25];
    let f = cyl(FunctionObject::plane_wave(k.to_vec(), true, false).unwrap());
    let k2: f64 = k.iter().map(|v| v * v).sum();
    let expect = Complex64::from_polar(1.0, -k2 / (2.0 * 0.3));
    assert!((l_min(&f, &halves(), &p).unwrap().value - expect).norm() < 1e-13);
    assert!((l_min(&f.extend(7).unwrap(), &halves(), &p).unwrap().value - expect).norm() < 1e-13);
}

#[test]
fn l_min_of_one_dimensional_sampled_base_uses_phase_space() {
    let p = p1();
    let f = cyl(FunctionObject::sampled(1, "cos", |x: &[f64]| c(x[0].cos(), 0.0)).unwrap());
    let v = l_min(&f, &halves(), &p).unwrap().value;
    let expect = Complex64::from_polar(1.0, -0.5);
    assert!((v - expect).norm() < 1e-5, "{v} vs {expect}");
}

fn product_closed(hbar: f64, hbar_scaled: bool, n: usize) -> Complex64 {
    (1..=n)
        .map(|j| {
            let p = if hbar_scaled { 2.0 / hbar } else { 2.0 };
            one() + 0.5f64.powi(j as i32) * Complex64::from_polar(1.0, -hbar * p * p / 2.0)
        })
        .product()
}

#[test]
fn product_family_topological_value() {
    for (hbar, scaled) in [(1.0, true), (0.5, true), (0.5, false)] {
        let p = Params::new(hbar).unwrap();
        let r = l_topological(&product_sequence(scaled), &halves(), &p, &CauchyOptions::default()).unwrap();
        let expect = product_closed(hbar, scaled, 60);
        assert!((r.value - expect).norm() < 1e-12, "{} vs {expect}", r.value);
        assert!(r.error_estimate <= 1e-15);
        assert_eq!(r.certificate.pairs.len(), 5);
        assert!(r.certificate.pairs.last().unwrap().upper < 1e-4);
        // the finite-dimensional functional agrees on each partial product
        let f5 = product_sequence(scaled).term(5, &p).unwrap();
        assert!((l_min(&f5, &halves(), &p).unwrap().value - product_closed(hbar, scaled, 5)).norm() < 1e-13);
    }
}

#[test]
fn product_family_value_matches_direct_fresnel_integral() {
    let p = Params::new(0.5).unwrap();
    let seq = product_sequence(true);
    let f2 = seq.term(2, &p).unwrap();
    let sched = RegularizerSchedule::halving(Mollifier::Gaussian, 16);
    let d = fresnel_direct(&f2.base, &sched, &p, &DirectOptions::default()).unwrap();
    assert!((d.value - product_closed(0.5, true, 2)).norm() < 1e-6, "{} vs {}", d.value, product_closed(0.5, true, 2));
}

#[test]
fn plane_wave_sequence_fails_the_cauchy_check_with_distance_two() {
    let p = p1();
    let seq = CylinderSequence::PlaneWave { k: RealSequence::geometric(0.5, 0.5) };
    match l_topological(&seq, &halves(), &p, &CauchyOptions::default()) {
        Err(FresnelError::CauchyCheckFailed { n, m, distance }) => {
            assert_eq!((m, n), (16, 32));
            assert!((distance - 2.0).abs() < 1e-6, "{distance}");
        }
        other => panic!("expected CauchyCheckFailed, got {other:?}"),
    }
}

/// `int sup_x |V_g f(x, xi)| dxi` for `f = exp(-r y^2 / 2)` and
/// `g = (2 pi)^(-1/2) exp(-q y^2 / 2)` at hbar = 1, by brute quadrature of
/// the defining integrals.
fn gaussian_norm_oracle(r: f64, q: f64) -> f64 {
    let stft = |x: f64, xi: f64| -> f64 {
        let h = 0.01;
        let reach = 12.0 / (r + q).sqrt() + x.abs();
        let n = (2.0 * reach / h) as usize;
        let mut s = c(0.0, 0.0);
        for j in 0..=n {
            let y = -reach + j as f64 * h;
            let wt = if j == 0 || j == n { 0.5 } else { 1.0 };
            let g = (2.0 * PI).powf(-0.5) * (-q * (y - x) * (y - x) / 2.0).exp();
            s += Complex64::from_polar(wt * (-r * y * y / 2.0).exp() * g, -xi * y);
        }
        (s * h / (2.0 * PI).sqrt()).norm()
    };
    let hx = 0.05;
    let xs: Vec<f64> = (-80..=80).map(|j| j as f64 * hx).collect();
    let hxi = 0.02;
    let span = 12.0 * (r + q).sqrt();
    let m = (span / hxi) as i64;
    (-m..=m)
        .map(|j| {
            let xi = j as f64 * hxi;
            xs.iter().map(|x| stft(*x, xi)).fold(0.0, f64::max)
        })
        .sum::<f64>()
        * hxi
}

#[test]
fn gaussian_sequence_is_not_cauchy() {
    let p = p1();
    let r = RealSequence::geometric(0.5, 0.5);
    let seq = CylinderSequence::Gaussian { r: r.clone() };
    let w = halves();

    // every factor has norm one, so the lower bound of the paired distance is one
    let oracle: f64 = (1..=2).map(|j| gaussian_norm_oracle(r.term(j), w.q.term(j))).product();
    assert!(oracle >= 1.0 - 1e-6, "oracle {oracle}");
    let f2 = seq.term(2, &p).unwrap();
    assert!((norm_infinite(&f2, &w, &p).unwrap().value - oracle).abs() < 1e-6);

    for (m, n) in [(1, 2), (2, 4), (8, 16)] {
        let d = cauchy_distance(&seq.term(n, &p).unwrap(), &seq.term(m, &p).unwrap(), &w, &p).unwrap();
        assert!(d.lower >= 1.0 - 1e-6, "({m},{n}): {d:?}");
    }
    match l_topological(&seq, &w, &p, &CauchyOptions::default()) {
        Err(FresnelError::CauchyCheckFailed { distance, .. }) => assert!(distance >= 1.0 - 1e-6, "{distance}"),
        other => panic!("expected CauchyCheckFailed, got {other:?}"),
    }
}

#[test]
fn topological_limit_needs_square_summable_windows() {
    let p = p1();
    let w = WindowSequence::new(RealSequence::Constant { value: 1.0 }).unwrap();
    assert!(matches!(
        l_topological(&product_sequence(true), &w, &p, &CauchyOptions::default()),
        Err(FresnelError::InvalidParameter(_))
    ));
}

#[test]
fn gaussian_window_family_uses_first_weights() {
    let w = halves();
    let g = w.gaussian(3, 1.0).unwrap();
    assert_eq!(g.q, vec![1.0, 0.5, 0.25]);
    let b = w.uniform_bound(20).unwrap();
    assert!(b.convergent && b.sup_estimate >= b.partial);
}

// ---------------------------------------------------------------- L'

#[test]
fn l_prime_plane_wave() {
    let p = p1();
    let f = SequenceFunction::PlaneWaveL2 { k: RealSequence::geometric(0.5, 0.5) };
    let sched: Vec<usize> = (0..=6).map(|e| 1 << e).collect();
    let r = l_prime(&f, &p, &sched, 1e-4).unwrap();
    let expect = Complex64::from_polar(1.0, -1.0 / 6.0);
    assert!((r.value - expect).norm() < 1e-8, "{} vs {expect}", r.value);
    assert!(r.certified && r.error_estimate < 1e-30);
    assert_eq!(r.trace.len(), 7);
    assert!((r.trace[0].1 - Complex64::from_polar(1.0, -0.125)).norm() < 1e-15);
}

#[test]
fn l_prime_gaussian_product() {
    let p = p1();
    let f = SequenceFunction::GaussianL1 { r: RealSequence::geometric(0.5, 0.5) };
    let r = l_prime(&f, &p, &default_schedule(), 1e-10).unwrap();
    // prod (1 + i r)^(-1/2) in polar form
    let (mut log_mod, mut arg) = (0.0, 0.0);
    for j in 1..=60 {
        let rj = 0.5f64.powi(j);
        log_mod -= 0.25 * (rj * rj).ln_1p();
        arg -= 0.5 * rj.atan();
    }
    let expect = Complex64::from_polar(log_mod.exp(), arg);
    assert!((r.value - expect).norm() < 1e-10, "{} vs {expect}", r.value);
    assert!(r.certified);
}

#[test]
fn l_prime_gaussian_restrictions_match_direct_integral() {
    let p = Params::new(0.7).unwrap();
    let f = SequenceFunction::GaussianL1 { r: RealSequence::geometric(0.8, 0.5) };
    let r2 = f.restriction(2, &p).unwrap();
    let sched = RegularizerSchedule::halving(Mollifier::Gaussian, 16);
    let d = fresnel_direct(&r2, &sched, &p, &DirectOptions::default()).unwrap();
    assert!((d.value - f.l_n(2, &p).unwrap()).norm() < 1e-8);
}

fn three_atoms() -> FunctionObject {
    FunctionObject::fourier_measure(
        DiscreteMeasure::new(
            1,
            [(1.0, c(0.5, 0.0)), (-0.5, c(0.2, 0.3)), (2.0, c(-0.1, 0.4))]
                .iter()
                .map(|(s, w)| MeasureAtom { point: vec![*s], weight: *w })
                .collect(),
        )
        .unwrap(),
    )
    .unwrap()
}

fn pushforward_oracle(lambda2: f64, hbar: f64) -> Complex64 {
    [(1.0, c(0.5, 0.0)), (-0.5, c(0.2, 0.3)), (2.0, c(-0.1, 0.4))]
        .iter()
        .map(|(s, w)| w * Complex64::from_polar(1.0, -0.5 * hbar * s * s * lambda2))
        .sum()
}

#[test]
fn l_prime_composite_of_atomic_measure() {
    let p = Params::new(0.8).unwrap();
    let k = RealSequence::geometric(1.0, 0.5);
    let f = SequenceFunction::Composite1D { h: three_atoms(), k: k.clone() };
    let r = l_prime(&f, &p, &default_schedule(), 1e-10).unwrap();
    let expect = pushforward_oracle(4.0 / 3.0, 0.8);
    assert!((r.value - expect).norm() < 1e-12, "{} vs {expect}", r.value);

    let r2 = f.restriction(2, &p).unwrap();
    let sched = RegularizerSchedule::halving(Mollifier::Gaussian, 16);
    let d = fresnel_direct(&r2, &sched, &p, &DirectOptions::default()).unwrap();
    let l2 = f.l_n(2, &p).unwrap();
    assert!((d.value - l2).norm() < 1e-6, "{} vs {l2}", d.value);
    assert!((l2 - pushforward_oracle(1.25, 0.8)).norm() < 1e-13);
}

#[test]
fn l_prime_composite_of_gaussian() {
    // L_n(exp(-a (k.x)^2 / 2hbar)) = (1 + i a lambda^2)^(-1/2) with lambda = ||pi_n k||
    let p = p1();
    let a = 0.6;
    let h = FunctionObject::complex_gaussian(vec![c(a, 0.0)]).unwrap();
    let f = SequenceFunction::Composite1D { h, k: RealSequence::geometric(1.0, 0.5) };
    for n in [1, 3] {
        let lam2 = (1..=n).map(|j| 0.25f64.powi(j as i32 - 1)).sum::<f64>();
        let expect = (one() + c(0.0, a * lam2)).sqrt().inv();
        let v = f.l_n(n, &p).unwrap();
        assert!((v - expect).norm() < 1e-6, "n={n}: {v} vs {expect}");
    }
    assert_eq!(f.tail_error(4, &p), None);
}

#[test]
fn l_prime_reports_non_settling_traces() {
    let p = p1();
    let f = SequenceFunction::PlaneWaveL2 { k: RealSequence::Power { scale: 1.0, exponent: 1.0 } };
    match l_prime(&f, &p, &default_schedule(), 1e-6) {
        Err(FresnelError::NonConvergent { trace }) => assert_eq!(trace.len(), 11),
        other => panic!("expected NonConvergent, got {other:?}"),
    }
}

#[test]
fn l_prime_rejects_missing_certificates_and_bad_schedules() {
    let p = p1();
    let no_tail = SequenceFunction::PlaneWaveL2 { k: RealSequence::Constant { value: 0.1 } };
    assert!(l_prime(&no_tail, &p, &default_schedule(), 1e-6).is_err());
    let f = SequenceFunction::PlaneWaveL2 { k: RealSequence::geometric(0.5, 0.5) };
    assert!(l_prime(&f, &p, &[1, 4, 2], 1e-6).is_err());
    assert!(l_prime(&f, &p, &[], 1e-6).is_err());
}

#[test]
fn topological_and_sequential_limits_agree_on_products() {
    for hbar in [1.0, 0.3] {
        let p = Params::new(hbar).unwrap();
        let seq = product_sequence(true);
        let topo = l_topological(&seq, &halves(), &p, &CauchyOptions::default()).unwrap();
        let sf = SequenceFunction::ProductFamily {
            a: RealSequence::geometric(0.5, 0.5),
            k: RealSequence::Constant { value: 2.0 },
            hbar_scaled: true,
        };
        let seqv = l_prime(&sf, &p, &default_schedule(), 1e-10).unwrap();
        assert!((topo.value - seqv.value).norm() < 1e-8);
        // the restrictions of the limit are the partial products themselves
        let rest = CylinderSequence::RestrictionOf { f: sf };
        assert_eq!(rest.term(4, &p).unwrap(), seq.term(4, &p).unwrap());
    }
}

// ---------------------------------------------------------------- composite pairing

#[test]
fn composite_pairing_at_zero_dilation_is_point_value() {
    let p = Params::new(0.7).unwrap();
    let g = Window::unit(1, 0.7).unwrap();
    let h = FunctionObject::complex_gaussian(vec![c(1.0, 0.5)]).unwrap();
    assert!((composite_dual_value(&h, 0.0, &g, &p).unwrap() - one()).norm() < 1e-6);
    let shifted = FunctionObject::affine_combo(vec![
        (c(2.0, 0.0), h),
        (c(0.0, 1.0), FunctionObject::plane_wave(vec![0.4], true, false).unwrap()),
    ])
    .unwrap();
    let expect = c(2.0, 1.0);
    assert!((composite_dual_value(&shifted, 0.0, &g, &p).unwrap() - expect).norm() < 1e-6);
}

#[test]
fn composite_pairing_of_single_atom() {
    let p = Params::new(0.6).unwrap();
    let g = Window::unit(1, 0.6).unwrap();
    for (s, lambda) in [(1.0, 1.0), (-1.5, 0.7), (0.5, 2.0)] {
        let h = FunctionObject::fourier_measure(DiscreteMeasure::single(vec![s], one())).unwrap();
        let v = composite_dual_value(&h, lambda, &g, &p).unwrap();
        let expect = Complex64::from_polar(1.0, -0.6 * s * s * lambda * lambda / 2.0);
        assert!((v - expect).norm() < 1e-6, "s={s} lambda={lambda}: {v} vs {expect}");
    }
}

#[test]
fn composite_pairing_matches_pushforward_and_converges() {
    let p = p1();
    let g = Window::unit(1, 1.0).unwrap();
    let k = RealSequence::geometric(1.0, 0.5);
    let h = three_atoms();
    let limit = composite_dual_value(&h, (4.0f64 / 3.0).sqrt(), &g, &p).unwrap();
    let mut prev_gap = f64::INFINITY;
    let mut gaps = Vec::new();
    for n in [1, 2, 4, 8, 16] {
        let lam2 = k.partial_sum(2.0, n);
        let v = composite_dual_value(&h, lam2.sqrt(), &g, &p).unwrap();
        assert!((v - pushforward_oracle(lam2, 1.0)).norm() < 1e-4, "n={n}");
        let gap = (v - limit).norm();
        assert!(gap <= prev_gap);
        prev_gap = gap;
        gaps.push(gap);
    }
    assert!(gaps[4] < 1e-5, "{gaps:?}");
    // doubling gaps shrink geometrically, so they are summable
    assert!(gaps[4] < 0.1 * gaps[3] && gaps[3] < 0.1 * gaps[2]);
    assert!((limit - pushforward_oracle(4.0 / 3.0, 1.0)).norm() < 1e-4);
}

#[test]
fn dilated_chirp_stft_matches_quadrature() {
    let hbar = 0.8;
    let p = Params::new(hbar).unwrap();
    let g = Window::unit(1, hbar).unwrap();
    let chirp = FunctionObject::chirp(1, 1).unwrap();
    for (lambda, x, xi) in [(1.0, 0.0, 0.0), (0.5, 1.2, -0.7), (1.7, -2.0, 1.5)] {
        let fast = dilated_chirp_stft(lambda, &g, x, xi, &p).unwrap();
        let h = 0.002;
        let n = 20_000;
        let mut s = c(0.0, 0.0);
        for j in 0..=n {
            let y = x - 20.0 + j as f64 * h;
            let wt = if j == 0 || j == n { 0.5 } else { 1.0 };
            let f = chirp.evaluate(&[lambda * y], &p).unwrap();
            s += wt * f * g.eval(&[y - x]).conj() * Complex64::from_polar(1.0, -xi * y / hbar);
        }
        let brute = s * h / (2.0 * PI * hbar).sqrt();
        assert!((fast - brute).norm() < 1e-8, "({lambda},{x},{xi}): {fast} vs {brute}");
    }
    assert!(dilated_chirp_stft(0.0, &g, 0.0, 0.0, &p).is_err());
}

// ---------------------------------------------------------------- inversion

#[test]
fn inversion_reproduces_gaussian_at_zero() {
    let p = p1();
    let g = Window::unit(1, 1.0).unwrap();
    let gamma = Window::chirped(0.5, 1, 1.0).unwrap();
    let h = FunctionObject::complex_gaussian(vec![c(1.0, 0.0)]).unwrap();
    let v = inversion_from_fourier(&h, &[0.0], &g, &gamma, &p).unwrap();
    assert!((v - one()).norm() < 1e-6, "{v}");
}

#[test]
fn inversion_reproduces_plane_wave_combinations() {
    let p = Params::new(0.9).unwrap();
    let g = Window::unit(1, 0.9).unwrap();
    let gamma = Window::chirped(0.5, 1, 0.9).unwrap();
    let h = three_atoms();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..6 {
        let t = rng.gen_range(-3.0..3.0);
        let v = inversion_from_fourier(&h, &[t], &g, &gamma, &p).unwrap();
        let e = h.evaluate(&[t], &p).unwrap();
        assert!((v - e).norm() < 1e-5, "t={t}: {v} vs {e}");
    }
}

#[test]
fn inversion_is_linear() {
    let p = p1();
    let g = Window::unit(1, 1.0).unwrap();
    let gamma = Window::chirped(0.3, 1, 1.0).unwrap();
    let h1 = FunctionObject::complex_gaussian(vec![c(0.8, 0.2)]).unwrap();
    let h2 = three_atoms();
    let sum = FunctionObject::affine_combo(vec![(one(), h1.clone()), (one(), h2.clone())]).unwrap();
    for t in [0.0, 0.7, -1.9] {
        let a = inversion_from_fourier(&h1, &[t], &g, &gamma, &p).unwrap();
        let b = inversion_from_fourier(&h2, &[t], &g, &gamma, &p).unwrap();
        let s = inversion_from_fourier(&sum, &[t], &g, &gamma, &p).unwrap();
        assert!((s - a - b).norm() < 1e-10);
    }
}

// ---------------------------------------------------------------- windowed plane-wave kernel

#[test]
fn appendix_kernel_sides_agree() {
    let p = p1();
    let g = Window::unit(1, 1.0).unwrap();
    for (x, xi) in [(0.3, -0.2), (-0.5, 0.7)] {
        let v = appendix_a_kernel(&[1.0], x, xi, 0.1, Mollifier::Gaussian, &g, &AppendixAGrids::default(), &p, 4_000_000)
            .unwrap();
        let lhs = v.lhs.expect("direct side fits in the node budget");
        assert!((lhs - v.rhs).norm() < 1e-4, "({x},{xi}): {lhs} vs {}", v.rhs);
    }
}

#[test]
fn appendix_kernel_without_frequency() {
    let p = Params::new(0.8).unwrap();
    let g = Window::unit(1, 0.8).unwrap();
    let v = appendix_a_kernel(&[0.0], 0.4, 0.9, 0.2, Mollifier::Gaussian, &g, &AppendixAGrids::default(), &p, 4_000_000)
        .unwrap();
    assert!((v.lhs.unwrap() - v.rhs).norm() < 1e-6, "{:?}", v);
}

#[test]
fn appendix_kernel_tends_to_the_closed_limit() {
    let p = p1();
    let g = Window::unit(1, 1.0).unwrap();
    let k = [0.8, 0.6];
    let (x, xi) = (0.4, -0.3);
    let limit = appendix_a_limit(&k, x, xi, &g, &p).unwrap();
    let mut prev = f64::INFINITY;
    for eps in [0.2, 0.1, 0.05, 0.025] {
        let v = appendix_a_kernel(&k, x, xi, eps, Mollifier::Gaussian, &g, &AppendixAGrids::default(), &p, 0).unwrap();
        let gap = (v.rhs - limit).norm();
        assert!(gap < prev, "eps={eps}: gap {gap} after {prev}");
        prev = gap;
    }
    assert!(prev < 1e-3, "{prev}");
}

// ---------------------------------------------------------------- envelope

#[test]
fn phi_values() {
    assert_eq!(phi_dominator(2, 1.0, 2.0, 1.5), 1.0);
    assert_eq!(phi_dominator(3, 0.5, -4.0, 1.0), 1.0);
    assert!((phi_dominator(2, 1.0, 0.0, 3.0) - 0.01).abs() < 1e-15);
    // distance to the nearer cone edge
    assert!((phi_dominator(1, 1.0, 1.0, 3.0) - 0.2).abs() < 1e-15);
}

#[test]
fn phi_tail_integral_bounded_by_frozen_constant() {
    let constant = phi_tail_constant(2, 1.0).unwrap();
    assert!((constant - PHI_TAIL_CONSTANT_M2_B1).abs() < 1e-14);
    assert!((constant - (4.0 + PI * PI / 4.0).sqrt()).abs() < 1e-14);
    for x in [0.0f64, 1.0, 10.0, 100.0] {
        // trapezoid plus the analytic tail beyond the cut, where Phi ~ (xi - |x| B^2)^(-4)
        let h = 0.001;
        let cut = 2.0 * x.abs() + 200.0;
        let n = (2.0 * cut / h) as usize;
        let mut s = 0.0;
        for j in 0..=n {
            let xi = -cut + j as f64 * h;
            let wt = if j == 0 || j == n { 0.5 } else { 1.0 };
            s += wt * phi_dominator(2, 1.0, x, xi);
        }
        let d = cut - x.abs();
        let quad = s * h + 2.0 / (3.0 * d.powi(3));
        let closed = phi_tail_integral(2, 1.0, x).unwrap();
        assert!((quad - closed).abs() < 1e-6, "x={x}: {quad} vs {closed}");
        assert!(quad <= PHI_TAIL_CONSTANT_M2_B1 * (1.0 + x * x).sqrt());
    }
    assert!(phi_tail_integral(0, 1.0, 0.0).is_err());
}

/// `max_xi |V_g (F_+ o lambda)(0, xi)| / Phi_{m,B}(0, xi)` for the unit window
/// at hbar = 1, where `|V_g (F_+ o lambda)(0, xi)| = (2 pi)^(-1/2) pi^(-1/4)
/// (1 + lambda^4)^(-1/4) exp(-xi^2 / 2(1 + lambda^4))`.
fn ratio_on_axis(lambda: f64, b: f64, m: i32) -> f64 {
    let s = 1.0 + lambda.powi(4);
    let amp = (2.0 * PI).powf(-0.5) * PI.powf(-0.25) * s.powf(-0.25);
    (0..=100_000)
        .map(|j| {
            let xi = j as f64 * 1e-4;
            amp * (-xi * xi / (2.0 * s)).exp() * (1.0 + xi * xi / (b * b)).powi(m)
        })
        .fold(0.0, f64::max)
}

#[test]
fn dominator_ratios_follow_the_axis_profile() {
    let p = p1();
    let g = Window::unit(1, 1.0).unwrap();
    let grid = GridSpec::new(6.0, 0.05).unwrap();
    let k = RealSequence::geometric(0.5, 0.5);
    let report = dominator_check(&k, &[1, 2, 4, 8], 2, &g, &grid, &p).unwrap();
    assert!((report.b - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
    for r in &report.rows {
        let axis = ratio_on_axis(r.lambda, report.b, 2);
        assert!((r.max_ratio - axis).abs() < 2e-3 * axis, "n={}: {} vs {axis}", r.n, r.max_ratio);
    }
    // the ratios increase towards the lambda = B value and the increments shrink
    let m: Vec<f64> = report.rows.iter().map(|r| r.max_ratio).collect();
    assert!(m.windows(2).all(|w| w[1] >= w[0]));
    assert!(m[3] - m[2] < m[2] - m[1] && m[2] - m[1] < m[1] - m[0]);
    assert!(report.constant <= ratio_on_axis(report.b, report.b, 2) * (1.0 + 2e-3));
    assert_eq!(report.stable, report.spread <= 0.05);

    let single = RealSequence::Explicit { values: vec![1.0], tail: None };
    let flat = dominator_check(&single, &[1, 2, 4, 8], 2, &g, &grid, &p).unwrap();
    let r0 = flat.rows[0].max_ratio;
    assert!(flat.rows.iter().all(|r| r.max_ratio == r0 && r.lambda == 1.0));
    assert_eq!(flat.spread, 0.0);
    assert!(flat.stable);

    // a sharper envelope can only raise the ratios
    let sharp = dominator_check(&k, &[1, 2, 4, 8], 6, &g, &grid, &p).unwrap();
    for (a, b) in sharp.rows.iter().zip(&report.rows) {
        assert!(a.max_ratio >= b.max_ratio);
    }
    assert!(sharp.constant.is_finite());
}

// ---------------------------------------------------------------- serialization

#[test]
fn sequence_function_json_with_template_tail() {
    let json = r#"{"kind": "plane_wave_l2", "k": {"type": "explicit", "values": [0.5, 0.25],
                   "tail": {"type": "geometric", "ratio": 0.5, "from": 3}}}"#;
    let f: SequenceFunction = serde_json::from_str(json).unwrap();
    match &f {
        SequenceFunction::PlaneWaveL2 { k: RealSequence::Explicit { tail: Some(TailTemplate::Geometric { ratio, from }), .. } } => {
            assert_eq!((*ratio, *from), (0.5, 3));
        }
        other => panic!("unexpected {other:?}"),
    }
    let back: SequenceFunction = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
    assert_eq!(back, f);
    let r = l_prime(&f, &p1(), &default_schedule(), 1e-12).unwrap();
    assert!((r.value - Complex64::from_polar(1.0, -1.0 / 6.0)).norm() < 1e-12);

    let comp = SequenceFunction::Composite1D { h: three_atoms(), k: RealSequence::geometric(1.0, 0.5) };
    let back: SequenceFunction = serde_json::from_str(&serde_json::to_string(&comp).unwrap()).unwrap();
    assert_eq!(back, comp);

    let w: WindowSequence = serde_json::from_str(r#"{"q": {"type": "geometric", "first": 1.0, "ratio": 0.5}}"#).unwrap();
    assert_eq!(w, halves());
    assert!(serde_json::from_str::<WindowSequence>(r#"{"q": {"type": "constant", "value": 1}, "extra": 1}"#).is_err());
}
