mod common;

use std::collections::BTreeMap;

use common::{three_node, two_node, unit_deltas};
use optrec_core::corpus;
use optrec_core::time_domain::apply_time_operator;
use optrec_core::{
    apply_method, build_bump, build_multipliers, recover_time_domain, simulate_trial,
    solve_envelope, AlphaVec, Complex64, Error, NoiseMode, NormIndex, SampledSignal,
    SpectralFunction, WeightFamily,
};

const L2: NormIndex = NormIndex::Finite(2.0);

#[test]
fn adversarial_noise_on_bump_nearly_attains_bound() {
    let problem = three_node(L2, WeightFamily::Axis);
    let sol = solve_envelope(&problem).unwrap();
    let fam = build_multipliers(&problem, &sol);
    let bump = build_bump(&problem, &sol, 1e-3).unwrap();
    let r = simulate_trial(
        &problem,
        &sol,
        &fam,
        &bump.function,
        NoiseMode::AdversarialAligned,
        0,
    )
    .unwrap();
    assert!(r.admissible);
    assert!(
        r.achieved_error >= 0.98 * r.bound,
        "{} vs {}",
        r.achieved_error,
        r.bound
    );
    assert!(r.within_bound);
}

#[test]
fn random_ball_trials_stay_below_bound() {
    let problem = three_node(L2, WeightFamily::RadialPower { theta: 2.0 });
    let sol = solve_envelope(&problem).unwrap();
    let fam = build_multipliers(&problem, &sol);
    let mut rng = corpus::rng(11);
    for seed in 0..100 {
        let x = corpus::random_spectrum(&mut rng, 1, 96);
        let r = simulate_trial(&problem, &sol, &fam, &x, NoiseMode::RandomBall, seed).unwrap();
        assert!(r.within_bound && r.admissible, "seed {seed}: {r:?}");
    }
}

#[test]
fn trials_are_deterministic() {
    let problem = unit_deltas(L2, WeightFamily::Axis);
    let sol = solve_envelope(&problem).unwrap();
    let fam = build_multipliers(&problem, &sol);
    let x = corpus::random_spectrum(&mut corpus::rng(2), 1, 64);
    let a = simulate_trial(&problem, &sol, &fam, &x, NoiseMode::RandomBall, 9).unwrap();
    let b = simulate_trial(&problem, &sol, &fam, &x, NoiseMode::RandomBall, 9).unwrap();
    assert_eq!(a, b);
}

#[test]
fn method_rejects_mixed_grids() {
    let problem = three_node(L2, WeightFamily::Axis);
    let sol = solve_envelope(&problem).unwrap();
    let fam = build_multipliers(&problem, &sol);
    let a = corpus::random_spectrum(&mut corpus::rng(1), 1, 16);
    let b = corpus::random_spectrum(&mut corpus::rng(1), 1, 18);
    let err = apply_method(&fam, &BTreeMap::from([(0, a), (1, b)])).unwrap_err();
    assert!(matches!(err, Error::GridMismatch(_)));
}

#[test]
fn bump_examples() {
    for problem in [
        three_node(L2, WeightFamily::Axis),
        unit_deltas(L2, WeightFamily::Axis),
    ] {
        let sol = solve_envelope(&problem).unwrap();
        let out = build_bump(&problem, &sol, 1e-3).unwrap();
        assert!(out.admissible);
        assert!((0.99..=1.0).contains(&out.ratio), "{}", out.ratio);
        let levels: Vec<f64> = sol.eta_hat.iter().map(|e| (-e).exp()).collect();
        let at_center = problem.weight().levels(&out.bump.center);
        for (m, l) in at_center.moduli.iter().zip(&levels) {
            assert!((m - l).abs() <= 1e-12 * l);
        }
    }
}

#[test]
fn time_domain_laplacian_matches_symbol() {
    let problem = three_node(L2, WeightFamily::RadialPower { theta: 2.0 });
    let x = SampledSignal::from_fn(vec![-12.8], vec![0.05], vec![512], |t| {
        Complex64::new((-t[0] * t[0]).exp(), 0.0)
    })
    .unwrap();
    let lap = apply_time_operator(&problem, &x, &AlphaVec::new(vec![1.0]).unwrap()).unwrap();
    // −(e^{−t²})'' = (2 − 4t²)e^{−t²}
    for (i, v) in lap.values.iter().enumerate() {
        let t = -12.8 + i as f64 * 0.05;
        let exact = (2.0 - 4.0 * t * t) * (-t * t).exp();
        assert!((v.re - exact).abs() < 1e-10 && v.im.abs() < 1e-10);
    }
}

#[test]
fn time_domain_two_node_demo() {
    let problem = two_node(L2, WeightFamily::Axis, 0.01, 2.0, 1.0);
    let sol = solve_envelope(&problem).unwrap();
    let fam = build_multipliers(&problem, &sol);
    let x = SampledSignal::from_fn(vec![-25.6], vec![0.05], vec![1024], |t| {
        Complex64::new(0.004 * (-t[0] * t[0] / 8.0).exp() * (3.0 * t[0]).cos(), 0.0)
    })
    .unwrap();
    let truth = apply_time_operator(&problem, &x, &AlphaVec::new(vec![1.0]).unwrap()).unwrap();
    let second = apply_time_operator(&problem, &x, &AlphaVec::new(vec![2.0]).unwrap()).unwrap();
    assert!(second.norm_l2() <= 1.0);
    let out = recover_time_domain(&problem, &fam, &BTreeMap::from([(0, x)]), Some(&truth)).unwrap();
    assert!(out.error.unwrap() <= 0.1);
    assert!(out.boundary_mass < 1e-10);
}

#[test]
fn time_domain_requires_l2_and_matching_lattices() {
    let problem = two_node(NormIndex::Finite(1.0), WeightFamily::Axis, 0.01, 2.0, 1.0);
    let sol = solve_envelope(&problem).unwrap();
    let fam = build_multipliers(&problem, &sol);
    let x = SampledSignal::from_fn(vec![0.0], vec![0.1], vec![8], |_| Complex64::new(1.0, 0.0))
        .unwrap();
    let r = recover_time_domain(&problem, &fam, &BTreeMap::from([(0, x.clone())]), None);
    assert!(matches!(r, Err(Error::UnsupportedNorm(_))));

    let problem = problem.with_p(L2).unwrap();
    let y = SampledSignal::from_fn(vec![0.0], vec![0.2], vec![8], |_| Complex64::new(1.0, 0.0))
        .unwrap();
    let r = recover_time_domain(&problem, &fam, &BTreeMap::from([(0, x), (1, y)]), None);
    assert!(matches!(r, Err(Error::GridMismatch(_))));
}

#[test]
fn spectral_csv_round_trip() {
    let x = corpus::random_spectrum(&mut corpus::rng(5), 2, 6);
    let mut buf = Vec::new();
    x.write_csv(&mut buf).unwrap();
    let y = SpectralFunction::read_csv(buf.as_slice()).unwrap();
    assert_eq!(x.values(), y.values());
    assert_eq!(x.grid().shape(), y.grid().shape());
}
