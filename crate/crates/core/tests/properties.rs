use proptest::prelude::*;

use optrec_core::corpus::{self, CorpusConfig};
use optrec_core::{
    build_multipliers, envelope_oracle, solve_envelope, verify_inequality, NormIndex,
    RecoveryProblem,
};

fn instance() -> impl Strategy<Value = RecoveryProblem> {
    (any::<u64>(), 0usize..3).prop_map(|(seed, pi)| {
        let p = [
            NormIndex::Finite(1.0),
            NormIndex::Finite(2.0),
            NormIndex::Infinity,
        ][pi];
        corpus::random_instance(&mut corpus::rng(seed), &CorpusConfig::default(), p)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn active_set_is_small_and_weights_sum_to_one(problem in instance()) {
        let sol = solve_envelope(&problem).unwrap();
        prop_assert!(!sol.active.is_empty() && sol.active.len() <= problem.k() + 1);
        prop_assert!(sol.active.iter().all(|a| a.theta > 0.0));
        prop_assert!((sol.thetas().iter().sum::<f64>() - 1.0).abs() < 1e-10);
        prop_assert!(sol.active.windows(2).all(|w| w[0].index < w[1].index));
    }

    #[test]
    fn hyperplane_dominates_every_node(problem in instance()) {
        let sol = solve_envelope(&problem).unwrap();
        for n in problem.nodes() {
            let height = -n.delta.ln();
            prop_assert!(sol.hyperplane_at(n.alpha.as_slice()) >= height - 1e-9 * (1.0 + height.abs()));
        }
        let s = sol.hyperplane_at(problem.target().as_slice());
        prop_assert!((s - sol.s_value).abs() <= 1e-9 * (1.0 + sol.s_value.abs()));
    }

    #[test]
    fn smaller_errors_never_hurt(problem in instance(), j in 0usize..7, shrink in 0.01f64..1.0) {
        let j = j % problem.nodes().len();
        let mut deltas: Vec<f64> = problem.nodes().iter().map(|n| n.delta).collect();
        deltas[j] *= shrink;
        let before = solve_envelope(&problem).unwrap().error;
        let after = solve_envelope(&problem.with_deltas(&deltas).unwrap()).unwrap().error;
        prop_assert!(after <= before * (1.0 + 1e-12));
    }

    #[test]
    fn error_scales_with_common_factor(problem in instance(), c in 1e-3f64..1e3) {
        let deltas: Vec<f64> = problem.nodes().iter().map(|n| n.delta * c).collect();
        let e = solve_envelope(&problem).unwrap().error;
        let ec = solve_envelope(&problem.with_deltas(&deltas).unwrap()).unwrap().error;
        prop_assert!((ec - c * e).abs() <= 1e-10 * c * e);
    }

    #[test]
    fn oracle_agrees(problem in instance()) {
        let s = solve_envelope(&problem).unwrap();
        let o = envelope_oracle(&problem).unwrap();
        prop_assert!((s.s_value - o.s_value).abs() <= 1e-9 * s.s_value.abs().max(1.0));
    }

    #[test]
    fn balance_is_minimized_at_contact(problem in instance(), seed in any::<u64>()) {
        use rand::Rng;
        let sol = solve_envelope(&problem).unwrap();
        let fam = build_multipliers(&problem, &sol);
        prop_assert!(fam.balance(&sol.eta_hat).abs() < 1e-9);
        let mut rng = corpus::rng(seed);
        for _ in 0..20 {
            let eta: Vec<f64> = sol.eta_hat.iter().map(|e| e + rng.gen_range(-3.0..3.0)).collect();
            prop_assert!(fam.balance(&eta) >= -1e-9);
        }
    }

    #[test]
    fn inequality_is_homogeneous(problem in instance(), seed in any::<u64>(), c in 1e-3f64..1e3) {
        let x = corpus::random_spectrum(&mut corpus::rng(seed), problem.d(), 12);
        let r1 = verify_inequality(&problem, &x).unwrap();
        let r2 = verify_inequality(&problem, &x.scaled(c)).unwrap();
        prop_assert!(r1.holds);
        prop_assert!((r1.ratio - r2.ratio).abs() <= 1e-12 * r1.ratio.max(1.0));
    }
}
