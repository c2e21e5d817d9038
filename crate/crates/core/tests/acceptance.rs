//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p optrec-core --test acceptance`.

mod common;

use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;

use common::{three_node, two_node, unit_deltas, NORMS};
use optrec_core::corpus::{self, CorpusConfig};
use optrec_core::inequality::sharpness_gap;
use optrec_core::time_domain::apply_time_operator;
use optrec_core::{
    build_bump, build_bump_with, build_multipliers, check_interpolation, check_norm_condition,
    envelope_oracle, recover_time_domain, simulate_trial, solve_envelope, verify_inequality,
    AlphaVec, BumpConfig, Complex64, EtaGrid, FrequencyGrid, InfoNode, NodeKind, NoiseMode,
    NormIndex, RecoveryProblem, SampledSignal, WeightFamily,
};

struct Verdict {
    pass: bool,
    detail: String,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn criterion_1() -> Verdict {
    let problems = corpus::instances(1, 500, &CorpusConfig::default(), NormIndex::Finite(2.0));
    let mut worst_s = 0.0f64;
    let mut worst_product = 0.0f64;
    let mut worst_dual = 0.0f64;
    for p in &problems {
        let s = solve_envelope(p).expect("solver");
        let o = envelope_oracle(p).expect("oracle");
        worst_s = worst_s.max(rel(s.s_value, o.s_value));
        worst_product = worst_product.max(rel(s.weighted_product(), s.error));
        // the support hyperplanes are found independently of the primal weights
        let target = p.target().as_slice();
        let scale = s.s_value.abs().max(1.0);
        worst_dual = worst_dual
            .max((s.hyperplane_at(target) - s.s_value).abs() / scale)
            .max((o.hyperplane_at(target) - s.s_value).abs() / scale);
    }
    Verdict {
        pass: worst_s <= 1e-9 && worst_product <= 1e-12 && worst_dual <= 1e-9,
        detail: format!(
            "500 instances, max rel S gap {worst_s:.2e} (<= 1e-9), max rel product gap {worst_product:.2e} (<= 1e-12), max dual gap {worst_dual:.2e}"
        ),
    }
}

fn criterion_2() -> Verdict {
    let p = three_node(NormIndex::Finite(2.0), WeightFamily::Axis);
    let s = solve_envelope(&p).unwrap();
    let o = envelope_oracle(&p).unwrap();
    let theta = s.thetas();
    let three_ok = (s.error - 0.02f64.sqrt()).abs() <= 1e-9
        && (o.error - 0.02f64.sqrt()).abs() <= 1e-9
        && s.active_indices() == vec![0, 2]
        && theta.len() == 2
        && theta.iter().all(|t| (t - 0.5).abs() <= 1e-9);
    let q = two_node(NormIndex::Finite(2.0), WeightFamily::Axis, 0.01, 2.0, 1.0);
    let s2 = solve_envelope(&q).unwrap();
    let o2 = envelope_oracle(&q).unwrap();
    let two_ok = (s2.error - 0.1).abs() <= 1e-12 && (o2.error - 0.1).abs() <= 1e-12;
    Verdict {
        pass: three_ok && two_ok,
        detail: format!(
            "three-node error {:.15} active {:?} theta {:?}; two-node error {:.15}",
            s.error,
            s.active_indices(),
            theta,
            s2.error
        ),
    }
}

fn criterion_3() -> Verdict {
    let norms = [
        NormIndex::Finite(1.0),
        NormIndex::Finite(1.5),
        NormIndex::Finite(2.0),
        NormIndex::Finite(3.0),
        NormIndex::Infinity,
    ];
    let base = corpus::instances(3, 40, &CorpusConfig::default(), NormIndex::Finite(2.0));
    let mut rng = corpus::rng(33);
    let (mut worst_interp, mut worst_cert, mut worst_touch) = (0.0f64, 0.0f64, f64::INFINITY);
    let mut checked = 0;
    for problem in &base {
        let samples = corpus::frequency_samples(&mut rng, problem.d(), 200);
        let grid = EtaGrid::default_for(problem.k());
        for &p in &norms {
            let problem = problem.with_p(p).unwrap();
            let sol = solve_envelope(&problem).unwrap();
            let fam = build_multipliers(&problem, &sol);
            let mut pts = samples.clone();
            pts.push(sol.eta_hat.iter().map(|e| (-e).exp()).collect());
            worst_interp = worst_interp.max(check_interpolation(&fam, &pts));
            let cert = check_norm_condition(&fam, &grid);
            worst_cert = worst_cert.max(cert.max_normalized);
            worst_touch = worst_touch.min(cert.touch_value);
            checked += 1;
        }
    }
    Verdict {
        pass: worst_interp <= 1e-10 && worst_cert <= 1.0 + 1e-10 && worst_touch >= 1.0 - 1e-6,
        detail: format!(
            "{checked} (instance, p) pairs, interpolation {worst_interp:.2e} (<= 1e-10), certificate max {worst_cert:.12} (<= 1+1e-10), touch min {worst_touch:.12} (>= 1-1e-6)"
        ),
    }
}

fn all_observed(problem: &RecoveryProblem) -> RecoveryProblem {
    let nodes = problem
        .nodes()
        .iter()
        .map(|n| InfoNode::new(n.alpha.clone(), n.delta, NodeKind::Observed).unwrap())
        .collect();
    RecoveryProblem::new(
        problem.d(),
        problem.p(),
        problem.weight().clone(),
        problem.target().clone(),
        nodes,
    )
    .unwrap()
}

fn criterion_4() -> Verdict {
    let l2 = NormIndex::Finite(2.0);
    let cfg = CorpusConfig {
        max_k: 2,
        ..CorpusConfig::default()
    };
    let mut problems = vec![
        three_node(l2, WeightFamily::Axis),
        two_node(l2, WeightFamily::Axis, 0.01, 2.0, 1.0),
        unit_deltas(l2, WeightFamily::Axis),
    ];
    problems.extend(corpus::instances(4, 12, &cfg, l2));
    let points = |d: usize| if d == 1 { 128 } else { 24 };

    let mut worst_ratio = 0.0f64;
    let mut trials = 0;
    let mut worst_exact = 0.0f64;
    for (i, problem) in problems.iter().enumerate() {
        let sol = solve_envelope(problem).unwrap();
        let fam = build_multipliers(problem, &sol);
        let mut rng = corpus::rng(400 + i as u64);
        for t in 0..100u64 {
            let x = corpus::random_spectrum(&mut rng, problem.d(), points(problem.d()));
            let mode = if t % 2 == 0 {
                NoiseMode::RandomBall
            } else {
                NoiseMode::AdversarialAligned
            };
            let r = simulate_trial(problem, &sol, &fam, &x, mode, t).unwrap();
            worst_ratio = worst_ratio.max(r.achieved_error / r.bound);
            trials += 1;
        }
        let full = all_observed(problem);
        let fsol = solve_envelope(&full).unwrap();
        let ffam = build_multipliers(&full, &fsol);
        for t in 0..5u64 {
            let x = corpus::random_spectrum(&mut rng, full.d(), points(full.d()));
            let r = simulate_trial(&full, &fsol, &ffam, &x, NoiseMode::Exact, t).unwrap();
            worst_exact = worst_exact.max(r.achieved_error / r.target_norm);
        }
    }
    Verdict {
        pass: worst_ratio <= 1.0 + 1e-8 && worst_exact <= 1e-10,
        detail: format!(
            "{trials} noisy trials, max error/bound {worst_ratio:.12} (<= 1+1e-8); exact-data max rel error {worst_exact:.2e} (<= 1e-10)"
        ),
    }
}

fn named_instances(p: NormIndex) -> Vec<(String, RecoveryProblem)> {
    vec![
        (
            "three-node/axis".to_string(),
            three_node(p, WeightFamily::Axis),
        ),
        (
            "three-node/radial2".to_string(),
            three_node(p, WeightFamily::RadialPower { theta: 2.0 }),
        ),
        (
            "two-node".to_string(),
            two_node(p, WeightFamily::Axis, 0.01, 2.0, 1.0),
        ),
        (
            "unit-deltas".to_string(),
            unit_deltas(p, WeightFamily::Axis),
        ),
    ]
}

fn criterion_5() -> Verdict {
    let cfg = CorpusConfig {
        max_k: 1,
        ..CorpusConfig::default()
    };
    let mut worst = f64::INFINITY;
    let mut worst_name = String::new();
    let mut all_admissible = true;
    let mut count = 0;
    let (mut absolute_random_ok, mut random_total) = (0, 0);
    for p in NORMS {
        let mut cases: Vec<(String, RecoveryProblem, BumpConfig)> = named_instances(p)
            .into_iter()
            .map(|(n, q)| (n, q, BumpConfig::new(1e-3)))
            .collect();
        // random instances span many orders of magnitude in δ and |φ|, where an
        // absolute tolerance of 1e-3 is not small; they use the relative measure
        for (i, q) in corpus::instances(5, 20, &cfg, p).into_iter().enumerate() {
            let sol = solve_envelope(&q).unwrap();
            random_total += 1;
            if build_bump(&q, &sol, 1e-3).is_ok_and(|o| o.ratio >= 0.99 && o.admissible) {
                absolute_random_ok += 1;
            }
            cases.push((
                format!("random-{i}/relative"),
                q,
                BumpConfig::relative(1e-3),
            ));
        }
        for (name, problem, bump_cfg) in cases {
            let sol = solve_envelope(&problem).unwrap();
            match build_bump_with(&problem, &sol, &bump_cfg) {
                Ok(out) => {
                    all_admissible &= out.admissible;
                    if out.ratio < worst {
                        worst = out.ratio;
                        worst_name = format!("{name} p={p}");
                    }
                }
                Err(e) => {
                    worst = f64::NEG_INFINITY;
                    worst_name = format!("{name} p={p}: {e}");
                }
            }
            count += 1;
        }
    }
    Verdict {
        pass: worst >= 0.99 && all_admissible,
        detail: format!(
            "{count} bumps at eps=1e-3, min ratio {worst:.6} ({worst_name}) (>= 0.99), all admissible: {all_admissible}; absolute measure on random instances: {absolute_random_ok}/{random_total} reach 0.99"
        ),
    }
}

fn with_weight(problem: &RecoveryProblem, weight: WeightFamily, d: usize) -> RecoveryProblem {
    RecoveryProblem::new(
        d,
        problem.p(),
        weight,
        problem.target().clone(),
        problem.nodes().to_vec(),
    )
    .unwrap()
}

fn criterion_6() -> Verdict {
    let mut worst_ratio = 0.0f64;
    let mut functions = 0;
    for (pi, p) in NORMS.into_iter().enumerate() {
        let mut rng = corpus::rng(600 + pi as u64);
        let axis_cfg = CorpusConfig::default();
        let radial_cfg = CorpusConfig {
            max_k: 1,
            ..CorpusConfig::default()
        };
        for family in 0..2 {
            for _ in 0..200 {
                let problem = if family == 0 {
                    corpus::random_instance(&mut rng, &axis_cfg, p)
                } else {
                    let base = corpus::random_instance(&mut rng, &radial_cfg, p);
                    let theta = rng.gen_range(0.5..3.0);
                    let d = rng.gen_range(1..=2);
                    with_weight(&base, WeightFamily::RadialPower { theta }, d)
                };
                let x = corpus::random_spectrum(
                    &mut rng,
                    problem.d(),
                    corpus::default_points(problem.d()),
                );
                let r = verify_inequality(&problem, &x).unwrap();
                worst_ratio = worst_ratio.max(r.ratio);
                functions += 1;
            }
        }
    }
    let mut sharp_ok = true;
    let mut last_min = f64::INFINITY;
    for p in NORMS {
        for problem in [
            three_node(p, WeightFamily::Axis),
            two_node(p, WeightFamily::Axis, 0.01, 2.0, 1.0),
            unit_deltas(p, WeightFamily::Axis),
        ] {
            let t = sharpness_gap(&problem, &[1e-1, 1e-2, 1e-3]).unwrap();
            let last = t.rows.last().unwrap().ratio;
            last_min = last_min.min(last);
            sharp_ok &= t.monotone && last >= 0.99 && t.rows[0].ratio >= 0.5;
        }
    }
    Verdict {
        pass: worst_ratio <= 1.0 + 1e-8 && sharp_ok,
        detail: format!(
            "{functions} functions (axis + radial, p in 1,2,inf), max ratio {worst_ratio:.12} (<= 1+1e-8); sharpness monotone with min final ratio {last_min:.6} (>= 0.99)"
        ),
    }
}

fn criterion_7() -> Verdict {
    let l2 = NormIndex::Finite(2.0);
    let problem = two_node(l2, WeightFamily::Axis, 0.01, 2.0, 1.0);
    let sol = solve_envelope(&problem).unwrap();
    let fam = build_multipliers(&problem, &sol);
    let (n, h) = (1024usize, 0.05);
    let start = -(n as f64) * h / 2.0;
    // wave packet concentrated at the contact frequency 10
    let packet = SampledSignal::from_fn(vec![start], vec![h], vec![n], |t| {
        Complex64::new((-t[0] * t[0] / 8.0).exp() * (10.0 * t[0]).cos(), 0.0)
    })
    .unwrap();
    let second =
        apply_time_operator(&problem, &packet, &AlphaVec::new(vec![2.0]).unwrap()).unwrap();
    let scale = 1.0 / second.norm_l2();
    let x = SampledSignal::new(
        packet.start.clone(),
        packet.spacing.clone(),
        packet.shape.clone(),
        packet.values.iter().map(|v| v * scale).collect(),
    )
    .unwrap();
    let truth = apply_time_operator(&problem, &x, &AlphaVec::new(vec![1.0]).unwrap()).unwrap();

    let mut rng = corpus::rng(7);
    let xnorm = x.norm_l2();
    let noises: Vec<Vec<Complex64>> =
        vec![x.values.iter().map(|v| -v * (0.01 / xnorm)).collect(), {
            let raw: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0))
                .collect();
            let s = SampledSignal::new(
                x.start.clone(),
                x.spacing.clone(),
                x.shape.clone(),
                raw.clone(),
            )
            .unwrap();
            let k = 0.01 / s.norm_l2();
            raw.iter().map(|v| v * k).collect()
        }];
    let mut worst = 0.0f64;
    let mut boundary = 0.0f64;
    for z in noises {
        let y = SampledSignal::new(
            x.start.clone(),
            x.spacing.clone(),
            x.shape.clone(),
            x.values.iter().zip(&z).map(|(a, b)| a + b).collect(),
        )
        .unwrap();
        let out =
            recover_time_domain(&problem, &fam, &BTreeMap::from([(0, y)]), Some(&truth)).unwrap();
        worst = worst.max(out.error.unwrap());
        boundary = boundary.max(out.boundary_mass);
    }

    let radial = three_node(l2, WeightFamily::RadialPower { theta: 2.0 });
    let grid = FrequencyGrid::cube(&[0.0], 60.0, 1024).unwrap();
    let symbol_gap = grid
        .points()
        .map(|xi| {
            let v = radial.weight().power(&xi, &[1.0]);
            (v - Complex64::new(xi[0] * xi[0], 0.0)).norm() / (xi[0] * xi[0])
        })
        .fold(0.0, f64::max);
    Verdict {
        pass: worst <= 0.105 && symbol_gap <= 1e-12,
        detail: format!(
            "derivative demo L2 error {worst:.6} (<= 0.105, bound {:.6}, boundary mass {boundary:.1e}); psi_2 symbol rel gap {symbol_gap:.1e} (<= 1e-12)",
            sol.error
        ),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 7] = [
        ("envelope/oracle equivalence", criterion_1),
        ("closed-form instances", criterion_2),
        ("optimal-method certification", criterion_3),
        ("upper bound in trials", criterion_4),
        ("lower bound via bumps", criterion_5),
        ("inequality exactness", criterion_6),
        ("derivative and Laplacian wrapper", criterion_7),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let v = run();
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {} [{}] {name}: {} ({:.1}s)",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            started.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} of 7 criteria failed");
        std::process::exit(1);
    }
    println!("all 7 criteria passed");
}
