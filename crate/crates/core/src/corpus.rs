//! Seeded random instances and test spectra for property checks and benchmarks.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Dirichlet, Distribution};

use crate::problem::{AlphaVec, InfoNode, NodeKind, NormIndex, RecoveryProblem};
use crate::spectral::{FrequencyGrid, SpectralFunction};
use crate::weights::WeightFamily;

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusConfig {
    pub max_k: usize,
    pub max_nodes: usize,
    /// Exponent components are drawn from `[0, alpha_max]`.
    pub alpha_max: f64,
    /// `δ` is log-uniform on this range.
    pub delta_range: (f64, f64),
    /// Probability that exponents are snapped to multiples of 1/4, which produces
    /// coincident and collinear nodes.
    pub snap_probability: f64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            max_k: 3,
            max_nodes: 7,
            alpha_max: 3.0,
            delta_range: (1e-4, 1e2),
            snap_probability: 0.25,
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A feasible instance: `α⁰` is a random convex combination of some nodes.
/// Weights are the coordinate family with `d = k`.
pub fn random_instance(rng: &mut impl Rng, config: &CorpusConfig, p: NormIndex) -> RecoveryProblem {
    let k = rng.gen_range(1..=config.max_k);
    let n = rng.gen_range(1..=config.max_nodes);
    let snap = rng.gen_bool(config.snap_probability);
    let (lo, hi) = (config.delta_range.0.ln(), config.delta_range.1.ln());
    let alphas: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..k)
                .map(|_| {
                    let a = rng.gen_range(0.0..=config.alpha_max);
                    if snap {
                        (a * 4.0).round() / 4.0
                    } else {
                        a
                    }
                })
                .collect()
        })
        .collect();
    let mut nodes: Vec<InfoNode> = alphas
        .iter()
        .map(|a| {
            let kind = if rng.gen_bool(0.6) {
                NodeKind::Observed
            } else {
                NodeKind::ClassConstraint
            };
            InfoNode::new(
                AlphaVec::new(a.clone()).expect("finite"),
                rng.gen_range(lo..=hi).exp(),
                kind,
            )
            .expect("valid node")
        })
        .collect();
    if snap && n > 1 && rng.gen_bool(0.3) {
        // duplicate exponent with a different error level
        let j = rng.gen_range(0..n);
        let mut dup = nodes[j].clone();
        dup.delta = rng.gen_range(lo..=hi).exp();
        let last = nodes.len() - 1;
        nodes[last] = dup;
    }

    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let m = rng.gen_range(1..=n.min(k + 1));
    let members = &idx[..m];
    let weights: Vec<f64> = if m == 1 {
        vec![1.0]
    } else {
        Dirichlet::new(&vec![1.0; m]).expect("valid").sample(rng)
    };
    let mut target = vec![0.0; k];
    for (w, &j) in weights.iter().zip(members) {
        for (t, a) in target.iter_mut().zip(nodes[j].alpha.as_slice()) {
            *t += w * a;
        }
    }
    let target: Vec<f64> = target.into_iter().map(|t| t.max(0.0)).collect();
    RecoveryProblem::new(
        k,
        p,
        WeightFamily::Axis,
        AlphaVec::new(target).expect("finite"),
        nodes,
    )
    .expect("consistent instance")
}

/// `count` instances from one seed.
pub fn instances(
    seed: u64,
    count: usize,
    config: &CorpusConfig,
    p: NormIndex,
) -> Vec<RecoveryProblem> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| random_instance(&mut r, config, p))
        .collect()
}

/// Default cells per axis for test spectra.
pub fn default_points(d: usize) -> usize {
    match d {
        1 => 256,
        2 => 48,
        _ => 16,
    }
}

/// Sum of one to three complex Gaussian bumps on `[−8, 8]^d`.
pub fn random_spectrum(rng: &mut impl Rng, d: usize, points_per_axis: usize) -> SpectralFunction {
    let grid = FrequencyGrid::cube(&vec![0.0; d], 8.0, points_per_axis).expect("valid grid");
    random_spectrum_on(rng, grid)
}

/// Gaussian bumps centered in the middle half of `grid`.
pub fn random_spectrum_on(rng: &mut impl Rng, grid: FrequencyGrid) -> SpectralFunction {
    let half: Vec<(f64, f64)> = grid
        .axes()
        .iter()
        .map(|a| (0.5 * (a.min + a.max), 0.25 * (a.max - a.min)))
        .collect();
    let scale = half.iter().map(|h| h.1).fold(f64::INFINITY, f64::min) / 4.0;
    let terms: Vec<(Vec<f64>, f64, Complex64)> = (0..rng.gen_range(1..=3))
        .map(|_| {
            let center: Vec<f64> = half
                .iter()
                .map(|(m, h)| m + rng.gen_range(-h..*h))
                .collect();
            let width = scale * rng.gen_range(0.3..2.0);
            let amp = Complex64::from_polar(
                rng.gen_range(0.1..10.0),
                rng.gen_range(0.0..std::f64::consts::TAU),
            );
            (center, width, amp)
        })
        .collect();
    SpectralFunction::from_fn(grid, |xi| {
        terms
            .iter()
            .map(|(c, w, a)| {
                let r2: f64 = xi.iter().zip(c).map(|(x, y)| (x - y) * (x - y)).sum();
                a * (-r2 / (2.0 * w * w)).exp()
            })
            .sum()
    })
    .expect("finite values")
}

/// Frequencies with coordinates `±10^u`, `u` uniform on `[−3, 3]`, for pointwise checks.
pub fn frequency_samples(rng: &mut impl Rng, d: usize, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| {
            (0..d)
                .map(|_| {
                    let m = 10f64.powf(rng.gen_range(-3.0..3.0));
                    if rng.gen_bool(0.5) {
                        m
                    } else {
                        -m
                    }
                })
                .collect()
        })
        .collect()
}
