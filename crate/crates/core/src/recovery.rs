//! Spectral realization of the operators `Λⱼx = φ^{αʲ}·x`, the optimal
//! multiplier method, worst-case trials at `p = 2` and the extremal bumps that
//! show the recovery error cannot be beaten.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::envelope::EnvelopeSolution;
use crate::error::{Error, Result};
use crate::multipliers::MultiplierFamily;
use crate::problem::{AlphaVec, NodeKind, NormIndex, RecoveryProblem};
use crate::spectral::{FrequencyGrid, SpectralFunction};
use crate::weights::log_power;

/// `Λ_α x = φ^α·x`, pointwise on the grid of `x`.
pub fn apply_operator(
    problem: &RecoveryProblem,
    x: &SpectralFunction,
    alpha: &AlphaVec,
) -> SpectralFunction {
    let weight = problem.weight();
    x.map_with(|xi, v| weight.power(xi, alpha.as_slice()) * v)
}

/// `Φ(y) = Σ_{j∈M} aⱼ·yⱼ`, keyed by problem node index; the zero function when `M = ∅`.
///
/// Every node of `M` must be present in `observed`; extra entries are ignored.
pub fn apply_method(
    fam: &MultiplierFamily,
    observed: &BTreeMap<usize, SpectralFunction>,
) -> Result<SpectralFunction> {
    let first = observed
        .values()
        .next()
        .ok_or_else(|| Error::InvalidInput("no observed spectra to define the grid".into()))?;
    for y in observed.values() {
        first.check_same_grid(y)?;
    }
    let members: Vec<(usize, &SpectralFunction)> = fam
        .active_indices
        .iter()
        .enumerate()
        .filter(|(s, _)| fam.observed_mask[*s])
        .map(|(s, &j)| {
            observed
                .get(&j)
                .map(|y| (s, y))
                .ok_or(Error::MissingObservation(j))
        })
        .collect::<Result<_>>()?;
    if members.is_empty() {
        return Ok(SpectralFunction::zeros(first.grid().clone()));
    }
    let grid = first.grid();
    let values = (0..grid.len())
        .map(|i| {
            let a = fam.eval(&grid.point(i));
            members.iter().map(|(s, y)| a[*s] * y.values()[i]).sum()
        })
        .collect();
    SpectralFunction::new(grid.clone(), values)
}

/// How the observation noise `zⱼ` (with `‖zⱼ‖₂ ≤ δⱼ`) is generated in a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseMode {
    /// No noise: `yⱼ = Λⱼx`.
    Exact,
    /// Uniform in the `δⱼ`-ball, seeded.
    RandomBall,
    /// Noise phase-aligned against the multipliers' action, shaped like the
    /// unrecoverable part `ωx` of the signal, or concentrated at `ξ̂_η̂` when that part vanishes.
    AdversarialAligned,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub achieved_error: f64,
    pub bound: f64,
    /// Every class constraint holds after rescaling.
    pub admissible: bool,
    /// Factor applied to the supplied `x`.
    pub scale: f64,
    /// `‖Λ₀x‖₂` after rescaling.
    pub target_norm: f64,
    pub within_bound: bool,
}

/// Relative slack allowed on the upper bound in trials.
pub const TRIAL_BOUND_TOL: f64 = 1e-8;

/// Runs one recovery trial at `p = 2` and compares the error against `e^{−S(α⁰)}`.
pub fn simulate_trial(
    problem: &RecoveryProblem,
    solution: &EnvelopeSolution,
    fam: &MultiplierFamily,
    x: &SpectralFunction,
    noise: NoiseMode,
    seed: u64,
) -> Result<TrialReport> {
    if problem.p() != NormIndex::Finite(2.0) {
        return Err(Error::UnsupportedNorm(format!(
            "trials run in L2 only, problem has p = {}",
            problem.p()
        )));
    }
    let l2 = NormIndex::Finite(2.0);
    if x.norm(l2) == 0.0 {
        return Err(Error::NotAdmissible(
            "the zero function cannot be rescaled".into(),
        ));
    }
    let mut scale = f64::INFINITY;
    for node in problem
        .nodes()
        .iter()
        .filter(|n| n.kind == NodeKind::ClassConstraint)
    {
        let norm = apply_operator(problem, x, &node.alpha).norm(l2);
        if !norm.is_finite() {
            return Err(Error::NotAdmissible(
                "class constraint norm is not finite".into(),
            ));
        }
        if norm > 0.0 {
            scale = scale.min(node.delta / norm);
        }
    }
    if !scale.is_finite() {
        scale = 1.0;
    }
    let x = x.scaled(scale);
    let admissible = problem
        .nodes()
        .iter()
        .filter(|n| n.kind == NodeKind::ClassConstraint)
        .all(|n| apply_operator(problem, &x, &n.alpha).norm(l2) <= n.delta * (1.0 + 1e-12));

    let grid = x.grid().clone();
    let target = apply_operator(problem, &x, problem.target());
    let observed: Vec<usize> = problem.observed_indices();
    let exact: BTreeMap<usize, SpectralFunction> = observed
        .iter()
        .map(|&j| (j, apply_operator(problem, &x, &problem.nodes()[j].alpha)))
        .collect();

    let noise_map = match noise {
        NoiseMode::Exact => BTreeMap::new(),
        NoiseMode::RandomBall => random_ball_noise(problem, &grid, &observed, seed),
        NoiseMode::AdversarialAligned => {
            adversarial_noise(problem, solution, fam, &grid, &exact, &target)?
        }
    };
    let data: BTreeMap<usize, SpectralFunction> = exact
        .into_iter()
        .map(|(j, v)| match noise_map.get(&j) {
            Some(z) => v.sub(z).map(|y| (j, y)),
            None => Ok((j, v)),
        })
        .collect::<Result<_>>()?;

    let estimate = if data.is_empty() {
        SpectralFunction::zeros(grid.clone())
    } else {
        apply_method(fam, &data)?
    };
    let achieved_error = target.sub(&estimate)?.norm(l2);
    let bound = solution.error;
    Ok(TrialReport {
        achieved_error,
        bound,
        admissible,
        scale,
        target_norm: target.norm(l2),
        within_bound: achieved_error <= bound * (1.0 + TRIAL_BOUND_TOL),
    })
}

fn random_ball_noise(
    problem: &RecoveryProblem,
    grid: &FrequencyGrid,
    observed: &[usize],
    seed: u64,
) -> BTreeMap<usize, SpectralFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.len();
    observed
        .iter()
        .map(|&j| {
            let raw: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            let f = SpectralFunction::new(grid.clone(), raw).expect("finite gaussian samples");
            let norm = f.norm(NormIndex::Finite(2.0));
            let u: f64 = rng.gen_range(f64::EPSILON..=1.0);
            let radius = problem.nodes()[j].delta * u.powf(1.0 / (2 * n) as f64);
            (j, f.scaled(radius / norm))
        })
        .collect()
}

fn adversarial_noise(
    problem: &RecoveryProblem,
    solution: &EnvelopeSolution,
    fam: &MultiplierFamily,
    grid: &FrequencyGrid,
    exact: &BTreeMap<usize, SpectralFunction>,
    target: &SpectralFunction,
) -> Result<BTreeMap<usize, SpectralFunction>> {
    let l2 = NormIndex::Finite(2.0);
    let members: Vec<(usize, usize)> = fam
        .active_indices
        .iter()
        .enumerate()
        .filter(|(s, _)| fam.observed_mask[*s])
        .map(|(s, &j)| (s, j))
        .collect();
    let multipliers: Vec<Vec<Complex64>> = grid.points().map(|xi| fam.eval(&xi)).collect();

    // ωx = Λ₀x − Σ_{j∈M} aⱼΛⱼx, the part of the target no method can see.
    let residual: Vec<Complex64> = (0..grid.len())
        .map(|i| {
            target.values()[i]
                - members
                    .iter()
                    .map(|&(s, j)| multipliers[i][s] * exact[&j].values()[i])
                    .sum::<Complex64>()
        })
        .collect();
    let residual = SpectralFunction::new(grid.clone(), residual)?;
    let residual_norm = residual.norm(l2);
    let use_profile = residual_norm > 1e-12 * target.norm(l2).max(f64::MIN_POSITIVE);

    let contact = if use_profile {
        None
    } else {
        let levels: Vec<f64> = solution.eta_hat.iter().map(|e| (-e).exp()).collect();
        let xi_hat = problem.weight().xi_for_levels(&levels, problem.d())?;
        Some(grid.nearest(&xi_hat))
    };
    let vol = grid.cell_volume();

    let mut out = BTreeMap::new();
    for &(s, j) in &members {
        let delta = problem.nodes()[j].delta;
        let values: Vec<Complex64> = (0..grid.len())
            .map(|i| {
                let a_phase = multipliers[i][s].arg();
                match contact {
                    None => {
                        let u = residual.values()[i];
                        Complex64::from_polar(delta * u.norm() / residual_norm, u.arg() - a_phase)
                    }
                    Some(c) if c == i => Complex64::from_polar(delta / vol.sqrt(), -a_phase),
                    Some(_) => Complex64::new(0.0, 0.0),
                }
            })
            .collect();
        // y = Λx − z, so the noise enters the error as +a·z.
        let z = SpectralFunction::new(grid.clone(), values)?;
        out.insert(j, z);
    }
    Ok(out)
}

/// How the weight variation over the bump's ball is measured against `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VariationScale {
    /// `| |φ(ξ)|^{qα} − |φ(ξ̂)|^{qα} | ≤ ε`, with `γ_ε = 1 + ε·Â / min δ^p`.
    #[default]
    Absolute,
    /// `| |φ(ξ)|^{qα} / |φ(ξ̂)|^{qα} − 1 | ≤ ε`, with `γ_ε = 1 + ε`. Independent of
    /// the scale of `φ` and `δ`, so the ratio is at least `((1−ε)/(1+ε))^{1/p}`.
    Relative,
}

/// Tolerance and resolution of the sampled bump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpConfig {
    pub epsilon: f64,
    /// Cells per axis of the bump grid; odd counts put a node exactly at `ξ̂_η̂`.
    pub points_per_axis: Option<usize>,
    pub variation: VariationScale,
}

impl BumpConfig {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            points_per_axis: None,
            variation: VariationScale::Absolute,
        }
    }

    pub fn relative(epsilon: f64) -> Self {
        Self {
            variation: VariationScale::Relative,
            ..Self::new(epsilon)
        }
    }

    fn points(&self, d: usize) -> usize {
        self.points_per_axis.unwrap_or(match d {
            1 => 65,
            2 => 33,
            3 => 17,
            _ => 9,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalBump {
    /// `ξ̂_η̂`, where `|φⱼ| = e^{−η̂ⱼ}`.
    pub center: Vec<f64>,
    /// `δ̃`.
    pub radius: f64,
    pub amplitude: f64,
    pub epsilon: f64,
    /// `γ_ε` (finite `p`) or `γ̃_ε` (`p = ∞`).
    pub gamma_eps: f64,
    /// `Â = e^{−q·â}`.
    pub a_cap: f64,
    pub p: NormIndex,
    pub variation: VariationScale,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BumpOutcome {
    pub bump: ExtremalBump,
    pub function: SpectralFunction,
    /// `‖Λⱼ bump‖_p` for every node.
    pub node_norms: Vec<f64>,
    /// `δⱼ − ‖Λⱼ bump‖_p`.
    pub slacks: Vec<f64>,
    pub target_norm: f64,
    pub bound: f64,
    /// `‖Λ₀ bump‖_p / e^{−S(α⁰)}`.
    pub ratio: f64,
    /// `c` with `ratio = 1 − c·ε`.
    pub loss_constant: f64,
    pub admissible: bool,
}

/// Builds the near-extremal bump for `ε` with the default grid resolution.
pub fn build_bump(
    problem: &RecoveryProblem,
    solution: &EnvelopeSolution,
    epsilon: f64,
) -> Result<BumpOutcome> {
    build_bump_with(problem, solution, &BumpConfig::new(epsilon))
}

pub fn build_bump_with(
    problem: &RecoveryProblem,
    solution: &EnvelopeSolution,
    config: &BumpConfig,
) -> Result<BumpOutcome> {
    let epsilon = config.epsilon;
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidInput(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let p = problem.p();
    let q = p.effective();
    let d = problem.d();
    let n = config.points(d);
    let levels: Vec<f64> = solution.eta_hat.iter().map(|e| (-e).exp()).collect();
    let center = problem.weight().xi_for_levels(&levels, d)?;

    let mut exponents: Vec<&[f64]> = vec![problem.target().as_slice()];
    exponents.extend(problem.nodes().iter().map(|n| n.alpha.as_slice()));
    let center_log = problem.weight().levels(&center).log_moduli();
    let center_values: Vec<f64> = exponents
        .iter()
        .map(|a| (q * log_power(a, &center_log)).exp())
        .collect();

    let in_ball = |grid: &FrequencyGrid, r: f64| -> Vec<usize> {
        (0..grid.len())
            .filter(|&i| {
                let pt = grid.point(i);
                let dist2: f64 = pt.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum();
                dist2 < r * r
            })
            .collect()
    };
    let variation = |r: f64| -> Option<f64> {
        let grid = FrequencyGrid::cube(&center, r, n).ok()?;
        let cells = in_ball(&grid, r);
        let mut worst = 0.0f64;
        for i in cells {
            let log = problem.weight().levels(&grid.point(i)).log_moduli();
            for (a, c) in exponents.iter().zip(&center_values) {
                let v = (q * log_power(a, &log)).exp();
                let dev = match config.variation {
                    VariationScale::Absolute => (v - c).abs(),
                    VariationScale::Relative if *c > 0.0 => (v / c - 1.0).abs(),
                    VariationScale::Relative if v == 0.0 => 0.0,
                    VariationScale::Relative => f64::INFINITY,
                };
                worst = worst.max(dev);
            }
        }
        Some(worst)
    };
    let feasible = |r: f64| variation(r).is_some_and(|v| v <= epsilon);

    let scale = center.iter().fold(1.0f64, |m, c| m.max(c.abs()));
    let mut hi = scale;
    let radius = if feasible(hi) {
        let mut lo = hi;
        while feasible(hi) && hi < 1e8 * scale {
            lo = hi;
            hi *= 2.0;
        }
        if feasible(hi) {
            hi
        } else {
            bisect(lo, hi, &feasible)
        }
    } else {
        let mut lo = hi;
        loop {
            lo *= 0.5;
            if lo < 1e-12 * scale {
                return Err(Error::EpsilonTooLarge { epsilon });
            }
            if feasible(lo) {
                break;
            }
            hi = lo;
        }
        bisect(lo, hi, &feasible)
    };

    let grid = FrequencyGrid::cube(&center, radius, n)?;
    let cells = in_ball(&grid, radius);
    if cells.is_empty() {
        return Err(Error::EpsilonTooLarge { epsilon });
    }
    let volume = cells.len() as f64 * grid.cell_volume();
    let min_delta = problem
        .nodes()
        .iter()
        .map(|n| n.delta)
        .fold(f64::INFINITY, f64::min);
    let a_cap = (-q * solution.a_hat).exp();
    let slack = match (config.variation, p) {
        (VariationScale::Relative, _) => 1.0,
        (VariationScale::Absolute, NormIndex::Finite(pp)) => a_cap / min_delta.powf(pp),
        (VariationScale::Absolute, NormIndex::Infinity) => a_cap / min_delta,
    };
    let gamma_eps = 1.0 + epsilon * slack;
    let amplitude = match p {
        NormIndex::Finite(pp) => (a_cap / (volume * gamma_eps)).powf(1.0 / pp),
        NormIndex::Infinity => a_cap / gamma_eps,
    };
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    for &i in &cells {
        values[i] = Complex64::new(amplitude, 0.0);
    }
    let function = SpectralFunction::new(grid, values)?;

    let node_norms: Vec<f64> = problem
        .nodes()
        .iter()
        .map(|n| apply_operator(problem, &function, &n.alpha).norm(p))
        .collect();
    let slacks: Vec<f64> = problem
        .nodes()
        .iter()
        .zip(&node_norms)
        .map(|(n, v)| n.delta - v)
        .collect();
    let admissible = slacks
        .iter()
        .zip(problem.nodes())
        .all(|(s, n)| *s >= -1e-12 * n.delta);
    let target_norm = apply_operator(problem, &function, problem.target()).norm(p);
    let bound = solution.error;
    let ratio = target_norm / bound;
    Ok(BumpOutcome {
        bump: ExtremalBump {
            center,
            radius,
            amplitude,
            epsilon,
            gamma_eps,
            a_cap,
            p,
            variation: config.variation,
        },
        function,
        node_norms,
        slacks,
        target_norm,
        bound,
        ratio,
        loss_constant: (1.0 - ratio) / epsilon,
        admissible,
    })
}

fn bisect(mut lo: f64, mut hi: f64, feasible: &impl Fn(f64) -> bool) -> f64 {
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    lo
}
