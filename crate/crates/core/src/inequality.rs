//! Sharp multiplicative inequalities `‖φ^{α⁰}x‖_p ≤ Π ‖φ^{αʲ}x‖_p^{θⱼ}` and the
//! bump-based evidence that they cannot be improved.

use crate::envelope::{solve_points, HullPoints};
use crate::error::{Error, Result};
use crate::problem::{AlphaVec, RecoveryProblem};
use crate::recovery::{apply_operator, build_bump_with, BumpConfig};
use crate::spectral::SpectralFunction;

/// Relative slack allowed on `lhs ≤ rhs`.
pub const INEQUALITY_TOL: f64 = 1e-8;
/// Node norms below this are rejected as degenerate.
pub const MIN_NORM: f64 = 1e-300;

/// Sharp right side `Π normsⱼ^{θⱼ}` and the optimal weights over all nodes
/// (zero off the active set).
pub fn carlson_bound(
    alphas: &[AlphaVec],
    norms: &[f64],
    alpha0: &AlphaVec,
) -> Result<(f64, Vec<f64>)> {
    if alphas.len() != norms.len() {
        return Err(Error::InvalidInput(format!(
            "{} exponents but {} norms",
            alphas.len(),
            norms.len()
        )));
    }
    for (j, &n) in norms.iter().enumerate() {
        if !(n.is_finite() && n >= MIN_NORM) {
            return Err(Error::DegenerateFunction(format!("node {j} has norm {n}")));
        }
    }
    let points = HullPoints::new(
        alpha0.as_slice().to_vec(),
        alphas.iter().map(|a| a.as_slice().to_vec()).collect(),
        norms.to_vec(),
    );
    let sol = solve_points(&points)?;
    let mut theta = vec![0.0; norms.len()];
    for a in &sol.active {
        theta[a.index] = a.theta;
    }
    Ok((sol.error, theta))
}

/// `min λ·ln n₁ + (1−λ)·ln n₂` over pairs bracketing `α⁰` on the line, exponentiated.
pub fn two_factor_bound(alphas: &[f64], norms: &[f64], alpha0: f64) -> Result<f64> {
    let mut best = f64::INFINITY;
    for (i, (&a1, &n1)) in alphas.iter().zip(norms).enumerate() {
        for (&a2, &n2) in alphas.iter().zip(norms).skip(i) {
            let (lo, hi, nlo, nhi) = if a1 <= a2 {
                (a1, a2, n1, n2)
            } else {
                (a2, a1, n2, n1)
            };
            if alpha0 < lo || alpha0 > hi {
                continue;
            }
            let lambda = if hi > lo {
                (hi - alpha0) / (hi - lo)
            } else {
                1.0
            };
            best = best.min(lambda * nlo.ln() + (1.0 - lambda) * nhi.ln());
        }
    }
    if best.is_finite() {
        Ok(best.exp())
    } else {
        Err(Error::Infeasible {
            residual: f64::INFINITY,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    /// `‖φ^{α⁰}x‖_p`.
    pub lhs: f64,
    pub node_norms: Vec<f64>,
    pub theta: Vec<f64>,
    pub rhs: f64,
    pub ratio: f64,
    pub holds: bool,
}

/// Evaluates both sides of the inequality for `x` by quadrature in `L_p`, `p = problem.p()`.
pub fn verify_inequality(
    problem: &RecoveryProblem,
    x: &SpectralFunction,
) -> Result<InequalityReport> {
    let p = problem.p();
    let node_norms: Vec<f64> = problem
        .nodes()
        .iter()
        .map(|n| apply_operator(problem, x, &n.alpha).norm(p))
        .collect();
    let lhs = apply_operator(problem, x, problem.target()).norm(p);
    let alphas: Vec<AlphaVec> = problem.nodes().iter().map(|n| n.alpha.clone()).collect();
    let (rhs, theta) = carlson_bound(&alphas, &node_norms, problem.target())?;
    let ratio = lhs / rhs;
    Ok(InequalityReport {
        lhs,
        node_norms,
        theta,
        rhs,
        ratio,
        holds: ratio <= 1.0 + INEQUALITY_TOL,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SharpnessRow {
    pub epsilon: f64,
    /// `‖Λ₀ bump‖_p / e^{−S(α⁰)}`.
    pub ratio: f64,
    /// `lhs / rhs` of the inequality evaluated on the bump.
    pub inequality_ratio: f64,
    pub admissible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SharpnessTable {
    pub rows: Vec<SharpnessRow>,
    /// Ratios do not drop by more than `1e-6` as `ε` decreases.
    pub monotone: bool,
    /// Last ratio is at least `1 − 10·ε_last`.
    pub meets_floor: bool,
}

/// Builds bumps for a decreasing list of `ε` and tabulates how close they come to the bound.
pub fn sharpness_gap(problem: &RecoveryProblem, epsilons: &[f64]) -> Result<SharpnessTable> {
    sharpness_gap_with(problem, epsilons, None)
}

pub fn sharpness_gap_with(
    problem: &RecoveryProblem,
    epsilons: &[f64],
    points_per_axis: Option<usize>,
) -> Result<SharpnessTable> {
    if epsilons.is_empty() || epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput(
            "epsilon list must be nonempty and strictly decreasing".into(),
        ));
    }
    let solution = crate::envelope::solve_envelope(problem)?;
    let mut rows = Vec::with_capacity(epsilons.len());
    for &epsilon in epsilons {
        let cfg = BumpConfig {
            points_per_axis,
            ..BumpConfig::new(epsilon)
        };
        let out = build_bump_with(problem, &solution, &cfg)?;
        let inequality_ratio = verify_inequality(problem, &out.function)?.ratio;
        rows.push(SharpnessRow {
            epsilon,
            ratio: out.ratio,
            inequality_ratio,
            admissible: out.admissible,
        });
    }
    let monotone = rows.windows(2).all(|w| w[1].ratio >= w[0].ratio - 1e-6);
    let last = rows.last().expect("nonempty");
    let meets_floor = last.ratio >= 1.0 - 10.0 * last.epsilon;
    Ok(SharpnessTable {
        rows,
        monotone,
        meets_floor,
    })
}
