//! The upper envelope `S(α⁰)` of the hull of `(αʲ, ln 1/δⱼ)`, its support
//! hyperplane and the Carathéodory weights.
//!
//! `S(α⁰)` is the value of the linear program
//!
//! ```text
//! maximize Σⱼ θⱼ·ln(1/δⱼ)  subject to  θ ≥ 0, Σⱼ θⱼ = 1, Σⱼ θⱼ·αʲ = α⁰
//! ```
//!
//! whose dual optimum `(â, η̂)` is a support hyperplane `z = ⟨α, η̂⟩ + â` of the
//! envelope at `α⁰`. The exact optimal-recovery error is `e^{−S(α⁰)}`.

use crate::error::{Error, Result};
use crate::linalg::{dot, solve_consistent};
use crate::problem::{AlphaVec, RecoveryProblem};
use crate::simplex::{maximize, LpFailure};

/// `α⁰ ∈ co 𝒜` is accepted when the combined `(k+1)`-row residual is at most this.
pub const FEASIBILITY_TOL: f64 = 1e-10;
/// Slack below which a node counts as lying on the support hyperplane.
pub const TIGHT_TOL: f64 = 1e-9;
/// Weights at or below this are treated as zero when forming the active set.
pub const WEIGHT_TOL: f64 = 1e-12;

/// One node of the active set `{j_s}` together with its Carathéodory weight.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveNode {
    /// Zero-based node index in the problem.
    pub index: usize,
    pub theta: f64,
    pub alpha: AlphaVec,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeSolution {
    /// `S(α⁰)` on the log scale.
    pub s_value: f64,
    pub eta_hat: Vec<f64>,
    pub a_hat: f64,
    /// At most `k + 1` nodes with positive weights summing to one.
    pub active: Vec<ActiveNode>,
    /// `e^{−S(α⁰)}`.
    pub error: f64,
    /// More than `k + 1` nodes touch the support hyperplane.
    pub degenerate_hyperplane: bool,
}

impl EnvelopeSolution {
    pub fn thetas(&self) -> Vec<f64> {
        self.active.iter().map(|a| a.theta).collect()
    }

    pub fn active_indices(&self) -> Vec<usize> {
        self.active.iter().map(|a| a.index).collect()
    }

    /// Height of the support hyperplane at `alpha`.
    pub fn hyperplane_at(&self, alpha: &[f64]) -> f64 {
        dot(alpha, &self.eta_hat) + self.a_hat
    }

    /// `Π δ_{j_s}^{θ_{j_s}}`, computed in the log domain.
    pub fn weighted_product(&self) -> f64 {
        self.active
            .iter()
            .map(|a| a.theta * a.delta.ln())
            .sum::<f64>()
            .exp()
    }
}

/// Node data in the form the envelope solvers consume.
#[derive(Debug, Clone)]
pub(crate) struct HullPoints {
    pub target: Vec<f64>,
    pub alphas: Vec<Vec<f64>>,
    pub deltas: Vec<f64>,
    /// `ln(1/δⱼ)`.
    pub heights: Vec<f64>,
}

impl HullPoints {
    pub fn from_problem(problem: &RecoveryProblem) -> Self {
        Self::new(
            problem.target().as_slice().to_vec(),
            problem
                .nodes()
                .iter()
                .map(|n| n.alpha.as_slice().to_vec())
                .collect(),
            problem.nodes().iter().map(|n| n.delta).collect(),
        )
    }

    pub fn new(target: Vec<f64>, alphas: Vec<Vec<f64>>, deltas: Vec<f64>) -> Self {
        let heights = deltas.iter().map(|d| -d.ln()).collect();
        Self {
            target,
            alphas,
            deltas,
            heights,
        }
    }

    pub fn k(&self) -> usize {
        self.target.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() {
            return Err(Error::InvalidInput("at least one node is required".into()));
        }
        for (j, (a, d)) in self.alphas.iter().zip(&self.deltas).enumerate() {
            if a.len() != self.k() {
                return Err(Error::InvalidInput(format!(
                    "node {j} has wrong exponent length"
                )));
            }
            if !(d.is_finite() && *d > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "node {j} has invalid error level {d}"
                )));
            }
        }
        Ok(())
    }

    /// Row `[1, αʲ]` of the combined constraint system.
    pub fn lifted(&self, j: usize) -> Vec<f64> {
        std::iter::once(1.0)
            .chain(self.alphas[j].iter().copied())
            .collect()
    }

    pub fn lifted_target(&self) -> Vec<f64> {
        std::iter::once(1.0)
            .chain(self.target.iter().copied())
            .collect()
    }

    /// Solves `Σ θ·[1, αʲ] = [1, α⁰]` over `subset`, requiring all weights strictly positive.
    pub fn positive_combination(&self, subset: &[usize]) -> Option<Vec<f64>> {
        let k = self.k();
        let a: Vec<Vec<f64>> = (0..=k)
            .map(|row| {
                subset
                    .iter()
                    .map(|&j| {
                        if row == 0 {
                            1.0
                        } else {
                            self.alphas[j][row - 1]
                        }
                    })
                    .collect()
            })
            .collect();
        let theta = solve_consistent(&a, &self.lifted_target(), FEASIBILITY_TOL)?;
        theta.iter().all(|&t| t > WEIGHT_TOL).then_some(theta)
    }

    pub fn build_solution(
        &self,
        subset: &[usize],
        theta: &[f64],
        a_hat: f64,
        eta_hat: Vec<f64>,
    ) -> EnvelopeSolution {
        let s_value: f64 = subset
            .iter()
            .zip(theta)
            .map(|(&j, t)| t * self.heights[j])
            .sum();
        let active = subset
            .iter()
            .zip(theta)
            .map(|(&j, &t)| ActiveNode {
                index: j,
                theta: t,
                alpha: AlphaVec::new(self.alphas[j].clone()).expect("validated exponent"),
                delta: self.deltas[j],
            })
            .collect();
        let tight = (0..self.alphas.len())
            .filter(|&j| {
                let slack = dot(&self.alphas[j], &eta_hat) + a_hat - self.heights[j];
                slack.abs() <= TIGHT_TOL * (1.0 + self.heights[j].abs())
            })
            .count();
        EnvelopeSolution {
            s_value,
            eta_hat,
            a_hat,
            active,
            error: (-s_value).exp(),
            degenerate_hyperplane: tight > self.k() + 1,
        }
    }
}

/// Visits subsets of `pool` (sorted) of size `1..=max_size` in lexicographic order,
/// stopping at the first one for which `visit` returns `Some`.
pub(crate) fn first_subset_lex<T>(
    pool: &[usize],
    max_size: usize,
    visit: &mut impl FnMut(&[usize]) -> Option<T>,
) -> Option<T> {
    fn go<T>(
        pool: &[usize],
        start: usize,
        max_size: usize,
        current: &mut Vec<usize>,
        visit: &mut impl FnMut(&[usize]) -> Option<T>,
    ) -> Option<T> {
        for i in start..pool.len() {
            current.push(pool[i]);
            if let Some(found) = visit(current) {
                return Some(found);
            }
            if current.len() < max_size {
                if let Some(found) = go(pool, i + 1, max_size, current, visit) {
                    return Some(found);
                }
            }
            current.pop();
        }
        None
    }
    go(pool, 0, max_size, &mut Vec::new(), visit)
}

/// Largest tight set for which the lexicographic reduction is enumerated; larger
/// sets fall back to the simplex basis.
const LEX_REDUCTION_LIMIT: usize = 20;

pub(crate) fn solve_points(points: &HullPoints) -> Result<EnvelopeSolution> {
    points.validate()?;
    let k = points.k();
    let n = points.alphas.len();
    let a: Vec<Vec<f64>> = (0..=k)
        .map(|row| {
            (0..n)
                .map(|j| {
                    if row == 0 {
                        1.0
                    } else {
                        points.alphas[j][row - 1]
                    }
                })
                .collect()
        })
        .collect();
    let b = points.lifted_target();
    let lp = maximize(&a, &b, &points.heights, FEASIBILITY_TOL).map_err(|e| match e {
        LpFailure::Infeasible { residual } => Error::Infeasible { residual },
        LpFailure::Unbounded => Error::Solver("unbounded envelope program".into()),
        LpFailure::IterationLimit => Error::Solver("simplex iteration limit reached".into()),
    })?;
    let a_hat = lp.dual[0];
    let eta_hat = lp.dual[1..].to_vec();

    let tight: Vec<usize> = (0..n)
        .filter(|&j| {
            let slack = dot(&points.alphas[j], &eta_hat) + a_hat - points.heights[j];
            slack <= TIGHT_TOL * (1.0 + points.heights[j].abs())
        })
        .collect();

    let lex = if tight.len() <= LEX_REDUCTION_LIMIT {
        first_subset_lex(&tight, k + 1, &mut |subset| {
            points
                .positive_combination(subset)
                .map(|theta| (subset.to_vec(), theta))
        })
    } else {
        None
    };
    let (subset, theta) = lex.unwrap_or_else(|| {
        let subset: Vec<usize> = (0..n).filter(|&j| lp.x[j] > WEIGHT_TOL).collect();
        let theta = subset.iter().map(|&j| lp.x[j]).collect();
        (subset, theta)
    });
    Ok(points.build_solution(&subset, &theta, a_hat, eta_hat))
}

/// Computes `S(α⁰)`, the support hyperplane and the reduced active set.
pub fn solve_envelope(problem: &RecoveryProblem) -> Result<EnvelopeSolution> {
    solve_points(&HullPoints::from_problem(problem))
}

/// `e^{−S(α⁰)}`, checked against `Π δ_{j_s}^{θ_{j_s}}`.
pub fn recovery_error(solution: &EnvelopeSolution) -> f64 {
    let error = (-solution.s_value).exp();
    let product = solution.weighted_product();
    debug_assert!(
        (error - product).abs() <= 1e-12 * error,
        "error {error} disagrees with weighted product {product}"
    );
    error
}
