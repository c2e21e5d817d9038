//! Brute-force envelope oracle: enumerates candidate supports and dual vertices
//! instead of pivoting, so it can cross-check [`crate::envelope::solve_envelope`].

use crate::envelope::{EnvelopeSolution, HullPoints, TIGHT_TOL};
use crate::error::{Error, Result};
use crate::linalg::{dot, independent_rows, solve_square};
use crate::problem::RecoveryProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    pub max_nodes: usize,
    pub max_k: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            max_nodes: 12,
            max_k: 4,
        }
    }
}

pub fn envelope_oracle(problem: &RecoveryProblem) -> Result<EnvelopeSolution> {
    envelope_oracle_with(problem, OracleConfig::default())
}

pub fn envelope_oracle_with(
    problem: &RecoveryProblem,
    config: OracleConfig,
) -> Result<EnvelopeSolution> {
    oracle_points(&HullPoints::from_problem(problem), config)
}

pub(crate) fn oracle_points(points: &HullPoints, config: OracleConfig) -> Result<EnvelopeSolution> {
    points.validate()?;
    let n = points.alphas.len();
    let k = points.k();
    if n > config.max_nodes || k > config.max_k {
        return Err(Error::CapExceeded {
            nodes: n,
            k,
            max_nodes: config.max_nodes,
            max_k: config.max_k,
        });
    }

    // Primal: every subset of size ≤ k+1 with an exact positive convex combination.
    let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
    for_each_subset(n, k + 1, &mut |subset| {
        if let Some(theta) = points.positive_combination(subset) {
            let value: f64 = subset
                .iter()
                .zip(&theta)
                .map(|(&j, t)| t * points.heights[j])
                .sum();
            let better = match &best {
                None => true,
                Some((b, _, _)) => value > b + 1e-12 * (1.0 + b.abs()),
            };
            if better {
                best = Some((value, subset.to_vec(), theta));
            }
        }
    });
    let Some((_, subset, theta)) = best else {
        return Err(Error::Infeasible {
            residual: f64::INFINITY,
        });
    };

    let (a_hat, eta_hat) = dual_vertex(points)?;
    Ok(points.build_solution(&subset, &theta, a_hat, eta_hat))
}

/// Minimizes `â + ⟨α⁰, η⟩` over `â + ⟨αʲ, η⟩ ≥ ln(1/δⱼ)` by enumerating vertices.
///
/// The dual variable is restricted to the span of the lifted rows `[1, αʲ]`, which
/// keeps vertices well defined when the rows are rank deficient.
fn dual_vertex(points: &HullPoints) -> Result<(f64, Vec<f64>)> {
    let n = points.alphas.len();
    let rows: Vec<Vec<f64>> = (0..n).map(|j| points.lifted(j)).collect();
    let basis = independent_rows(&rows);
    let r = basis.len();
    let gram: Vec<Vec<f64>> = rows
        .iter()
        .map(|row| basis.iter().map(|&b| dot(row, &rows[b])).collect())
        .collect();
    let target = points.lifted_target();

    let mut best: Option<(f64, Vec<f64>)> = None;
    for_each_subset(n, r, &mut |subset| {
        if subset.len() != r {
            return;
        }
        let g: Vec<Vec<f64>> = subset.iter().map(|&j| gram[j].clone()).collect();
        let rhs: Vec<f64> = subset.iter().map(|&j| points.heights[j]).collect();
        let Some(z) = solve_square(&g, &rhs) else {
            return;
        };
        let mut y = vec![0.0; target.len()];
        for (zi, &b) in z.iter().zip(&basis) {
            for (yi, ri) in y.iter_mut().zip(&rows[b]) {
                *yi += zi * ri;
            }
        }
        let feasible = (0..n).all(|j| {
            dot(&rows[j], &y) >= points.heights[j] - TIGHT_TOL * (1.0 + points.heights[j].abs())
        });
        if !feasible {
            return;
        }
        let value = dot(&target, &y);
        if best
            .as_ref()
            .is_none_or(|(b, _)| value < b - 1e-12 * (1.0 + b.abs()))
        {
            best = Some((value, y));
        }
    });
    let (_, y) = best.ok_or_else(|| Error::Solver("no feasible dual vertex".into()))?;
    Ok((y[0], y[1..].to_vec()))
}

/// Calls `visit` on every subset of `0..n` of size `1..=max_size`, in lexicographic order.
fn for_each_subset(n: usize, max_size: usize, visit: &mut impl FnMut(&[usize])) {
    let pool: Vec<usize> = (0..n).collect();
    let _: Option<()> = crate::envelope::first_subset_lex(&pool, max_size, &mut |s| {
        visit(s);
        None
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::solve_envelope;
    use crate::problem::{AlphaVec, InfoNode, NormIndex};
    use crate::weights::WeightFamily;

    fn k1(nodes: &[(f64, f64)], target: f64) -> RecoveryProblem {
        RecoveryProblem::new(
            1,
            NormIndex::Finite(2.0),
            WeightFamily::Axis,
            AlphaVec::new(vec![target]).unwrap(),
            nodes
                .iter()
                .map(|&(a, d)| InfoNode::class(vec![a], d).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn three_node_matches_solver() {
        let p = k1(&[(0.0, 0.1), (1.0, 0.5), (2.0, 0.2)], 1.0);
        let o = envelope_oracle(&p).unwrap();
        let s = solve_envelope(&p).unwrap();
        assert!((o.s_value - s.s_value).abs() < 1e-9);
        assert_eq!(o.active_indices(), vec![0, 2]);
        assert!((o.eta_hat[0] - s.eta_hat[0]).abs() < 1e-9);
        assert!((o.a_hat - s.a_hat).abs() < 1e-9);
    }

    #[test]
    fn identity_case() {
        let p = k1(&[(1.0, 0.3)], 1.0);
        let o = envelope_oracle(&p).unwrap();
        assert_eq!(o.active_indices(), vec![0]);
        assert!((o.error - 0.3).abs() < 1e-15);
    }

    #[test]
    fn cap_and_infeasible() {
        let many: Vec<(f64, f64)> = (0..13).map(|i| (i as f64, 0.5)).collect();
        assert!(matches!(
            envelope_oracle(&k1(&many, 1.0)),
            Err(Error::CapExceeded { .. })
        ));
        assert!(matches!(
            envelope_oracle(&k1(&[(0.0, 0.1), (2.0, 0.2)], 3.0)),
            Err(Error::Infeasible { .. })
        ));
    }
}
