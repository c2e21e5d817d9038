//! Dense two-phase tableau simplex with Bland's rule for `max cᵀx, Ax = b, x ≥ 0`.
//!
//! The instances solved here have at most a handful of rows, so the tableau is
//! kept dense and every pivot is exact Gaussian elimination in `f64`.

use crate::linalg::solve_square;

const PIVOT_TOL: f64 = 1e-12;
const MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone)]
pub(crate) struct LpSolution {
    /// Primal values of the structural variables.
    pub x: Vec<f64>,
    /// Dual values `y = c_B·B⁻¹` for the original (unflipped) rows.
    pub dual: Vec<f64>,
    #[cfg_attr(not(test), allow(dead_code))]
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpFailure {
    /// Phase one could not drive the artificial variables below the tolerance.
    Infeasible {
        residual: f64,
    },
    Unbounded,
    IterationLimit,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        self.rhs[r] /= p;
        self.rows[r][col] = 1.0;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r];
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][col];
            if f != 0.0 {
                for (v, pv) in self.rows[i].iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                self.rows[i][col] = 0.0;
                self.rhs[i] -= f * pivot_rhs;
            }
        }
        self.basis[r] = col;
    }

    /// Runs simplex iterations with Bland's rule; only columns `< allowed` may enter.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<(), LpFailure> {
        let ncols = cost.len();
        for _ in 0..MAX_ITERATIONS {
            let mut entering = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let reduced = cost[j]
                    - self
                        .basis
                        .iter()
                        .zip(&self.rows)
                        .map(|(&b, row)| cost[b] * row[j])
                        .sum::<f64>();
                if reduced > PIVOT_TOL * (1.0 + cost[j].abs()) {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else {
                return Ok(());
            };
            debug_assert!(col < ncols);
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][col];
                if a > PIVOT_TOL {
                    let ratio = self.rhs[r].max(0.0) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((br, bratio)) => {
                            let tie = (ratio - bratio).abs() <= 1e-14 * (1.0 + bratio.abs());
                            if ratio < bratio && !tie || tie && self.basis[r] < self.basis[br] {
                                Some((r, ratio))
                            } else {
                                Some((br, bratio))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Err(LpFailure::Unbounded);
            };
            self.pivot(r, col);
        }
        Err(LpFailure::IterationLimit)
    }
}

/// Maximizes `c·x` subject to `a·x = b`, `x ≥ 0`.
///
/// `feasibility_tol` bounds the phase-one residual `Σ|a·x − b|` accepted as feasible.
pub(crate) fn maximize(
    a: &[Vec<f64>],
    b: &[f64],
    c: &[f64],
    feasibility_tol: f64,
) -> Result<LpSolution, LpFailure> {
    let m = b.len();
    let n = c.len();
    let signs: Vec<f64> = b
        .iter()
        .map(|&v| if v < 0.0 { -1.0 } else { 1.0 })
        .collect();
    let mut tab = Tableau {
        rows: (0..m)
            .map(|r| {
                let mut row: Vec<f64> = a[r].iter().map(|v| signs[r] * v).collect();
                row.extend((0..m).map(|i| if i == r { 1.0 } else { 0.0 }));
                row
            })
            .collect(),
        rhs: b.iter().zip(&signs).map(|(v, s)| v * s).collect(),
        basis: (n..n + m).collect(),
    };

    let mut phase1 = vec![0.0; n + m];
    phase1[n..].iter_mut().for_each(|v| *v = -1.0);
    tab.optimize(&phase1, n + m)?;
    let residual: f64 = tab
        .basis
        .iter()
        .zip(&tab.rhs)
        .filter(|(&bv, _)| bv >= n)
        .map(|(_, v)| v.abs())
        .sum();
    if residual > feasibility_tol {
        return Err(LpFailure::Infeasible { residual });
    }

    // Drive zero-level artificials out of the basis where a structural pivot exists;
    // rows where none exists are redundant and keep their artificial at zero.
    for r in 0..m {
        if tab.basis[r] >= n {
            if let Some(j) =
                (0..n).find(|&j| !tab.basis.contains(&j) && tab.rows[r][j].abs() > 1e-9)
            {
                tab.pivot(r, j);
            }
        }
    }

    let mut phase2 = c.to_vec();
    phase2.extend(std::iter::repeat_n(0.0, m));
    tab.optimize(&phase2, n)?;

    // Recompute primal and dual from the final basis on the original data.
    let column = |j: usize| -> Vec<f64> {
        if j < n {
            a.iter().map(|row| row[j]).collect()
        } else {
            (0..m)
                .map(|i| if i == j - n { signs[i] } else { 0.0 })
                .collect()
        }
    };
    let basis_cols: Vec<Vec<f64>> = tab.basis.iter().map(|&j| column(j)).collect();
    let bmat: Vec<Vec<f64>> = (0..m)
        .map(|i| basis_cols.iter().map(|col| col[i]).collect())
        .collect();
    let bt: Vec<Vec<f64>> = basis_cols.clone();
    let c_b: Vec<f64> = tab
        .basis
        .iter()
        .map(|&j| if j < n { c[j] } else { 0.0 })
        .collect();

    let x_b = solve_square(&bmat, b).unwrap_or_else(|| tab.rhs.clone());
    let dual = solve_square(&bt, &c_b).unwrap_or_else(|| vec![0.0; m]);

    let mut x = vec![0.0; n];
    for (&j, &v) in tab.basis.iter().zip(&x_b) {
        if j < n {
            x[j] = if v < 0.0 && v > -1e-12 { 0.0 } else { v };
        }
    }
    let objective = c.iter().zip(&x).map(|(p, q)| p * q).sum();
    Ok(LpSolution { x, dual, objective })
}
