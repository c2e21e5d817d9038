//! Small dense linear algebra used by the envelope solver and its oracle.

/// Solves the square system `a·x = b` by Gaussian elimination with partial pivoting.
///
/// Returns `None` when a pivot falls below `1e-12` times the largest entry.
pub(crate) fn solve_square(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|r| r.len() == n));
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() <= 1e-12 * scale {
            return None;
        }
        m.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            if f != 0.0 {
                for c in col..=n {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (m[r][n] - s) / m[r][r];
    }
    Some(x)
}

/// Solves an `m × s` system (`m ≥ s`) that must have full column rank and be consistent.
///
/// Consistency is judged on the max-norm residual against `tol`.
pub(crate) fn solve_consistent(a: &[Vec<f64>], b: &[f64], tol: f64) -> Option<Vec<f64>> {
    let m = a.len();
    let s = a.first().map_or(0, |r| r.len());
    if s == 0 || m < s {
        return None;
    }
    let scale = a.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    let mut w: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    for col in 0..s {
        let piv = (col..m).max_by(|&i, &j| w[i][col].abs().total_cmp(&w[j][col].abs()))?;
        if w[piv][col].abs() <= 1e-10 * scale {
            return None;
        }
        w.swap(col, piv);
        for r in col + 1..m {
            let f = w[r][col] / w[col][col];
            if f != 0.0 {
                for c in col..=s {
                    w[r][c] -= f * w[col][c];
                }
            }
        }
    }
    let mut x = vec![0.0; s];
    for r in (0..s).rev() {
        let acc: f64 = (r + 1..s).map(|c| w[r][c] * x[c]).sum();
        x[r] = (w[r][s] - acc) / w[r][r];
    }
    let residual = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| (row.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() - rhs).abs())
        .fold(0.0, f64::max);
    (residual <= tol).then_some(x)
}

/// Greedy maximal linearly independent subset of `rows`, in index order.
pub(crate) fn independent_rows(rows: &[Vec<f64>]) -> Vec<usize> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut chosen = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let norm0 = dot(row, row).sqrt();
        if norm0 == 0.0 {
            continue;
        }
        let mut v = row.clone();
        // Two passes of Gram-Schmidt for stability.
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&v, q);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= c * qi;
                }
            }
        }
        let n = dot(&v, &v).sqrt();
        if n > 1e-10 * norm0 {
            basis.push(v.iter().map(|x| x / n).collect());
            chosen.push(i);
        }
    }
    chosen
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
