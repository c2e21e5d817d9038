//! The closed-form optimal multipliers `a_{j_s}(ξ)` and their numerical certificates.
//!
//! With `q = p` for finite `p` and `q = 1` for `p = ∞`, the weights are
//! `λ̂_s = θ_s·δ_s^{−q}·e^{−q·S(α⁰)}` and the multipliers are
//!
//! ```text
//! a_s(ξ) = φ^{α⁰}(ξ)·λ̂_s·|φ(ξ)|^{(q−1)αˢ}·e^{−i⟨αˢ, arg φ(ξ)⟩} / Σ_t λ̂_t·|φ(ξ)|^{q·αᵗ}
//! ```
//!
//! which for finite `p` is `φ^{α⁰}·λ̂_s·φ^{(p/2−1)αˢ}·φ̄^{(p/2)αˢ}` over the same
//! denominator. Everything is evaluated in the log domain so the level grids can
//! span many decades without overflow.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::envelope::EnvelopeSolution;
use crate::linalg::dot;
use crate::problem::{AlphaVec, NodeKind, NormIndex, RecoveryProblem};
use crate::weights::{log_power, power_from_levels, Levels, WeightFamily};

/// Both algebraic forms of `λ̂` and their largest relative disagreement.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaHats {
    /// `θ_s·δ_s^{−q}·e^{−q·S}` (the returned form).
    pub values: Vec<f64>,
    /// `θ_s·e^{q⟨αˢ − α⁰, η̂⟩}`.
    pub exponential_form: Vec<f64>,
    pub max_rel_discrepancy: f64,
}

/// `λ̂` weights for the active nodes; `deltas` are the active-node error levels in order.
pub fn lambda_hats(solution: &EnvelopeSolution, deltas: &[f64], p: NormIndex) -> LambdaHats {
    let q = p.effective();
    let target_height = solution.s_value - solution.a_hat;
    let mut values = Vec::with_capacity(solution.active.len());
    let mut exponential_form = Vec::with_capacity(solution.active.len());
    let mut worst = 0.0f64;
    for (node, &delta) in solution.active.iter().zip(deltas) {
        let from_deltas = (node.theta.ln() - q * delta.ln() - q * solution.s_value).exp();
        let shift = dot(node.alpha.as_slice(), &solution.eta_hat) - target_height;
        let from_eta = node.theta * (q * shift).exp();
        worst = worst.max((from_deltas - from_eta).abs() / from_deltas);
        values.push(from_deltas);
        exponential_form.push(from_eta);
    }
    LambdaHats {
        values,
        exponential_form,
        max_rel_discrepancy: worst,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierFamily {
    pub p: NormIndex,
    pub lambda_hats: Vec<f64>,
    pub active_indices: Vec<usize>,
    pub active_alphas: Vec<AlphaVec>,
    pub thetas: Vec<f64>,
    pub deltas: Vec<f64>,
    pub target_alpha: AlphaVec,
    pub s_value: f64,
    pub eta_hat: Vec<f64>,
    /// Active nodes whose data is observed; these form the set `M`.
    pub observed_mask: Vec<bool>,
    pub family: WeightFamily,
}

/// Builds all `l` multipliers; only those flagged in `observed_mask` enter the method.
pub fn build_multipliers(
    problem: &RecoveryProblem,
    solution: &EnvelopeSolution,
) -> MultiplierFamily {
    let deltas: Vec<f64> = solution.active.iter().map(|a| a.delta).collect();
    let lambdas = lambda_hats(solution, &deltas, problem.p());
    MultiplierFamily {
        p: problem.p(),
        lambda_hats: lambdas.values,
        active_indices: solution.active_indices(),
        active_alphas: solution.active.iter().map(|a| a.alpha.clone()).collect(),
        thetas: solution.thetas(),
        deltas,
        target_alpha: problem.target().clone(),
        s_value: solution.s_value,
        eta_hat: solution.eta_hat.clone(),
        observed_mask: solution
            .active
            .iter()
            .map(|a| problem.nodes()[a.index].kind == NodeKind::Observed)
            .collect(),
        family: problem.weight().clone(),
    }
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

impl MultiplierFamily {
    pub fn len(&self) -> usize {
        self.lambda_hats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda_hats.is_empty()
    }

    /// Problem node indices in `M` (observed and active).
    pub fn observed_indices(&self) -> Vec<usize> {
        self.active_indices
            .iter()
            .zip(&self.observed_mask)
            .filter(|(_, &m)| m)
            .map(|(&j, _)| j)
            .collect()
    }

    pub fn bound(&self) -> f64 {
        (-self.s_value).exp()
    }

    /// `ln|a_s|` from log-levels; `−∞` where a multiplier vanishes.
    pub fn log_moduli(&self, log_levels: &[f64]) -> Vec<f64> {
        let q = self.p.effective();
        let target = log_power(self.target_alpha.as_slice(), log_levels);
        let den_terms: Vec<f64> = self
            .lambda_hats
            .iter()
            .zip(&self.active_alphas)
            .map(|(l, a)| l.ln() + q * log_power(a.as_slice(), log_levels))
            .collect();
        let den = log_sum_exp(&den_terms);
        self.lambda_hats
            .iter()
            .zip(&self.active_alphas)
            .map(|(l, a)| {
                if den == f64::NEG_INFINITY || target == f64::NEG_INFINITY {
                    f64::NEG_INFINITY
                } else {
                    let own = if q == 1.0 {
                        0.0
                    } else {
                        (q - 1.0) * log_power(a.as_slice(), log_levels)
                    };
                    target + l.ln() + own - den
                }
            })
            .collect()
    }

    /// `a_s` at a point given by its weight levels; zero where the denominator vanishes.
    pub fn eval_levels(&self, levels: &Levels) -> Vec<Complex64> {
        let log_levels = levels.log_moduli();
        let target_phase = dot(self.target_alpha.as_slice(), &levels.phases);
        self.log_moduli(&log_levels)
            .into_iter()
            .zip(&self.active_alphas)
            .map(|(lm, a)| {
                if lm == f64::NEG_INFINITY {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::from_polar(
                        lm.exp(),
                        target_phase - dot(a.as_slice(), &levels.phases),
                    )
                }
            })
            .collect()
    }

    pub fn eval(&self, xi: &[f64]) -> Vec<Complex64> {
        self.eval_levels(&self.family.levels(xi))
    }

    /// `f(η) = −1 + Σ_s λ̂_s·e^{−q⟨αˢ − α⁰, η⟩}`, nonnegative with a zero at `η̂`.
    pub fn balance(&self, eta: &[f64]) -> f64 {
        let q = self.p.effective();
        -1.0 + self
            .lambda_hats
            .iter()
            .zip(&self.active_alphas)
            .map(|(l, a)| {
                let diff: f64 = a
                    .as_slice()
                    .iter()
                    .zip(self.target_alpha.as_slice())
                    .zip(eta)
                    .map(|((x, y), e)| (x - y) * e)
                    .sum();
                l * (-q * diff).exp()
            })
            .sum::<f64>()
    }

    /// Left side, right side and normalized value of the norm condition at `η`.
    pub fn certificate_at(&self, eta: &[f64]) -> CertificateRow {
        let log_levels: Vec<f64> = eta.iter().map(|e| -e).collect();
        let log_a = self.log_moduli(&log_levels);
        let s = self.s_value;
        let terms = log_a.iter().zip(&self.deltas).zip(&self.thetas);
        let (lhs, rhs) = match self.p {
            NormIndex::Finite(p) if p > 1.0 => {
                let pc = p / (p - 1.0);
                let lhs = terms
                    .map(|((la, d), t)| (pc * d.ln() + pc * la - (pc / p) * t.ln()).exp())
                    .sum::<f64>();
                (lhs, (-pc * s).exp())
            }
            NormIndex::Finite(_) => {
                let lhs = terms
                    .map(|((la, d), t)| (d.ln() + la - t.ln()).exp())
                    .fold(0.0, f64::max);
                (lhs, (-s).exp())
            }
            NormIndex::Infinity => {
                let lhs = terms.map(|((la, d), _)| (la + d.ln()).exp()).sum::<f64>();
                (lhs, (-s).exp())
            }
        };
        CertificateRow {
            eta: eta.to_vec(),
            lhs,
            rhs,
            normalized: lhs / rhs,
        }
    }

    /// `Q_p` at `η`: `normalized^{1/p'}` for `1 < p < ∞`, the normalized value otherwise.
    pub fn q_p(&self, eta: &[f64]) -> f64 {
        let row = self.certificate_at(eta);
        match self.p.conjugate() {
            Some(pc) => row.normalized.powf(1.0 / pc),
            None => row.normalized,
        }
    }
}

/// Uniform tensor grid `[lo, hi]^k` in `η`-space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaGrid {
    pub k: usize,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl EtaGrid {
    pub const DEFAULT_RANGE: f64 = 20.0;
    pub const DEFAULT_POINTS: usize = 81;

    pub fn symmetric(k: usize, range: f64, points: usize) -> Self {
        Self {
            k,
            lo: -range,
            hi: range,
            points: points.max(1),
        }
    }

    pub fn default_for(k: usize) -> Self {
        Self::symmetric(k, Self::DEFAULT_RANGE, Self::DEFAULT_POINTS)
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.k as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn coordinate(&self, i: usize) -> f64 {
        if self.points == 1 {
            0.5 * (self.lo + self.hi)
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (self.points - 1) as f64
        }
    }

    /// The `idx`-th point, last coordinate varying fastest.
    pub fn point(&self, mut idx: usize) -> Vec<f64> {
        let mut eta = vec![0.0; self.k];
        for slot in eta.iter_mut().rev() {
            *slot = self.coordinate(idx % self.points);
            idx /= self.points;
        }
        eta
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateRow {
    pub eta: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormCertificate {
    pub max_normalized: f64,
    pub argmax: Vec<f64>,
    /// Normalized value at the contact point `η̂`, where equality is expected.
    pub touch_value: f64,
    pub points_checked: usize,
}

/// Max over samples of `|Σ_s φ^{αˢ}a_s − φ^{α⁰}| / max(|φ^{α⁰}|, floor)`.
pub fn check_interpolation(fam: &MultiplierFamily, xi_samples: &[Vec<f64>]) -> f64 {
    let floor = (-fam.s_value.abs()).exp() * 1e-30;
    xi_samples
        .par_iter()
        .map(|xi| interpolation_residual(fam, &fam.family.levels(xi), floor))
        .reduce(|| 0.0, f64::max)
}

fn interpolation_residual(fam: &MultiplierFamily, levels: &Levels, floor: f64) -> f64 {
    residual_for_values(fam, levels, &fam.eval_levels(levels), floor)
}

fn residual_for_values(
    fam: &MultiplierFamily,
    levels: &Levels,
    a: &[Complex64],
    floor: f64,
) -> f64 {
    let target = power_from_levels(levels, fam.target_alpha.as_slice());
    let sum: Complex64 = a
        .iter()
        .zip(&fam.active_alphas)
        .map(|(ai, alpha)| power_from_levels(levels, alpha.as_slice()) * ai)
        .sum();
    (sum - target).norm() / target.norm().max(floor)
}

/// Evaluates the normalized norm condition over an `η` grid and at `η̂`.
pub fn check_norm_condition(fam: &MultiplierFamily, grid: &EtaGrid) -> NormCertificate {
    let (max_normalized, argmax_idx) = (0..grid.len())
        .into_par_iter()
        .map(|i| (fam.certificate_at(&grid.point(i)).normalized, i))
        .reduce(
            || (f64::NEG_INFINITY, usize::MAX),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );
    NormCertificate {
        max_normalized,
        argmax: if argmax_idx == usize::MAX {
            Vec::new()
        } else {
            grid.point(argmax_idx)
        },
        touch_value: fam.certificate_at(&fam.eta_hat).normalized,
        points_checked: grid.len(),
    }
}

/// All grid rows, for CSV export.
pub fn certificate_rows(fam: &MultiplierFamily, grid: &EtaGrid) -> Vec<CertificateRow> {
    (0..grid.len())
        .into_par_iter()
        .map(|i| fam.certificate_at(&grid.point(i)))
        .collect()
}
