//! Weight families `φ = (φ₁,…,φ_k)`, their fractional powers and the inverse level map.

use std::f64::consts::FRAC_PI_2;
use std::io::Read;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Moduli `|φⱼ(ξ)|` and principal arguments `arg φⱼ(ξ)` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Levels {
    pub moduli: Vec<f64>,
    pub phases: Vec<f64>,
}

impl Levels {
    /// Real nonnegative levels with zero phase, as produced by `|φⱼ| = e^{−ηⱼ}`.
    pub fn from_eta(eta: &[f64]) -> Self {
        Self {
            moduli: eta.iter().map(|e| (-e).exp()).collect(),
            phases: vec![0.0; eta.len()],
        }
    }

    /// `ln|φⱼ|`, with `−∞` at zero levels.
    pub fn log_moduli(&self) -> Vec<f64> {
        self.moduli.iter().map(|m| m.ln()).collect()
    }
}

/// `Σⱼ αⱼ·ln|φⱼ|` with the convention `0·ln 0 = 0`.
pub fn log_power(alpha: &[f64], log_moduli: &[f64]) -> f64 {
    alpha
        .iter()
        .zip(log_moduli)
        .map(|(&a, &l)| if a == 0.0 { 0.0 } else { a * l })
        .sum()
}

/// `φ^α` from levels, factor by factor: `Π|φⱼ|^{αⱼ}·exp(i·Σ αⱼ·arg φⱼ)`.
pub fn power_from_levels(levels: &Levels, alpha: &[f64]) -> Complex64 {
    let log_mod = log_power(alpha, &levels.log_moduli());
    if log_mod == f64::NEG_INFINITY {
        return Complex64::new(0.0, 0.0);
    }
    let phase: f64 = alpha.iter().zip(&levels.phases).map(|(a, p)| a * p).sum();
    Complex64::from_polar(log_mod.exp(), phase)
}

/// Piecewise-constant level functions sampled on a rectangular grid of `ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedLevels {
    d: usize,
    k: usize,
    points: Vec<Vec<f64>>,
    levels: Vec<Vec<f64>>,
    tolerance: f64,
}

impl TabulatedLevels {
    pub const DEFAULT_TOLERANCE: f64 = 1e-6;

    pub fn new(d: usize, k: usize, points: Vec<Vec<f64>>, levels: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() || points.len() != levels.len() {
            return Err(Error::InvalidInput(
                "tabulated family needs matching, nonempty point and level rows".into(),
            ));
        }
        for (p, l) in points.iter().zip(&levels) {
            if p.len() != d || l.len() != k {
                return Err(Error::InvalidInput(format!(
                    "tabulated row has {} coordinates and {} levels, expected {d} and {k}",
                    p.len(),
                    l.len()
                )));
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput(
                    "tabulated coordinates must be finite".into(),
                ));
            }
            if l.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(Error::InvalidInput(
                    "tabulated levels must be strictly positive".into(),
                ));
            }
        }
        Ok(Self {
            d,
            k,
            points,
            levels,
            tolerance: Self::DEFAULT_TOLERANCE,
        })
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    /// Reads the CSV layout: a header row, then `d` coordinate columns followed by `k` level columns.
    pub fn from_csv_reader<R: Read>(reader: R, d: usize, k: usize) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let width = rdr.headers()?.len();
        if width != d + k {
            return Err(Error::Parse(format!(
                "tabulated header has {width} columns, expected d + k = {}",
                d + k
            )));
        }
        let mut points = Vec::new();
        let mut levels = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            let values = record
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|e| Error::Parse(format!("row {}: {e}: {f:?}", row + 2)))
                })
                .collect::<Result<Vec<_>>>()?;
            points.push(values[..d].to_vec());
            levels.push(values[d..].to_vec());
        }
        Self::new(d, k, points, levels)
    }

    pub fn from_path(path: impl AsRef<Path>, d: usize, k: usize) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())?;
        Self::from_csv_reader(file, d, k)
    }

    fn nearest_point(&self, xi: &[f64]) -> usize {
        let dist = |p: &[f64]| -> f64 { p.iter().zip(xi).map(|(a, b)| (a - b) * (a - b)).sum() };
        (0..self.points.len())
            .min_by(|&a, &b| dist(&self.points[a]).total_cmp(&dist(&self.points[b])))
            .unwrap_or(0)
    }

    /// Sample whose levels are closest to `a` in log scale, with its max relative residual.
    fn nearest_levels(&self, a: &[f64]) -> (usize, f64) {
        let log_dist = |l: &[f64]| -> f64 {
            l.iter()
                .zip(a)
                .map(|(x, y)| (x.ln() - y.ln()).powi(2))
                .sum()
        };
        let best = (0..self.levels.len())
            .min_by(|&i, &j| log_dist(&self.levels[i]).total_cmp(&log_dist(&self.levels[j])))
            .unwrap_or(0);
        let residual = self.levels[best]
            .iter()
            .zip(a)
            .map(|(x, y)| ((x - y) / y).abs())
            .fold(0.0, f64::max);
        (best, residual)
    }
}

/// The weight families `φ` supported by the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightFamily {
    /// `φⱼ(ξ) = i·ξⱼ`, `k = d`; the Weyl-derivative symbol.
    Axis,
    /// `φ₁(ξ) = (|ξ₁|^θ + … + |ξ_d|^θ)^{2/θ}`, `k = 1`.
    RadialPower { theta: f64 },
    /// Sampled level functions. The surjectivity of the level map is assumed, not checked.
    Tabulated(TabulatedLevels),
}

impl WeightFamily {
    pub fn check_dims(&self, k: usize, d: usize) -> Result<()> {
        match self {
            WeightFamily::Axis if k != d => Err(Error::InvalidInput(format!(
                "axis weight family requires k = d, got k = {k}, d = {d}"
            ))),
            WeightFamily::RadialPower { theta } => {
                if k != 1 {
                    return Err(Error::InvalidInput(format!(
                        "radial power weight family requires k = 1, got {k}"
                    )));
                }
                if !(theta.is_finite() && *theta > 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "radial power exponent must be positive, got {theta}"
                    )));
                }
                Ok(())
            }
            WeightFamily::Tabulated(t) if t.k != k || t.d != d => {
                Err(Error::InvalidInput(format!(
                    "tabulated family has k = {}, d = {}, problem has k = {k}, d = {d}",
                    t.k, t.d
                )))
            }
            _ => Ok(()),
        }
    }

    /// `(|φ₁(ξ)|,…,|φ_k(ξ)|)` and the phases `arg φⱼ(ξ)`.
    pub fn levels(&self, xi: &[f64]) -> Levels {
        match self {
            WeightFamily::Axis => Levels {
                moduli: xi.iter().map(|x| x.abs()).collect(),
                phases: xi
                    .iter()
                    .map(|&x| {
                        if x > 0.0 {
                            FRAC_PI_2
                        } else if x < 0.0 {
                            -FRAC_PI_2
                        } else {
                            0.0
                        }
                    })
                    .collect(),
            },
            WeightFamily::RadialPower { theta } => {
                let s: f64 = xi.iter().map(|x| x.abs().powf(*theta)).sum();
                Levels {
                    moduli: vec![s.powf(2.0 / theta)],
                    phases: vec![0.0],
                }
            }
            WeightFamily::Tabulated(t) => {
                let idx = t.nearest_point(xi);
                Levels {
                    moduli: t.levels[idx].clone(),
                    phases: vec![0.0; t.k],
                }
            }
        }
    }

    /// `φ^α(ξ)` with principal-branch fractional powers taken factor by factor.
    pub fn power(&self, xi: &[f64], alpha: &[f64]) -> Complex64 {
        power_from_levels(&self.levels(xi), alpha)
    }

    /// A point `ξ̂ ∈ ℝ^d` with `|φⱼ(ξ̂)| = aⱼ`.
    pub fn xi_for_levels(&self, a: &[f64], d: usize) -> Result<Vec<f64>> {
        self.xi_for_levels_with_residual(a, d).map(|(xi, _)| xi)
    }

    /// As [`Self::xi_for_levels`], also returning the achieved max relative level residual.
    pub fn xi_for_levels_with_residual(&self, a: &[f64], d: usize) -> Result<(Vec<f64>, f64)> {
        if let Some(bad) = a.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::InvalidInput(format!(
                "levels must be positive and finite, got {bad}"
            )));
        }
        match self {
            WeightFamily::Axis => Ok((a.to_vec(), 0.0)),
            WeightFamily::RadialPower { theta } => {
                // Diagonal point: d·c^θ = a^{θ/2}.
                let c = a[0].sqrt() * (d as f64).powf(-1.0 / theta);
                Ok((vec![c; d], 0.0))
            }
            WeightFamily::Tabulated(t) => {
                let (idx, residual) = t.nearest_levels(a);
                if residual > t.tolerance {
                    return Err(Error::LevelUnreachable {
                        residual,
                        tolerance: t.tolerance,
                    });
                }
                Ok((t.points[idx].clone(), residual))
            }
        }
    }
}

/// Free-function form of [`WeightFamily::levels`].
pub fn weight_levels(family: &WeightFamily, xi: &[f64]) -> Levels {
    family.levels(xi)
}

/// Free-function form of [`WeightFamily::power`].
pub fn weight_power(family: &WeightFamily, xi: &[f64], alpha: &[f64]) -> Complex64 {
    family.power(xi, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn axis_levels_and_phases() {
        let l = WeightFamily::Axis.levels(&[3.0, -4.0]);
        assert_eq!(l.moduli, vec![3.0, 4.0]);
        assert_eq!(l.phases, vec![PI / 2.0, -PI / 2.0]);
    }

    #[test]
    fn radial_levels() {
        let l = WeightFamily::RadialPower { theta: 2.0 }.levels(&[3.0, 4.0]);
        assert!(rel(l.moduli[0], 25.0) < 1e-15);
        assert_eq!(l.phases, vec![0.0]);
    }

    #[test]
    fn zero_point_has_zero_levels() {
        assert_eq!(
            WeightFamily::Axis.levels(&[0.0, 0.0]).moduli,
            vec![0.0, 0.0]
        );
        assert_eq!(
            WeightFamily::RadialPower { theta: 1.5 }
                .levels(&[0.0, 0.0])
                .moduli,
            vec![0.0]
        );
    }

    #[test]
    fn power_examples() {
        let one = WeightFamily::Axis.power(&[0.0, 5.0], &[0.0, 0.0]);
        assert_eq!(one, Complex64::new(1.0, 0.0));
        let v = WeightFamily::Axis.power(&[2.0], &[1.0]);
        assert!((v - Complex64::new(0.0, 2.0)).norm() < 1e-15);
        let r = WeightFamily::RadialPower { theta: 2.0 }.power(&[3.0], &[0.5]);
        assert!((r - Complex64::new(3.0, 0.0)).norm() < 1e-14);
        // 0^α with α > 0 vanishes, 0^0 = 1.
        assert_eq!(
            WeightFamily::Axis.power(&[0.0, 2.0], &[1.0, 1.0]),
            Complex64::new(0.0, 0.0)
        );
        let mixed = WeightFamily::Axis.power(&[0.0, 2.0], &[0.0, 1.0]);
        assert!((mixed - Complex64::new(0.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn negative_axis_fractional_power_uses_factor_phase() {
        // (i·(−4))^{1/2} = 2·e^{−iπ/4}
        let v = WeightFamily::Axis.power(&[-4.0], &[0.5]);
        let expect = Complex64::from_polar(2.0, -PI / 4.0);
        assert!((v - expect).norm() < 1e-15);
    }

    #[test]
    fn inverse_level_examples() {
        assert_eq!(
            WeightFamily::Axis.xi_for_levels(&[3.0, 4.0], 2).unwrap(),
            vec![3.0, 4.0]
        );
        let xi = WeightFamily::RadialPower { theta: 2.0 }
            .xi_for_levels(&[25.0], 2)
            .unwrap();
        assert!(rel(xi[0], 12.5f64.sqrt()) < 1e-15 && rel(xi[1], 12.5f64.sqrt()) < 1e-15);
        let xi = WeightFamily::RadialPower { theta: 1.0 }
            .xi_for_levels(&[9.0], 1)
            .unwrap();
        assert!(rel(xi[0], 3.0) < 1e-15);
        assert!(WeightFamily::Axis.xi_for_levels(&[0.0, 1.0], 2).is_err());
    }

    #[test]
    fn tabulated_csv_lookup() {
        let csv = "xi1,xi2,level1\n0,0,1.0\n0,1,2.0\n1,0,3.0\n1,1,4.0\n";
        let t = TabulatedLevels::from_csv_reader(csv.as_bytes(), 2, 1).unwrap();
        let fam = WeightFamily::Tabulated(t);
        assert_eq!(fam.levels(&[0.9, 0.2]).moduli, vec![3.0]);
        assert_eq!(fam.xi_for_levels(&[4.0], 2).unwrap(), vec![1.0, 1.0]);
        match fam.xi_for_levels(&[2.5], 2) {
            Err(Error::LevelUnreachable { residual, .. }) => assert!(residual > 0.1),
            other => panic!("expected LevelUnreachable, got {other:?}"),
        }
        let bad = "xi1,level1\n0,0.0\n";
        assert!(TabulatedLevels::from_csv_reader(bad.as_bytes(), 1, 1).is_err());
    }

    proptest! {
        #[test]
        fn level_round_trip_axis(a in proptest::collection::vec(-13.8f64..13.8, 1..4)) {
            let a: Vec<f64> = a.iter().map(|x| x.exp()).collect();
            let fam = WeightFamily::Axis;
            let xi = fam.xi_for_levels(&a, a.len()).unwrap();
            let back = fam.levels(&xi).moduli;
            for (x, y) in back.iter().zip(&a) {
                prop_assert!(rel(*x, *y) < 1e-10);
            }
        }

        #[test]
        fn level_round_trip_radial(la in -13.8f64..13.8, theta in 0.3f64..4.0, d in 1usize..5) {
            let a = la.exp();
            let fam = WeightFamily::RadialPower { theta };
            let xi = fam.xi_for_levels(&[a], d).unwrap();
            prop_assert!(rel(fam.levels(&xi).moduli[0], a) < 1e-10);
        }

        #[test]
        fn power_is_multiplicative(
            xi in proptest::collection::vec(prop_oneof![-50.0f64..-1e-3, 1e-3f64..50.0], 2),
            a in proptest::collection::vec(0.0f64..3.0, 2),
            b in proptest::collection::vec(0.0f64..3.0, 2),
        ) {
            let fam = WeightFamily::Axis;
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let lhs = fam.power(&xi, &sum);
            let rhs = fam.power(&xi, &a) * fam.power(&xi, &b);
            prop_assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm());
            let modulus: f64 = fam.levels(&xi).moduli.iter().zip(&a).map(|(m, e)| m.powf(*e)).product();
            prop_assert!(rel(fam.power(&xi, &a).norm(), modulus) < 1e-12);
        }
    }
}
