//! Recovery from uniformly sampled signals via the discrete Fourier transform.
//!
//! Spectra use the unitary convention `Fx(ξ) = (2π)^{−d/2} ∫ x(t) e^{−i⟨ξ,t⟩} dt`,
//! discretized on the sample lattice so that `‖x‖₂` (rectangle rule in time)
//! equals the rectangle-rule norm of the spectrum exactly. Frequencies are
//! `2πk/(n·h)` with `k` running from `−⌊n/2⌋` upward.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::multipliers::MultiplierFamily;
use crate::problem::{AlphaVec, NormIndex, RecoveryProblem};
use crate::recovery::{apply_method, apply_operator};
use crate::spectral::{FrequencyGrid, GridAxis, SpectralFunction};

/// Samples `x(start + n∘spacing)` on a rectangular lattice, last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    pub start: Vec<f64>,
    pub spacing: Vec<f64>,
    pub shape: Vec<usize>,
    pub values: Vec<Complex64>,
}

impl SampledSignal {
    pub fn new(
        start: Vec<f64>,
        spacing: Vec<f64>,
        shape: Vec<usize>,
        values: Vec<Complex64>,
    ) -> Result<Self> {
        if start.is_empty() || start.len() != spacing.len() || start.len() != shape.len() {
            return Err(Error::InvalidInput(
                "start, spacing and shape must share a nonzero length".into(),
            ));
        }
        if spacing.iter().any(|h| !(h.is_finite() && *h > 0.0)) || shape.contains(&0) {
            return Err(Error::InvalidInput(
                "spacing must be positive and shape nonzero".into(),
            ));
        }
        if values.len() != shape.iter().product::<usize>() {
            return Err(Error::GridMismatch(format!(
                "{} samples do not fill shape {shape:?}",
                values.len()
            )));
        }
        Ok(Self {
            start,
            spacing,
            shape,
            values,
        })
    }

    /// Samples a function of time on `count` points starting at `start` with step `spacing`, per axis.
    pub fn from_fn(
        start: Vec<f64>,
        spacing: Vec<f64>,
        shape: Vec<usize>,
        mut f: impl FnMut(&[f64]) -> Complex64,
    ) -> Result<Self> {
        let n: usize = shape.iter().product();
        let mut values = Vec::with_capacity(n);
        let mut t = vec![0.0; shape.len()];
        for idx in 0..n {
            let mut rem = idx;
            for a in (0..shape.len()).rev() {
                t[a] = start[a] + (rem % shape[a]) as f64 * spacing[a];
                rem /= shape[a];
            }
            values.push(f(&t));
        }
        Self::new(start, spacing, shape, values)
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn norm_l2(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.cell_volume()).sqrt()
    }

    fn same_lattice(&self, other: &SampledSignal) -> Result<()> {
        let close = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + x.abs().max(y.abs())))
        };
        if self.shape != other.shape
            || !close(&self.spacing, &other.spacing)
            || !close(&self.start, &other.start)
        {
            return Err(Error::GridMismatch(
                "sampled signals use different lattices".into(),
            ));
        }
        Ok(())
    }

    /// Frequency grid matching this lattice.
    pub fn frequency_grid(&self) -> FrequencyGrid {
        let axes = self
            .shape
            .iter()
            .zip(&self.spacing)
            .map(|(&n, &h)| {
                let step = 2.0 * std::f64::consts::PI / (n as f64 * h);
                let kmin = -((n / 2) as f64);
                let min = (kmin - 0.5) * step;
                GridAxis::new(min, min + n as f64 * step, n).expect("positive step")
            })
            .collect();
        FrequencyGrid::new(axes).expect("nonempty axes")
    }

    pub fn to_spectrum(&self) -> SpectralFunction {
        let grid = self.frequency_grid();
        let mut buf = self.values.clone();
        fft_nd(&mut buf, &self.shape, FftDirection::Forward);
        let scale =
            self.cell_volume() * (2.0 * std::f64::consts::PI).powf(-(self.dim() as f64) / 2.0);
        let values = (0..grid.len())
            .map(|i| {
                let xi = grid.point(i);
                let phase: f64 = xi.iter().zip(&self.start).map(|(x, t)| x * t).sum();
                buf[self.bin_of(&grid.multi_index(i))] * scale * Complex64::from_polar(1.0, -phase)
            })
            .collect();
        SpectralFunction::new(grid, values).expect("finite spectrum")
    }

    /// Inverse of [`Self::to_spectrum`] onto this lattice.
    pub fn from_spectrum(&self, spectrum: &SpectralFunction) -> Result<SampledSignal> {
        let grid = self.frequency_grid();
        spectrum.check_same_grid(&SpectralFunction::zeros(grid.clone()))?;
        let n: usize = self.shape.iter().product();
        let scale = (2.0 * std::f64::consts::PI).powf(self.dim() as f64 / 2.0)
            / (self.cell_volume() * n as f64);
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..grid.len() {
            let xi = grid.point(i);
            let phase: f64 = xi.iter().zip(&self.start).map(|(x, t)| x * t).sum();
            buf[self.bin_of(&grid.multi_index(i))] =
                spectrum.values()[i] * Complex64::from_polar(scale, phase);
        }
        fft_nd(&mut buf, &self.shape, FftDirection::Inverse);
        SampledSignal::new(
            self.start.clone(),
            self.spacing.clone(),
            self.shape.clone(),
            buf,
        )
    }

    /// Flat DFT bin for a frequency-grid multi-index.
    fn bin_of(&self, multi: &[usize]) -> usize {
        let mut idx = 0;
        for (&m, &n) in multi.iter().zip(&self.shape) {
            let k = m as i64 - (n / 2) as i64;
            idx = idx * n + k.rem_euclid(n as i64) as usize;
        }
        idx
    }

    /// Share of spectral energy in the outermost frequency cells.
    pub fn boundary_mass(&self) -> f64 {
        let z = self.to_spectrum();
        let grid = z.grid();
        let total: f64 = z.values().iter().map(|v| v.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let edge: f64 = (0..grid.len())
            .filter(|&i| {
                grid.multi_index(i)
                    .iter()
                    .zip(&self.shape)
                    .any(|(&m, &n)| m == 0 || m + 1 == n)
            })
            .map(|i| z.values()[i].norm_sqr())
            .sum();
        edge / total
    }

    /// CSV with columns `t1..td,re,im`, last axis fastest.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.dim()).map(|i| format!("t{i}")).collect();
        header.push("re".into());
        header.push("im".into());
        w.write_record(&header)?;
        for (idx, v) in self.values.iter().enumerate() {
            let mut rem = idx;
            let mut t = vec![0.0; self.dim()];
            for a in (0..self.dim()).rev() {
                t[a] = self.start[a] + (rem % self.shape[a]) as f64 * self.spacing[a];
                rem /= self.shape[a];
            }
            let mut row: Vec<String> = t.iter().map(|x| format!("{x:.17e}")).collect();
            row.push(format!("{:.17e}", v.re));
            row.push(format!("{:.17e}", v.im));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let f = SpectralFunction::read_csv(reader)?;
        let axes = f.grid().axes();
        Self::new(
            axes.iter().map(|a| a.node(0)).collect(),
            axes.iter().map(|a| a.step()).collect(),
            f.grid().shape(),
            f.into_values(),
        )
    }
}

fn fft_nd(values: &mut [Complex64], shape: &[usize], direction: FftDirection) {
    let mut planner = FftPlanner::<f64>::new();
    let mut stride = 1;
    for a in (0..shape.len()).rev() {
        let n = shape[a];
        let fft = planner.plan_fft(n, direction);
        let block = n * stride;
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for outer in 0..values.len() / block {
            for inner in 0..stride {
                let base = outer * block + inner;
                for (i, v) in line.iter_mut().enumerate() {
                    *v = values[base + i * stride];
                }
                fft.process(&mut line);
                for (i, v) in line.iter().enumerate() {
                    values[base + i * stride] = *v;
                }
            }
        }
        stride = block;
    }
}

/// `Λ_α x` computed as `F⁻¹(φ^α·Fx)` on the sample lattice.
pub fn apply_time_operator(
    problem: &RecoveryProblem,
    x: &SampledSignal,
    alpha: &AlphaVec,
) -> Result<SampledSignal> {
    x.from_spectrum(&apply_operator(problem, &x.to_spectrum(), alpha))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeDomainRecovery {
    pub signal: SampledSignal,
    /// `‖Λ₀x − Φ(y)‖₂` when the true `Λ₀x` was supplied.
    pub error: Option<f64>,
    /// Largest boundary spectral share among the observations.
    pub boundary_mass: f64,
}

/// Applies the optimal method to sampled observations `yⱼ ≈ Λⱼx` (keyed by node index).
pub fn recover_time_domain(
    problem: &RecoveryProblem,
    fam: &MultiplierFamily,
    observations: &BTreeMap<usize, SampledSignal>,
    truth: Option<&SampledSignal>,
) -> Result<TimeDomainRecovery> {
    if problem.p() != NormIndex::Finite(2.0) {
        return Err(Error::UnsupportedNorm(format!(
            "time-domain recovery is L2 only, problem has p = {}",
            problem.p()
        )));
    }
    let first = observations
        .values()
        .next()
        .ok_or_else(|| Error::InvalidInput("no observations supplied".into()))?;
    if first.dim() != problem.d() {
        return Err(Error::GridMismatch(format!(
            "signal dimension {} differs from d = {}",
            first.dim(),
            problem.d()
        )));
    }
    for y in observations.values() {
        first.same_lattice(y)?;
    }
    let spectra: BTreeMap<usize, SpectralFunction> = observations
        .iter()
        .map(|(&j, y)| (j, y.to_spectrum()))
        .collect();
    let boundary_mass = observations
        .values()
        .map(SampledSignal::boundary_mass)
        .fold(0.0, f64::max);
    let signal = first.from_spectrum(&apply_method(fam, &spectra)?)?;
    let error = match truth {
        Some(t) => {
            first.same_lattice(t)?;
            let diff: Vec<Complex64> = t
                .values
                .iter()
                .zip(&signal.values)
                .map(|(a, b)| a - b)
                .collect();
            let diff =
                SampledSignal::new(t.start.clone(), t.spacing.clone(), t.shape.clone(), diff)?;
            Some(diff.norm_l2())
        }
        None => None,
    };
    Ok(TimeDomainRecovery {
        signal,
        error,
        boundary_mass,
    })
}
