//! Complex functions sampled on rectangular, cell-centered frequency grids.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::problem::NormIndex;

/// One grid axis: `count` cells of equal width covering `[min, max]`; nodes sit at cell centers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && max > min) || count == 0 {
            return Err(Error::InvalidInput(format!(
                "grid axis needs finite min < max and count >= 1, got [{min}, {max}] x {count}"
            )));
        }
        Ok(Self { min, max, count })
    }

    /// Axis whose `count` nodes are centered on `center` with spacing `step`.
    pub fn centered(center: f64, step: f64, count: usize) -> Result<Self> {
        let half = 0.5 * step * count as f64;
        Self::new(center - half, center + half, count)
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / self.count as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.min + (i as f64 + 0.5) * self.step()
    }

    /// Index of the cell containing `x`, clamped to the axis.
    pub fn nearest(&self, x: f64) -> usize {
        let i = ((x - self.min) / self.step()).floor();
        i.clamp(0.0, (self.count - 1) as f64) as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    axes: Vec<GridAxis>,
}

impl FrequencyGrid {
    pub fn new(axes: Vec<GridAxis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidInput("grid needs at least one axis".into()));
        }
        Ok(Self { axes })
    }

    /// Cube `[center − half_width, center + half_width]` with `count` cells per axis.
    pub fn cube(center: &[f64], half_width: f64, count: usize) -> Result<Self> {
        let axes = center
            .iter()
            .map(|&c| GridAxis::new(c - half_width, c + half_width, count))
            .collect::<Result<Vec<_>>>()?;
        Self::new(axes)
    }

    pub fn axes(&self) -> &[GridAxis] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.step()).product()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.count).collect()
    }

    /// Multi-index of flat index `idx` (last axis fastest).
    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.axes.len()];
        for (slot, axis) in out.iter_mut().zip(&self.axes).rev() {
            *slot = idx % axis.count;
            idx /= axis.count;
        }
        out
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .zip(&self.axes)
            .fold(0, |acc, (&i, axis)| acc * axis.count + i)
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx)
            .iter()
            .zip(&self.axes)
            .map(|(&i, axis)| axis.node(i))
            .collect()
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }

    /// Flat index of the cell containing `xi` (clamped to the grid).
    pub fn nearest(&self, xi: &[f64]) -> usize {
        let multi: Vec<usize> = self
            .axes
            .iter()
            .zip(xi)
            .map(|(a, &x)| a.nearest(x))
            .collect();
        self.flat_index(&multi)
    }

    fn same_as(&self, other: &FrequencyGrid) -> bool {
        self.axes.len() == other.axes.len()
            && self.axes.iter().zip(&other.axes).all(|(a, b)| {
                a.count == b.count
                    && (a.min - b.min).abs() <= 1e-12 * (1.0 + a.min.abs())
                    && (a.max - b.max).abs() <= 1e-12 * (1.0 + a.max.abs())
            })
    }
}

/// A complex function sampled at the nodes of a [`FrequencyGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction {
    grid: FrequencyGrid,
    values: Vec<Complex64>,
}

impl SpectralFunction {
    pub fn new(grid: FrequencyGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values
            .iter()
            .any(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::InvalidInput("spectral values must be finite".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: FrequencyGrid, mut f: impl FnMut(&[f64]) -> Complex64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: FrequencyGrid) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Rectangle-rule `L_p` norm; the maximum modulus for `p = ∞`.
    pub fn norm(&self, p: NormIndex) -> f64 {
        match p {
            NormIndex::Infinity => self.values.iter().map(|v| v.norm()).fold(0.0, f64::max),
            NormIndex::Finite(p) => {
                let vol = self.grid.cell_volume();
                let scale = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
                if scale == 0.0 {
                    return 0.0;
                }
                let s: f64 = self.values.iter().map(|v| (v.norm() / scale).powf(p)).sum();
                scale * (s * vol).powf(1.0 / p)
            }
        }
    }

    /// Pointwise product with `f(ξ)`.
    pub fn map_with(&self, mut f: impl FnMut(&[f64], Complex64) -> Complex64) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| f(&self.grid.point(i), v))
            .collect();
        Self {
            grid: self.grid.clone(),
            values,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn check_same_grid(&self, other: &SpectralFunction) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch(
                "spectra live on different grids".into(),
            ))
        }
    }

    pub fn add(&self, other: &SpectralFunction) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &SpectralFunction) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// CSV with columns `xi1..xid,re,im`, one row per node, last axis fastest.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.grid.dim()).map(|i| format!("xi{i}")).collect();
        header.push("re".into());
        header.push("im".into());
        w.write_record(&header)?;
        for (i, v) in self.values.iter().enumerate() {
            let mut row: Vec<String> = self
                .grid
                .point(i)
                .iter()
                .map(|x| format!("{x:.17e}"))
                .collect();
            row.push(format!("{:.17e}", v.re));
            row.push(format!("{:.17e}", v.im));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the layout written by [`Self::write_csv`]; rows may come in any order but
    /// must cover a complete uniform grid.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let width = rdr.headers()?.len();
        if width < 3 {
            return Err(Error::Parse(format!(
                "spectral CSV needs at least one coordinate plus re, im; got {width} columns"
            )));
        }
        let d = width - 2;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            let vals = record
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|e| Error::Parse(format!("row {}: {e}: {f:?}", line + 2)))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(vals);
        }
        let mut axes = Vec::with_capacity(d);
        let mut axis_values = Vec::with_capacity(d);
        for a in 0..d {
            let coords = unique_sorted(rows.iter().map(|r| r[a]));
            if coords.len() < 2 {
                return Err(Error::NonUniformGrid(format!(
                    "axis {} has a single coordinate; cell width cannot be inferred",
                    a + 1
                )));
            }
            let step = (coords[coords.len() - 1] - coords[0]) / (coords.len() - 1) as f64;
            for w in coords.windows(2) {
                if ((w[1] - w[0]) - step).abs() > 1e-6 * step {
                    return Err(Error::NonUniformGrid(format!(
                        "axis {} spacing varies",
                        a + 1
                    )));
                }
            }
            axes.push(GridAxis::new(
                coords[0] - 0.5 * step,
                coords[coords.len() - 1] + 0.5 * step,
                coords.len(),
            )?);
            axis_values.push(coords);
        }
        let grid = FrequencyGrid::new(axes)?;
        if rows.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} rows do not fill a {:?} grid",
                rows.len(),
                grid.shape()
            )));
        }
        let mut values = vec![None; grid.len()];
        for r in &rows {
            let multi: Vec<usize> = (0..d).map(|a| grid.axes()[a].nearest(r[a])).collect();
            let idx = grid.flat_index(&multi);
            if values[idx]
                .replace(Complex64::new(r[d], r[d + 1]))
                .is_some()
            {
                return Err(Error::GridMismatch(format!("duplicate node at row {r:?}")));
            }
        }
        let values = values
            .into_iter()
            .map(|v| v.ok_or_else(|| Error::GridMismatch("missing grid node".into())))
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid, values)
    }
}

fn unique_sorted(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * scale);
    v
}
