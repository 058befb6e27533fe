//! Sampled vector-valued paths on a uniform time grid, Brownian path
//! sampling, and the path CSV interchange format.

use crate::error::{LabError, Result};
use crate::grid::TimeGrid;
use crate::rng::RngStream;
use std::io::{BufRead, Write};

/// Drift per unit time for a Brownian path.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftVector(pub Vec<f64>);

impl DriftVector {
    pub fn zero(dims: usize) -> Self {
        Self(vec![0.0; dims])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A path sampled at every grid point: `values[m][i] = η_i(t_m)`.
///
/// Transformed paths are undefined at t₀ in some coordinates (their defining
/// integrals vanish there); those coordinates carry `defined_from[i] = 1` and
/// a finite placeholder is stored so that the buffer never holds non-finite
/// entries.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorPath {
    grid: TimeGrid,
    dims: usize,
    values: Vec<Vec<f64>>,
    defined_from: Vec<usize>,
}

impl VectorPath {
    pub fn new(grid: TimeGrid, values: Vec<Vec<f64>>) -> Result<Self> {
        let dims = values.first().map(|r| r.len()).unwrap_or(0);
        Self::with_defined_from(grid, values, vec![0; dims])
    }

    pub fn with_defined_from(
        grid: TimeGrid,
        values: Vec<Vec<f64>>,
        defined_from: Vec<usize>,
    ) -> Result<Self> {
        if values.len() != grid.steps() + 1 {
            return Err(LabError::invalid(format!(
                "path has {} rows but the grid has {} points",
                values.len(),
                grid.steps() + 1
            )));
        }
        let dims = values[0].len();
        if dims == 0 {
            return Err(LabError::invalid("path must have at least one coordinate"));
        }
        if values.iter().any(|row| row.len() != dims) {
            return Err(LabError::invalid("ragged path rows"));
        }
        if defined_from.len() != dims {
            return Err(LabError::invalid("defined_from length must match dims"));
        }
        for (m, row) in values.iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                if m >= defined_from[i] && !v.is_finite() {
                    return Err(LabError::invalid(format!(
                        "non-finite value at grid index {m}, coordinate {}",
                        i + 1
                    )));
                }
            }
        }
        Ok(Self { grid, dims, values, defined_from })
    }

    /// Builds a path by evaluating `f(t_m)` at every grid point.
    pub fn from_fn(grid: TimeGrid, dims: usize, f: impl Fn(f64) -> Vec<f64>) -> Result<Self> {
        let values: Vec<Vec<f64>> = (0..=grid.steps()).map(|m| f(grid.t(m))).collect();
        if values.iter().any(|row| row.len() != dims) {
            return Err(LabError::invalid("from_fn closure returned wrong dimension"));
        }
        Self::new(grid, values)
    }

    pub fn zeros(grid: TimeGrid, dims: usize) -> Self {
        let values = vec![vec![0.0; dims]; grid.steps() + 1];
        Self { grid, dims, values, defined_from: vec![0; dims] }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Grid index from which coordinate `i` (zero-based) is defined.
    pub fn defined_from(&self, i: usize) -> usize {
        self.defined_from[i]
    }

    pub fn defined_from_slice(&self) -> &[usize] {
        &self.defined_from
    }

    /// Value of coordinate `i` (zero-based) at grid index `m`; errors if the
    /// coordinate is undefined there.
    pub fn value(&self, m: usize, i: usize) -> Result<f64> {
        if m > self.grid.steps() || i >= self.dims {
            return Err(LabError::invalid(format!("index ({m}, {i}) out of range")));
        }
        if m < self.defined_from[i] {
            return Err(LabError::invalid(format!(
                "coordinate {} is undefined at grid index {m}",
                i + 1
            )));
        }
        Ok(self.values[m][i])
    }

    /// Raw row at grid index `m` (placeholders included where undefined).
    pub fn row(&self, m: usize) -> &[f64] {
        &self.values[m]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// Sum of coordinates at grid index `m`, defined whenever every
    /// coordinate is.
    pub fn coordinate_sum(&self, m: usize) -> Result<f64> {
        let from = self.defined_from.iter().copied().max().unwrap_or(0);
        if m < from {
            return Err(LabError::invalid(format!(
                "coordinate sum undefined at grid index {m}"
            )));
        }
        Ok(self.values[m].iter().sum())
    }

    /// Single-coordinate time series (placeholders included where undefined).
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[i]).collect()
    }

    /// Writes the path as CSV with header `t,x1,...,xN` at full double
    /// precision.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        write!(out, "t")?;
        for i in 1..=self.dims {
            write!(out, ",x{i}")?;
        }
        writeln!(out)?;
        for m in 0..=self.grid.steps() {
            write!(out, "{:.16e}", self.grid.t(m))?;
            for i in 0..self.dims {
                write!(out, ",{:.16e}", self.values[m][i])?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// Reads a path written by [`write_csv`]. The grid is reconstructed from
    /// the time column, which must be uniform starting at 0.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut dims = 0usize;
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if lineno == 0 {
                let fields: Vec<&str> = line.split(',').collect();
                if fields.first() != Some(&"t") || fields.len() < 2 {
                    return Err(LabError::invalid("path CSV must start with header t,x1,..."));
                }
                dims = fields.len() - 1;
                continue;
            }
            let parsed: std::result::Result<Vec<f64>, _> =
                line.split(',').map(str::parse::<f64>).collect();
            let parsed = parsed
                .map_err(|e| LabError::invalid(format!("line {}: {e}", lineno + 1)))?;
            if parsed.len() != dims + 1 {
                return Err(LabError::invalid(format!(
                    "line {}: expected {} fields, got {}",
                    lineno + 1,
                    dims + 1,
                    parsed.len()
                )));
            }
            rows.push(parsed);
        }
        if rows.len() < 2 {
            return Err(LabError::invalid("path CSV needs at least two data rows"));
        }
        let steps = rows.len() - 1;
        let horizon = rows[steps][0];
        let grid = TimeGrid::new(horizon, steps)?;
        for (m, row) in rows.iter().enumerate() {
            if (row[0] - grid.t(m)).abs() > 1e-9 * (1.0 + horizon) {
                return Err(LabError::invalid(format!(
                    "time column is not a uniform grid from 0 at row {}",
                    m + 2
                )));
            }
        }
        let values = rows.into_iter().map(|row| row[1..].to_vec()).collect();
        VectorPath::new(grid, values)
    }
}

/// Samples a Brownian path started at 0 with the given drift: independent
/// Gaussian increments of mean `drift·dt` and variance `dt` per coordinate.
pub fn sample_brownian_path(
    dims: usize,
    drift: &DriftVector,
    grid: &TimeGrid,
    rng: &mut RngStream,
) -> Result<VectorPath> {
    if dims == 0 {
        return Err(LabError::invalid("dims must be positive"));
    }
    if drift.len() != dims {
        return Err(LabError::invalid(format!(
            "drift has length {} but dims = {dims}",
            drift.len()
        )));
    }
    let dt = grid.dt();
    let sd = dt.sqrt();
    let mut values = Vec::with_capacity(grid.steps() + 1);
    values.push(vec![0.0; dims]);
    for m in 1..=grid.steps() {
        let prev = &values[m - 1];
        let row: Vec<f64> = (0..dims)
            .map(|i| prev[i] + drift.0[i] * dt + sd * rng.standard_normal())
            .collect();
        values.push(row);
    }
    VectorPath::new(grid.clone(), values)
}
