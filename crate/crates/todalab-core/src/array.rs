//! Triangular arrays (patterns) and their time-indexed trajectories.

use crate::error::{LabError, Result};
use crate::grid::TimeGrid;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// A real triangular pattern (T_{k,i}) for 1 ≤ i ≤ k ≤ N, stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangularArray {
    n: usize,
    entries: Vec<f64>,
}

fn row_offset(k: usize) -> usize {
    k * (k - 1) / 2
}

impl TriangularArray {
    pub fn zeros(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(LabError::invalid("pattern size must be positive"));
        }
        Ok(Self { n, entries: vec![0.0; n * (n + 1) / 2] })
    }

    /// Builds a pattern from rows `[[T_11], [T_21, T_22], ...]`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut arr = Self::zeros(n)?;
        for (k, row) in rows.iter().enumerate() {
            if row.len() != k + 1 {
                return Err(LabError::invalid(format!(
                    "row {} must have {} entries, got {}",
                    k + 1,
                    k + 1,
                    row.len()
                )));
            }
            for (i, &v) in row.iter().enumerate() {
                arr.set(k + 1, i + 1, v)?;
            }
        }
        Ok(arr)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn check_index(&self, k: usize, i: usize) -> Result<()> {
        if k == 0 || k > self.n || i == 0 || i > k {
            return Err(LabError::invalid(format!(
                "pattern index (k={k}, i={i}) out of range for n={}",
                self.n
            )));
        }
        Ok(())
    }

    /// Entry T_{k,i}, 1-based with 1 ≤ i ≤ k ≤ N.
    pub fn get(&self, k: usize, i: usize) -> Result<f64> {
        self.check_index(k, i)?;
        Ok(self.entries[row_offset(k) + i - 1])
    }

    pub fn set(&mut self, k: usize, i: usize, value: f64) -> Result<()> {
        self.check_index(k, i)?;
        if !value.is_finite() {
            return Err(LabError::invalid(format!(
                "pattern entry (k={k}, i={i}) must be finite, got {value}"
            )));
        }
        self.entries[row_offset(k) + i - 1] = value;
        Ok(())
    }

    /// Row k as a slice (T_{k,1}, ..., T_{k,k}).
    pub fn row(&self, k: usize) -> &[f64] {
        &self.entries[row_offset(k)..row_offset(k) + k]
    }

    /// Bottom row (T_{N,1}, ..., T_{N,N}).
    pub fn bottom_row(&self) -> &[f64] {
        self.row(self.n)
    }

    /// Flat row-major entries, rows in increasing k.
    pub fn flat(&self) -> &[f64] {
        &self.entries
    }

    pub fn flat_mut(&mut self) -> &mut [f64] {
        &mut self.entries
    }

    /// Checks the interlacing constraints T_{k+1,i} ≥ T_{k,i} ≥ T_{k+1,i+1}
    /// up to `tol` slack.
    pub fn is_interlaced(&self, tol: f64) -> bool {
        for k in 1..self.n {
            for i in 1..=k {
                let upper = self.get(k + 1, i).unwrap();
                let mid = self.get(k, i).unwrap();
                let lower = self.get(k + 1, i + 1).unwrap();
                if upper < mid - tol || mid < lower - tol {
                    return false;
                }
            }
        }
        true
    }

    /// Column header order used by the pattern CSV: T_1_1, T_2_1, T_2_2, ...
    pub fn csv_headers(n: usize) -> Vec<String> {
        let mut out = Vec::with_capacity(n * (n + 1) / 2);
        for k in 1..=n {
            for i in 1..=k {
                out.push(format!("T_{k}_{i}"));
            }
        }
        out
    }
}

/// A triangular pattern per grid index m ≥ 1 (patterns built from path
/// transforms are undefined at t₀).
#[derive(Clone, Debug, PartialEq)]
pub struct PatternTrajectory {
    grid: TimeGrid,
    states: Vec<TriangularArray>,
}

impl PatternTrajectory {
    pub fn new(grid: TimeGrid, states: Vec<TriangularArray>) -> Result<Self> {
        if states.len() != grid.steps() {
            return Err(LabError::invalid(format!(
                "trajectory has {} states but the grid has {} points past t₀",
                states.len(),
                grid.steps()
            )));
        }
        let n = states[0].n();
        if states.iter().any(|s| s.n() != n) {
            return Err(LabError::invalid("trajectory states must share one size"));
        }
        Ok(Self { grid, states })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.states[0].n()
    }

    /// State at grid index m, 1 ≤ m ≤ steps.
    pub fn state(&self, m: usize) -> Result<&TriangularArray> {
        if m == 0 || m > self.states.len() {
            return Err(LabError::invalid(format!(
                "trajectory index m={m} out of range 1..={}",
                self.states.len()
            )));
        }
        Ok(&self.states[m - 1])
    }

    pub fn states(&self) -> &[TriangularArray] {
        &self.states
    }

    pub fn last(&self) -> &TriangularArray {
        self.states.last().expect("trajectory is never empty")
    }

    /// Writes the trajectory as CSV with header `t,T_1_1,T_2_1,T_2_2,...`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        write!(out, "t")?;
        for h in TriangularArray::csv_headers(self.n()) {
            write!(out, ",{h}")?;
        }
        writeln!(out)?;
        for m in 1..=self.states.len() {
            write!(out, "{:.16e}", self.grid.t(m))?;
            for v in self.states[m - 1].flat() {
                write!(out, ",{v:.16e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}
