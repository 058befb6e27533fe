//! Max-plus counterparts of the path transforms: the running-infimum
//! exchange maps, their level compositions, and the full transform. These
//! are the β → ∞ limits of the rescaled transforms.
//!
//! No grid refinement is needed: for a piecewise-linear interpolant the
//! running infimum of a coordinate difference is attained at grid points, so
//! the coarse-grid computation is exact for the interpolant.

use crate::array::{PatternTrajectory, TriangularArray};
use crate::error::{LabError, Result};
use crate::path::VectorPath;

fn check_starts_at_zero(path: &VectorPath) -> Result<()> {
    let row = path.row(0);
    if row.iter().any(|&v| v != 0.0) {
        return Err(LabError::invalid("max-plus transforms require path(0) = 0"));
    }
    Ok(())
}

fn check_index(i: usize, dims: usize) -> Result<()> {
    if i == 0 || i >= dims {
        return Err(LabError::invalid(format!(
            "transform index must satisfy 1 <= i <= {}, got {i}",
            dims.saturating_sub(1)
        )));
    }
    Ok(())
}

/// In-place exchange map on columns (i, i+1), zero-based: subtracts the
/// running infimum of η_i − η_{i+1} from coordinate i and adds it to i+1.
fn apply_pi(cols: &mut [Vec<f64>], i: usize) {
    let len = cols[i].len();
    let mut inf = f64::INFINITY;
    for m in 0..len {
        let d = cols[i][m] - cols[i + 1][m];
        if d < inf {
            inf = d;
        }
        cols[i][m] -= inf;
        cols[i + 1][m] += inf;
    }
}

fn columns_of(path: &VectorPath) -> Vec<Vec<f64>> {
    (0..path.dims())
        .map(|i| (0..=path.grid().steps()).map(|m| path.row(m)[i]).collect())
        .collect()
}

fn run_word(path: &VectorPath, k_max: usize, capture: bool) -> (Vec<Vec<f64>>, Vec<Vec<Vec<f64>>>) {
    let mut cols = columns_of(path);
    let mut rows = Vec::new();
    if capture {
        rows.push(vec![cols[0].clone()]);
    }
    for k in 2..=k_max {
        for i in (1..k).rev() {
            apply_pi(&mut cols, i - 1);
        }
        if capture {
            rows.push(cols[..k].to_vec());
        }
    }
    (cols, rows)
}

fn path_from_columns(path: &VectorPath, cols: Vec<Vec<f64>>) -> Result<VectorPath> {
    let steps = path.grid().steps();
    let dims = cols.len();
    let mut values = vec![vec![0.0; dims]; steps + 1];
    for (i, col) in cols.iter().enumerate() {
        for (m, v) in col.iter().enumerate() {
            values[m][i] = *v;
        }
    }
    VectorPath::new(path.grid().clone(), values)
}

/// Single max-plus exchange map at row index i (1-based):
/// output = η − (inf_{s ≤ t} (η_i(s) − η_{i+1}(s)))·(e_i − e_{i+1}).
pub fn pitman_pi(path: &VectorPath, i: usize) -> Result<VectorPath> {
    check_starts_at_zero(path)?;
    check_index(i, path.dims())?;
    let mut cols = columns_of(path);
    apply_pi(&mut cols, i - 1);
    path_from_columns(path, cols)
}

/// Trajectory of max-plus pattern rows 1..k from the composition word.
pub fn gamma_k(path: &VectorPath, k: usize) -> Result<PatternTrajectory> {
    check_starts_at_zero(path)?;
    if k == 0 || k > path.dims() {
        return Err(LabError::invalid(format!(
            "level must satisfy 1 <= k <= {}, got {k}",
            path.dims()
        )));
    }
    let (_, rows) = run_word(path, k, true);
    let steps = path.grid().steps();
    let mut states = Vec::with_capacity(steps);
    for m in 1..=steps {
        let mut arr = TriangularArray::zeros(k)?;
        for (j, row) in rows.iter().enumerate() {
            for (i, col) in row.iter().enumerate() {
                arr.set(j + 1, i + 1, col[m])?;
            }
        }
        states.push(arr);
    }
    PatternTrajectory::new(path.grid().clone(), states)
}

/// Full max-plus transform: final state of the composition word.
pub fn pitman_transform(path: &VectorPath) -> Result<VectorPath> {
    check_starts_at_zero(path)?;
    let (cols, _) = run_word(path, path.dims(), false);
    path_from_columns(path, cols)
}
