//! The geometric path transforms: single exchange maps, the level
//! compositions, the full transform, its rescaled family, and the
//! offset-started pattern dynamics.

use crate::array::{PatternTrajectory, TriangularArray};
use crate::error::{LabError, Result};
use crate::grsk::engine::FinePath;
use crate::logsum::QuadratureConfig;
use crate::path::VectorPath;

fn check_index(i: usize, dims: usize) -> Result<()> {
    if i == 0 || i >= dims {
        return Err(LabError::invalid(format!(
            "transform index must satisfy 1 <= i <= {}, got {i}",
            dims.saturating_sub(1)
        )));
    }
    Ok(())
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(LabError::invalid(format!("beta must be positive, got {beta}")));
    }
    Ok(())
}

/// Runs the canonical composition word up to level `k_max`: for each level
/// k = 2..k_max the exchange maps are applied at indices k−1 down to 1.
/// Returns the fine path and, if requested, coarse snapshots of rows 1..k
/// taken when each level completes.
fn run_word(
    path: &VectorPath,
    k_max: usize,
    beta: f64,
    cfg: &QuadratureConfig,
    capture: bool,
) -> Result<(FinePath, Vec<Vec<Vec<f64>>>)> {
    let mut fine = FinePath::from_path(path, cfg.refine)?;
    let mut rows = Vec::new();
    if capture {
        rows.push(vec![fine.coarse_column(0)]);
    }
    for k in 2..=k_max {
        for i in (1..k).rev() {
            fine.apply_ti(i - 1, beta, cfg.rule)?;
        }
        if capture {
            rows.push((0..k).map(|i| fine.coarse_column(i)).collect());
        }
    }
    Ok((fine, rows))
}

fn pattern_from_rows(path: &VectorPath, rows: Vec<Vec<Vec<f64>>>) -> Result<PatternTrajectory> {
    let n = rows.len();
    let steps = path.grid().steps();
    let mut states = Vec::with_capacity(steps);
    for m in 1..=steps {
        let mut arr = TriangularArray::zeros(n)?;
        for (k, row) in rows.iter().enumerate() {
            for (i, col) in row.iter().enumerate() {
                arr.set(k + 1, i + 1, col[m])?;
            }
        }
        states.push(arr);
    }
    PatternTrajectory::new(path.grid().clone(), states)
}

/// Single exchange map at row index i (1-based): adds
/// L(t) = log ∫₀^t e^{η_{i+1}−η_i} ds to coordinate i and subtracts it from
/// coordinate i+1. Output coordinates i, i+1 are undefined at t₀.
pub fn transform_ti(path: &VectorPath, i: usize) -> Result<VectorPath> {
    transform_ti_with(path, i, &QuadratureConfig::default())
}

/// `transform_ti` with an explicit quadrature configuration.
pub fn transform_ti_with(
    path: &VectorPath,
    i: usize,
    cfg: &QuadratureConfig,
) -> Result<VectorPath> {
    check_index(i, path.dims())?;
    let mut fine = FinePath::from_path(path, cfg.refine)?;
    fine.apply_ti(i - 1, 1.0, cfg.rule)?;
    fine.to_vector_path(path.grid())
}

/// Trajectory of the pattern rows 1..k produced by the composition word up
/// to level k.
pub fn transform_pi_k(path: &VectorPath, k: usize) -> Result<PatternTrajectory> {
    transform_pi_k_with(path, k, &QuadratureConfig::default())
}

/// `transform_pi_k` with an explicit quadrature configuration.
pub fn transform_pi_k_with(
    path: &VectorPath,
    k: usize,
    cfg: &QuadratureConfig,
) -> Result<PatternTrajectory> {
    if k == 0 || k > path.dims() {
        return Err(LabError::invalid(format!(
            "level must satisfy 1 <= k <= {}, got {k}",
            path.dims()
        )));
    }
    let (_, rows) = run_word(path, k, 1.0, cfg, true)?;
    pattern_from_rows(path, rows)
}

/// Full pattern trajectory: rows 1..N of the composition word.
pub fn transform_pattern(path: &VectorPath) -> Result<PatternTrajectory> {
    transform_pi_k(path, path.dims())
}

/// `transform_pattern` with an explicit quadrature configuration.
pub fn transform_pattern_with(
    path: &VectorPath,
    cfg: &QuadratureConfig,
) -> Result<PatternTrajectory> {
    transform_pi_k_with(path, path.dims(), cfg)
}

/// The full transform: final state of the composition word over all N
/// levels. For N = 1 this is the identity.
pub fn transform_t(path: &VectorPath) -> Result<VectorPath> {
    transform_t_with(path, &QuadratureConfig::default())
}

/// `transform_t` with an explicit quadrature configuration.
pub fn transform_t_with(path: &VectorPath, cfg: &QuadratureConfig) -> Result<VectorPath> {
    let (fine, _) = run_word(path, path.dims(), 1.0, cfg, false)?;
    fine.to_vector_path(path.grid())
}

/// Rescaled transform family: each exchange map adds
/// (1/β)·log(β² ∫₀^t e^{β(η_{i+1}−η_i)} ds). β = 1 coincides with
/// `transform_t`; as β → ∞ the output approaches the max-plus transform.
pub fn transform_t_beta(path: &VectorPath, beta: f64) -> Result<VectorPath> {
    transform_t_beta_with(path, beta, &QuadratureConfig::default())
}

/// `transform_t_beta` with an explicit quadrature configuration.
pub fn transform_t_beta_with(
    path: &VectorPath,
    beta: f64,
    cfg: &QuadratureConfig,
) -> Result<VectorPath> {
    check_beta(beta)?;
    let (fine, _) = run_word(path, path.dims(), beta, cfg, false)?;
    fine.to_vector_path(path.grid())
}

/// Pattern dynamics started at the triangular array `z` instead of the
/// pattern's own singular entrance point. Row 1 is z_{1,1} + W₁; row k is
/// produced from row k−1 by a cascade that seeds each integral with unit
/// initial mass, so the pattern starts exactly at `z` and stays finite at
/// t₀. As the offsets z_{k,i} − z_{k+1,i+1} all tend to −∞ the bottom row
/// approaches z_{1,1} + (𝒯W) up to per-coordinate shifts.
pub fn transform_t_offset(path: &VectorPath, z: &TriangularArray) -> Result<PatternTrajectory> {
    transform_t_offset_with(path, z, &QuadratureConfig::default())
}

/// `transform_t_offset` with an explicit quadrature configuration.
pub fn transform_t_offset_with(
    path: &VectorPath,
    z: &TriangularArray,
    cfg: &QuadratureConfig,
) -> Result<PatternTrajectory> {
    let n = path.dims();
    if z.n() != n {
        return Err(LabError::invalid(format!(
            "offset array has {} rows but the path has {} coordinates",
            z.n(),
            n
        )));
    }
    let fine = FinePath::from_path(path, cfg.refine)?;
    let grid = &fine.grid;
    let len = grid.n + 1;
    // rows[k-1][i-1] holds the fine column of Z_{k,i}
    let mut rows: Vec<Vec<Vec<f64>>> = Vec::with_capacity(n);
    let mut row1 = fine.cols[0].clone();
    let z11 = z.get(1, 1)?;
    for v in &mut row1 {
        *v += z11;
    }
    rows.push(vec![row1]);
    for k in 2..=n {
        let prev = &rows[k - 2];
        let mut row: Vec<Vec<f64>> = vec![Vec::new(); k];
        // corner entry starts from its own driving coordinate
        let mut upper: Vec<f64> = fine.cols[k - 1].clone();
        let zkk = z.get(k, k)?;
        for v in &mut upper {
            *v += zkk;
        }
        for j in (1..k).rev() {
            let below = &prev[j - 1];
            let log_int = grid.running_log_integral(
                |m| upper[m] - below[m],
                0.0,
                true,
                cfg.rule,
                0.0,
            )?;
            let mut entry = Vec::with_capacity(len);
            let mut carried = Vec::with_capacity(len);
            for m in 0..len {
                entry.push(upper[m] - log_int[m]);
                carried.push(below[m] + log_int[m]);
            }
            row[j] = entry;
            let shift = z.get(k, j)? - z.get(k - 1, j)?;
            for (v, c) in carried.iter_mut().zip(&mut upper) {
                *c = *v + shift;
            }
        }
        row[0] = upper;
        rows.push(row);
    }
    let steps = path.grid().steps();
    let refine = fine.refine;
    let mut states = Vec::with_capacity(steps);
    for m in 1..=steps {
        let mut arr = TriangularArray::zeros(n)?;
        for (k, row) in rows.iter().enumerate() {
            for (i, col) in row.iter().enumerate() {
                arr.set(k + 1, i + 1, col[m * refine])?;
            }
        }
        states.push(arr);
    }
    PatternTrajectory::new(path.grid().clone(), states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;
    use crate::path::{sample_brownian_path, DriftVector};
    use crate::rng::RngStream;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn zero_path(dims: usize, steps: usize) -> VectorPath {
        VectorPath::zeros(TimeGrid::new(1.0, steps).unwrap(), dims)
    }

    fn brownian(dims: usize, steps: usize, seed: u64) -> VectorPath {
        let grid = TimeGrid::new(1.0, steps).unwrap();
        let mut rng = RngStream::new(seed, 0);
        sample_brownian_path(dims, &DriftVector::zero(dims), &grid, &mut rng).unwrap()
    }

    #[test]
    fn ti_zero_path_gives_log_t() {
        let out = transform_ti(&zero_path(2, 1000), 1).unwrap();
        for &m in &[1usize, 13, 500, 1000] {
            let t = out.grid().t(m);
            assert_abs_diff_eq!(out.value(m, 0).unwrap(), t.ln(), epsilon = 1e-12);
            assert_abs_diff_eq!(out.value(m, 1).unwrap(), -t.ln(), epsilon = 1e-12);
        }
        assert_abs_diff_eq!(out.value(1000, 0).unwrap(), 0.0, epsilon = 1e-12);
        assert!(out.value(0, 0).is_err());
        assert_eq!(out.defined_from(0), 1);
        assert_eq!(out.defined_from(1), 1);
    }

    #[test]
    fn ti_exponential_integrand_example() {
        // η = (0, t): L(1) = log ∫₀¹ e^s ds = log(e − 1)
        let grid = TimeGrid::new(1.0, 1000).unwrap();
        let p = VectorPath::from_fn(grid, 2, |t| vec![0.0, t]).unwrap();
        let out = transform_ti(&p, 1).unwrap();
        let expected = 0.5413248546129181;
        assert_abs_diff_eq!(out.value(1000, 0).unwrap(), expected, epsilon = 1e-6);
        assert_abs_diff_eq!(out.value(1000, 1).unwrap(), 1.0 - expected, epsilon = 1e-6);
    }

    #[test]
    fn ti_rejects_bad_index() {
        let p = zero_path(3, 10);
        assert!(transform_ti(&p, 0).is_err());
        assert!(transform_ti(&p, 3).is_err());
        assert!(transform_ti(&p, 2).is_ok());
    }

    #[test]
    fn pi_k_level_one_is_identity_row() {
        let p = brownian(3, 50, 7);
        let pat = transform_pi_k(&p, 1).unwrap();
        for m in 1..=50 {
            let row = pat.state(m).unwrap().row(1).to_vec();
            assert_abs_diff_eq!(row[0], p.value(m, 0).unwrap(), epsilon = 0.0);
        }
    }

    #[test]
    fn pi_k_two_matches_single_transform_on_zero_path() {
        let pat = transform_pi_k(&zero_path(2, 200), 2).unwrap();
        for &m in &[1usize, 40, 200] {
            let t = pat.grid().t(m);
            let state = pat.state(m).unwrap();
            assert_abs_diff_eq!(state.get(2, 1).unwrap(), t.ln(), epsilon = 1e-12);
            assert_abs_diff_eq!(state.get(2, 2).unwrap(), -t.ln(), epsilon = 1e-12);
        }
    }

    #[test]
    fn pattern_row_sums_match_input_sums() {
        let p = brownian(4, 120, 11);
        let pat = transform_pattern(&p).unwrap();
        for &m in &[1usize, 17, 120] {
            let state = pat.state(m).unwrap();
            for k in 1..=4 {
                let row_sum: f64 = state.row(k).iter().sum();
                let input_sum: f64 = (0..k).map(|i| p.value(m, i).unwrap()).sum();
                assert_abs_diff_eq!(row_sum, input_sum, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn t_is_identity_for_one_coordinate() {
        let p = brownian(1, 30, 3);
        let out = transform_t(&p).unwrap();
        assert_eq!(out, p);
    }

    #[test]
    fn t_equals_ti_for_two_coordinates() {
        let p = brownian(2, 80, 5);
        let a = transform_t(&p).unwrap();
        let b = transform_ti(&p, 1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn t_beta_one_matches_t() {
        let p = brownian(3, 60, 9);
        let a = transform_t(&p).unwrap();
        let b = transform_t_beta(&p, 1.0).unwrap();
        for m in 1..=60 {
            for i in 0..3 {
                assert_abs_diff_eq!(
                    a.value(m, i).unwrap(),
                    b.value(m, i).unwrap(),
                    epsilon = 1e-13
                );
            }
        }
    }

    #[test]
    fn t_beta_zero_path_value() {
        // β = 1 on the zero path at t = 1: L = log(1·1) = 0
        let out = transform_t_beta(&zero_path(2, 100), 1.0).unwrap();
        assert_abs_diff_eq!(out.value(100, 0).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.value(100, 1).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn t_beta_rejects_nonpositive_beta() {
        let p = zero_path(2, 10);
        assert!(transform_t_beta(&p, 0.0).is_err());
        assert!(transform_t_beta(&p, -1.0).is_err());
    }

    #[test]
    fn offset_zero_path_unit_mass() {
        // zero path, equal diagonal offsets: L_m = log(1 + t_m)
        let mut z = TriangularArray::zeros(2).unwrap();
        z.set(1, 1, 0.3).unwrap();
        z.set(2, 1, -0.2).unwrap();
        z.set(2, 2, 0.3).unwrap();
        let pat = transform_t_offset(&zero_path(2, 500), &z).unwrap();
        for &m in &[1usize, 100, 500] {
            let t = pat.grid().t(m);
            let state = pat.state(m).unwrap();
            assert_abs_diff_eq!(state.get(1, 1).unwrap(), 0.3, epsilon = 1e-12);
            assert_abs_diff_eq!(state.get(2, 2).unwrap(), 0.3 - (1.0 + t).ln(), epsilon = 1e-9);
            assert_abs_diff_eq!(state.get(2, 1).unwrap(), -0.2 + (1.0 + t).ln(), epsilon = 1e-9);
        }
    }

    #[test]
    fn offset_linear_path_value_is_one() {
        // η = (0, s), zero offsets: L(1) = log(1 + (e−1)) = 1
        let grid = TimeGrid::new(1.0, 1000).unwrap();
        let p = VectorPath::from_fn(grid, 2, |t| vec![0.0, t]).unwrap();
        let z = TriangularArray::zeros(2).unwrap();
        let pat = transform_t_offset(&p, &z).unwrap();
        let state = pat.state(1000).unwrap();
        assert_abs_diff_eq!(state.get(2, 2).unwrap(), 1.0 - 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(state.get(2, 1).unwrap(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn offset_pattern_starts_at_z() {
        // deterministic zero path: first grid point within drift·dt of z
        let mut z = TriangularArray::zeros(3).unwrap();
        let vals = [0.5, -0.3, 0.2, 0.1, -0.4, 0.6];
        let mut idx = 0;
        for k in 1..=3 {
            for i in 1..=k {
                z.set(k, i, vals[idx]).unwrap();
                idx += 1;
            }
        }
        let pat = transform_t_offset(&zero_path(3, 1000), &z).unwrap();
        let state = pat.state(1).unwrap();
        let dt = 1e-3;
        for k in 1..=3 {
            for i in 1..=k {
                let drift_bound = 20.0 * dt;
                assert!(
                    (state.get(k, i).unwrap() - z.get(k, i).unwrap()).abs() < drift_bound,
                    "pattern entry ({k},{i}) moved too far at the first grid point"
                );
            }
        }
    }

    #[test]
    fn offset_far_apart_diagonal_recovers_plain_corners() {
        // z_{k,k} − z_{k−1,k−1} = +40 sends every offset to −∞, so the
        // corner entries reduce to the plain composition word up to z_{1,1}
        let p = brownian(3, 400, 21);
        let mut z = TriangularArray::zeros(3).unwrap();
        for k in 1..=3 {
            for i in 1..=k {
                z.set(k, i, 40.0 * k as f64).unwrap();
            }
        }
        let cfg = QuadratureConfig::default();
        let pat = transform_t_offset_with(&p, &z, &cfg).unwrap();
        let plain = transform_pattern_with(&p, &cfg).unwrap();
        let z11 = 40.0;
        // the two computations use different opening panels near t₀, which
        // leaves a relative discrepancy of order (δ/t)², hence the window
        for &m in &[200usize, 400] {
            let a = pat.state(m).unwrap();
            let b = plain.state(m).unwrap();
            for k in 1..=3 {
                assert_abs_diff_eq!(
                    a.get(k, k).unwrap() - z11,
                    b.get(k, k).unwrap(),
                    epsilon = 1e-6
                );
            }
        }
    }

    #[test]
    fn offset_shape_mismatch_rejected() {
        let z = TriangularArray::zeros(2).unwrap();
        assert!(transform_t_offset(&zero_path(3, 10), &z).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn sum_conservation_holds_for_random_paths(seed in 0u64..1000, i in 1usize..3) {
            let p = brownian(3, 40, seed);
            let out = transform_ti(&p, i).unwrap();
            for m in 1..=40 {
                let a = out.coordinate_sum(m).unwrap();
                let b = p.coordinate_sum(m).unwrap();
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}
