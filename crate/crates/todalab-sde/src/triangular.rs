//! The triangular cascade driven by one Brownian motion per diagonal.
//!
//! The state is a triangular array Z = (Z_{k,i}), 1 ≤ i ≤ k ≤ N. Row 1 is
//! driven directly, dZ_{1,1} = dW₁, and each further row inherits the
//! increments of the row above it together with local exponential
//! corrections:
//!
//! ```text
//! dZ_{k,1} = dZ_{k−1,1} + e^{Z_{k,2}−Z_{k−1,1}} dt
//! dZ_{k,i} = dZ_{k−1,i} + (e^{Z_{k,i+1}−Z_{k−1,i}} − e^{Z_{k,i}−Z_{k−1,i−1}}) dt
//! dZ_{k,k} = dW_k − e^{Z_{k,k}−Z_{k−1,k−1}} dt,
//! ```
//!
//! where W is an N-dimensional Brownian motion with drift ν. The noise dW_i
//! therefore propagates down column i, and within each row the exponential
//! couplings telescope, so the bottom-row sum moves exactly by Σ_k dW_k at
//! every step. The same cascade in integrated form is what the path
//! transform with an offset array computes by quadrature, which gives a
//! strong (same-noise) cross-check of the Euler scheme.

use todalab_core::path::sample_brownian_path;
use todalab_core::whittaker::{sample_sigma, GibbsPatternLaw};
use todalab_core::{
    DriftVector, LabError, PatternTrajectory, Result, RngStream, TriangularArray, VectorPath,
};

use crate::config::SdeConfig;

/// Default spread parameter for entrance-law starts.
pub const DEFAULT_ENTRANCE_M: f64 = 10.0;

fn idx(k: usize, i: usize) -> usize {
    k * (k - 1) / 2 + i - 1
}

fn check_pattern_drift(state: &TriangularArray, nu: &DriftVector) -> Result<usize> {
    let n = state.n();
    if nu.len() != n {
        return Err(LabError::invalid(format!(
            "drift has {} components but the pattern has {n} rows",
            nu.len()
        )));
    }
    Ok(n)
}

/// Local drift of every pattern entry at the given state.
///
/// Entry (1,1) carries ν₁ and the diagonal (k,k) carries ν_k − e^{…}; all
/// other entries hold only their exponential corrections, which vanish when
/// the rows are widely separated. These are the per-entry increments of the
/// cascade beyond what each entry inherits from the row above, so the actual
/// drift of Z_{k,i} as a coordinate process is the column sum of the local
/// drifts above and including (k,i).
pub fn drift_coefficients(state: &TriangularArray, nu: &DriftVector) -> Result<TriangularArray> {
    let n = check_pattern_drift(state, nu)?;
    let mut out = TriangularArray::zeros(n)?;
    out.set(1, 1, nu.0[0])?;
    for k in 2..=n {
        let zk = state.row(k);
        let zk1 = state.row(k - 1);
        // a_i = e^{Z_{k,i+1} − Z_{k−1,i}}; a_{k−1} is also the diagonal bond.
        let a: Vec<f64> = (1..k).map(|i| (zk[i] - zk1[i - 1]).exp()).collect();
        if a.iter().any(|v| !v.is_finite()) {
            return Err(LabError::Numerical(format!(
                "drift exponential overflowed in row {k}"
            )));
        }
        out.set(k, 1, a[0])?;
        for i in 2..k {
            out.set(k, i, a[i - 1] - a[i - 2])?;
        }
        out.set(k, k, nu.0[k - 1] - a[k - 2])?;
    }
    Ok(out)
}

/// One Euler step of the cascade. `dw` holds the increments of the driving
/// coordinates (drift included), `inc` is triangular scratch.
fn step_cascade(
    state: &mut TriangularArray,
    dw: &[f64],
    dt: f64,
    guard: f64,
    time: f64,
    inc: &mut [f64],
) -> Result<()> {
    let n = state.n();
    inc[idx(1, 1)] = dw[0];
    for k in 2..=n {
        let zk = state.row(k);
        let zk1 = state.row(k - 1);
        let mut prev_a = 0.0;
        for i in 1..k {
            let e = zk[i] - zk1[i - 1];
            if e.abs() > guard {
                return Err(LabError::Explosion { time, guard });
            }
            let a = e.exp();
            if i == 1 {
                inc[idx(k, 1)] = inc[idx(k - 1, 1)] + a * dt;
            } else {
                inc[idx(k, i)] = inc[idx(k - 1, i)] + (a - prev_a) * dt;
            }
            prev_a = a;
        }
        inc[idx(k, k)] = dw[k - 1] - prev_a * dt;
    }
    let flat = state.flat_mut();
    for (v, d) in flat.iter_mut().zip(inc.iter()) {
        *v += d;
        if !v.is_finite() {
            return Err(LabError::Numerical(format!(
                "pattern entry left the finite range at t = {time:.6}"
            )));
        }
    }
    Ok(())
}

/// Runs the cascade under an explicitly supplied driving path.
///
/// `w` must contain the driving coordinates (any drift is part of the path)
/// on the grid the scheme will walk; the returned trajectory shares that
/// grid. Supplying the same `w` to the offset path transform yields the same
/// trajectory up to O(dt) strong error, which is how the scheme is verified.
pub fn simulate_triangular_z_driven(
    init: &TriangularArray,
    w: &VectorPath,
    guard: f64,
) -> Result<PatternTrajectory> {
    let n = init.n();
    if w.dims() != n {
        return Err(LabError::invalid(format!(
            "driving path has {} coordinates but the pattern has {n} rows",
            w.dims()
        )));
    }
    if w.defined_from_slice().iter().any(|&d| d > 0) {
        return Err(LabError::invalid(
            "driving path must be defined from t0 in every coordinate",
        ));
    }
    if !(guard > 0.0) || !guard.is_finite() {
        return Err(LabError::invalid(format!(
            "explosion guard must be positive, got {guard}"
        )));
    }
    let grid = w.grid().clone();
    let dt = grid.dt();
    let steps = grid.steps();
    let mut state = init.clone();
    let mut inc = vec![0.0; n * (n + 1) / 2];
    let mut dw = vec![0.0; n];
    let mut states = Vec::with_capacity(steps);
    for m in 1..=steps {
        let prev = w.row(m - 1);
        let cur = w.row(m);
        for i in 0..n {
            dw[i] = cur[i] - prev[i];
        }
        step_cascade(&mut state, &dw, dt, guard, grid.t(m - 1), &mut inc)?;
        states.push(state.clone());
    }
    PatternTrajectory::new(grid, states)
}

/// Simulates the cascade from `init` under a fresh Brownian driver with
/// drift ν.
pub fn simulate_triangular_z(
    nu: &DriftVector,
    init: &TriangularArray,
    cfg: &SdeConfig,
    rng: &mut RngStream,
) -> Result<PatternTrajectory> {
    let n = check_pattern_drift(init, nu)?;
    let w = sample_brownian_path(n, nu, &cfg.grid(), rng)?;
    simulate_triangular_z_driven(init, &w, cfg.guard())
}

/// Samples a starting pattern from the Gibbs law with bottom row −Mρ, where
/// ρ_i = (N+1)/2 − i is the descending half-root vector.
///
/// The bottom row is therefore the ascending ramp M·(i − (N+1)/2). As M
/// grows the pattern differences Z_{k,i} − Z_{k+1,i+1} concentrate around
/// −M/2 and the top entry concentrates at the bottom-row mean 0, which is
/// the entrance regime of the cascade.
pub fn entrance_start(
    m_spread: f64,
    nu: &DriftVector,
    rng: &mut RngStream,
) -> Result<TriangularArray> {
    if !(m_spread > 0.0) || !m_spread.is_finite() {
        return Err(LabError::invalid(format!(
            "entrance spread must be positive, got {m_spread}"
        )));
    }
    let n = nu.len();
    if n == 0 {
        return Err(LabError::invalid("drift vector must not be empty"));
    }
    let x0: Vec<f64> = (1..=n)
        .map(|i| m_spread * (i as f64 - 0.5 * (n as f64 + 1.0)))
        .collect();
    let law = GibbsPatternLaw::new(x0, nu.clone())?;
    let sample = sample_sigma(&law, 1, rng)?;
    Ok(sample
        .patterns
        .into_iter()
        .next()
        .expect("sample_sigma returns the requested count"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use todalab_core::grsk::transform_t_offset;
    use todalab_core::TimeGrid;

    fn wide_init3() -> TriangularArray {
        TriangularArray::from_rows(&[vec![0.0], vec![30.0, -30.0], vec![60.0, 0.0, -60.0]])
            .unwrap()
    }

    #[test]
    fn drift_examples() {
        let nu = DriftVector(vec![0.7, -0.3, 0.2]);
        let b = drift_coefficients(&wide_init3(), &nu).unwrap();
        assert_eq!(b.get(1, 1).unwrap(), 0.7);
        // interior and first-column entries vanish when rows are far apart
        assert!(b.get(2, 1).unwrap().abs() < 1e-12);
        assert!(b.get(3, 1).unwrap().abs() < 1e-12);
        assert!(b.get(3, 2).unwrap().abs() < 1e-12);
        assert_abs_diff_eq!(b.get(2, 2).unwrap(), -0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(b.get(3, 3).unwrap(), 0.2, epsilon = 1e-12);

        // coincident diagonal entries give e^0 = 1
        let touching =
            TriangularArray::from_rows(&[vec![0.0], vec![5.0, 0.0]]).unwrap();
        let nu2 = DriftVector(vec![0.4, 1.1]);
        let b2 = drift_coefficients(&touching, &nu2).unwrap();
        assert_abs_diff_eq!(b2.get(2, 2).unwrap(), 1.1 - 1.0, epsilon = 1e-15);
        // first-column bond reads the second entry of the row
        assert_abs_diff_eq!(b2.get(2, 1).unwrap(), 1.0, epsilon = 1e-15);

        let short = DriftVector(vec![0.0]);
        assert!(drift_coefficients(&wide_init3(), &short).is_err());
    }

    #[test]
    fn zero_noise_widely_separated_state_is_frozen() {
        let init = wide_init3();
        let grid = TimeGrid::new(1.0, 100).unwrap();
        let w = VectorPath::zeros(grid, 3);
        let traj = simulate_triangular_z_driven(&init, &w, 50.0).unwrap();
        let mut sup = 0.0f64;
        for s in traj.states() {
            for (a, b) in s.flat().iter().zip(init.flat()) {
                sup = sup.max((a - b).abs());
            }
        }
        assert!(sup < 1e-8, "state moved by {sup}");
    }

    #[test]
    fn euler_matches_quadrature_cascade_at_rate_one() {
        let nu = DriftVector(vec![0.2, -0.1, 0.05]);
        let init = TriangularArray::from_rows(&[
            vec![0.2],
            vec![1.0, -0.8],
            vec![2.0, 0.1, -1.9],
        ])
        .unwrap();
        let fine_grid = TimeGrid::new(1.0, 10_000).unwrap();
        let mut rng = RngStream::new(404, 0);
        let w_fine = sample_brownian_path(3, &nu, &fine_grid, &mut rng).unwrap();
        let reference = transform_t_offset(&w_fine, &init).unwrap();

        let subsample = |factor: usize| -> VectorPath {
            let grid = fine_grid.coarsened(factor).unwrap();
            let rows: Vec<Vec<f64>> = (0..=grid.steps())
                .map(|m| w_fine.row(m * factor).to_vec())
                .collect();
            VectorPath::new(grid, rows).unwrap()
        };

        let mut errors = Vec::new();
        for factor in [100usize, 10, 1] {
            let w = subsample(factor);
            let traj = simulate_triangular_z_driven(&init, &w, 50.0).unwrap();
            // sup over the 100 common coarse marks of the largest entry gap
            let mut sup = 0.0f64;
            for c in 1..=100usize {
                let euler = traj.state(c * 100 / factor).unwrap();
                let quad = reference.state(c * 100).unwrap();
                for (a, b) in euler.flat().iter().zip(quad.flat()) {
                    sup = sup.max((a - b).abs());
                }
            }
            errors.push(sup);
        }
        assert!(
            errors[0] > errors[1] && errors[1] > errors[2],
            "errors not decreasing: {errors:?}"
        );
        assert!(
            errors[0] / errors[1] > 3.0,
            "refinement gain too small: {errors:?}"
        );
        assert!(errors[2] < 5e-3, "finest-step error too large: {errors:?}");
    }

    #[test]
    fn bottom_row_sum_tracks_the_driver_exactly() {
        let nu = DriftVector(vec![0.3, -0.2, 0.1, 0.0]);
        let init = TriangularArray::from_rows(&[
            vec![0.1],
            vec![0.8, -0.7],
            vec![1.5, 0.05, -1.4],
            vec![2.2, 0.9, -0.8, -2.1],
        ])
        .unwrap();
        let grid = TimeGrid::new(1.0, 1000).unwrap();
        let mut rng = RngStream::new(77, 3);
        let w = sample_brownian_path(4, &nu, &grid, &mut rng).unwrap();
        let traj = simulate_triangular_z_driven(&init, &w, 50.0).unwrap();
        let init_sum: f64 = init.bottom_row().iter().sum();
        for m in [1usize, 500, 1000] {
            let z_sum: f64 = traj.state(m).unwrap().bottom_row().iter().sum();
            let w_sum: f64 = w.row(m).iter().sum();
            assert_abs_diff_eq!(z_sum - init_sum, w_sum, epsilon = 1e-10);
        }
    }

    #[test]
    fn uniform_drift_shift_moves_every_entry_linearly() {
        let base = DriftVector(vec![0.1, -0.4]);
        let shifted = DriftVector(vec![0.5, 0.0]);
        let init = TriangularArray::from_rows(&[vec![0.3], vec![1.0, -0.6]]).unwrap();
        let cfg = SdeConfig::new(1e-3, 1.0).unwrap();
        let mut rng_a = RngStream::new(909, 0);
        let mut rng_b = RngStream::new(909, 0);
        let ta = simulate_triangular_z(&base, &init, &cfg, &mut rng_a).unwrap();
        let tb = simulate_triangular_z(&shifted, &init, &cfg, &mut rng_b).unwrap();
        for m in [250usize, 1000] {
            let t = ta.grid().t(m);
            let sa = ta.state(m).unwrap();
            let sb = tb.state(m).unwrap();
            for (a, b) in sa.flat().iter().zip(sb.flat()) {
                assert_abs_diff_eq!(b - a, 0.4 * t, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn guard_trips_on_large_exponents() {
        let init = TriangularArray::from_rows(&[vec![0.0], vec![1.0, 61.0]]).unwrap();
        let cfg = SdeConfig::new(1e-3, 1.0).unwrap();
        let mut rng = RngStream::new(1, 0);
        let err = simulate_triangular_z(&DriftVector(vec![0.0, 0.0]), &init, &cfg, &mut rng)
            .unwrap_err();
        match err {
            LabError::Explosion { time, guard } => {
                assert_eq!(guard, 50.0);
                assert!((0.0..1.0).contains(&time));
            }
            other => panic!("expected explosion, got {other}"),
        }
    }

    #[test]
    fn entrance_start_spreads_the_pattern() {
        let nu = DriftVector(vec![0.2, -0.2]);
        // bottom row is the fixed ramp; the free entry concentrates at its
        // midpoint with scale e^{-M/4}
        let mut rng = RngStream::new(31, 0);
        let one = entrance_start(8.0, &nu, &mut rng).unwrap();
        assert_eq!(one.bottom_row(), &[-4.0, 4.0]);

        let median = |m: f64, stream: u64| -> (f64, f64) {
            let mut rng = RngStream::new(31, stream);
            let mut xi = Vec::new();
            let mut top = Vec::new();
            for _ in 0..201 {
                let z = entrance_start(m, &nu, &mut rng).unwrap();
                xi.push(z.get(1, 1).unwrap() - z.get(2, 2).unwrap());
                top.push(z.get(1, 1).unwrap().abs());
            }
            xi.sort_by(f64::total_cmp);
            top.sort_by(f64::total_cmp);
            (xi[100], top[100])
        };
        let (xi8, top8) = median(8.0, 1);
        let (xi12, top12) = median(12.0, 2);
        assert!(xi8 < -2.0, "median difference {xi8} at M = 8");
        assert!(xi12 < -3.0, "median difference {xi12} at M = 12");
        let (_, top4) = median(4.0, 3);
        assert!(
            top4 > top8 && top8 > top12,
            "top-entry medians not decreasing: {top4} {top8} {top12}"
        );

        assert!(entrance_start(0.0, &nu, &mut rng).is_err());
        assert!(entrance_start(f64::NAN, &nu, &mut rng).is_err());
    }

    #[test]
    fn entrance_start_three_rows() {
        let nu = DriftVector(vec![0.1, 0.0, -0.1]);
        let mut rng = RngStream::new(57, 0);
        let mut diffs = Vec::new();
        for _ in 0..31 {
            let z = entrance_start(9.0, &nu, &mut rng).unwrap();
            assert_eq!(z.bottom_row(), &[-9.0, 0.0, 9.0]);
            diffs.push(z.get(1, 1).unwrap() - z.get(2, 2).unwrap());
            diffs.push(z.get(2, 1).unwrap() - z.get(3, 2).unwrap());
            diffs.push(z.get(2, 2).unwrap() - z.get(3, 3).unwrap());
        }
        diffs.sort_by(f64::total_cmp);
        let median = diffs[diffs.len() / 2];
        assert!(median < -9.0 / 4.0, "median pattern difference {median}");
    }
}
