//! Direct computation of the directed-polymer partition function, its
//! zero-temperature ground state, and the free-energy density.
//!
//! The partition function of the semi-discrete polymer in an environment
//! B = (B₁,…,B_N) at inverse temperature β is
//!
//! ```text
//! Z^N_t(β) = ∫_{0<s₁<…<s_{N−1}<t} exp(β E(s)) ds,
//! E(s) = B₁(s₁) + (B₂(s₂)−B₂(s₁)) + … + (B_N(t)−B_N(s_{N−1})),
//! ```
//!
//! computed here by the log-domain dynamic programme
//! log Z^k(t) = β B_k(t) + log ∫₀^t exp(log Z^{k−1}(s) − β B_k(s)) ds with
//! log Z¹ = β B₁. The running integrals reuse the exact panel machinery of
//! the path-transform engine, so the identity log Z^N_t = (𝒯W)₁(t) with
//! W = (B_N,…,B₁) is a quadrature-level regression rather than a
//! statistical one (bit-exact for N = 2 at β = 1).

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::grid::TimeGrid;
use crate::grsk::engine::FinePath;
use crate::logsum::{PanelRule, QuadratureConfig};
use crate::path::{sample_brownian_path, DriftVector, VectorPath};
use crate::rng::RngStream;
use crate::special::{digamma, trigamma};

/// Log-partition functions log Z^k(t_m) for every level k ≤ N with the
/// default quadrature configuration.
///
/// The returned path has one coordinate per level; coordinate k−1 holds
/// log Z^k and is reported as defined from grid index k−1 (below that the
/// discrete simplex has no volume). Any finite β is accepted: β < 0 is a
/// legal inverse temperature and β = 0 degenerates to the log-volume of the
/// simplex, log(t^{N−1}/(N−1)!).
pub fn log_partition(env: &VectorPath, beta: f64) -> Result<VectorPath> {
    log_partition_with(env, beta, QuadratureConfig::default())
}

/// Same as [`log_partition`] with an explicit quadrature configuration.
pub fn log_partition_with(
    env: &VectorPath,
    beta: f64,
    cfg: QuadratureConfig,
) -> Result<VectorPath> {
    if !beta.is_finite() {
        return Err(LabError::invalid("beta must be finite"));
    }
    let fine = FinePath::from_path(env, cfg.refine)?;
    let n = fine.dims();
    let steps = env.grid().steps();
    let coarse = |col: &[f64]| -> Vec<f64> { (0..=steps).map(|m| col[m * cfg.refine]).collect() };

    let mut level: Vec<f64> = fine.cols[0].iter().map(|v| beta * v).collect();
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(n);
    columns.push(coarse(&level));
    // The level-k integrand behaves like s^{k−2} at the origin: level 2
    // integrates a bounded integrand, each further level gains one power.
    let mut slope = 0.0;
    let mut defined0 = true;
    for k in 1..n {
        let b = &fine.cols[k];
        let integral = fine.grid.running_log_integral(
            |m| level[m] - beta * b[m],
            slope,
            defined0,
            cfg.rule,
            f64::NEG_INFINITY,
        )?;
        for (m, acc) in integral.iter().enumerate() {
            level[m] = beta * b[m] + acc;
        }
        slope += 1.0;
        defined0 = false;
        columns.push(coarse(&level));
    }

    let values: Vec<Vec<f64>> = (0..=steps)
        .map(|m| {
            (0..n)
                .map(|k| if m < k { 0.0 } else { columns[k][m] })
                .collect()
        })
        .collect();
    let defined_from = (0..n).collect();
    VectorPath::with_defined_from(env.grid().clone(), values, defined_from)
}

/// Ground-state energy M^N(t_m): the max-plus analogue of the partition
/// function,
///
/// ```text
/// M^N_t = sup_{0≤s₁≤…≤s_{N−1}≤t} [B₁(s₁) + (B₂(s₂)−B₂(s₁)) + … + (B_N(t)−B_N(s_{N−1}))],
/// ```
///
/// restricted to grid jump points (ties allowed). Returns a one-coordinate
/// path; it equals lim_{β→∞} β^{−1} log Z^N_t(β) for the same grid.
pub fn ground_state(env: &VectorPath) -> Result<VectorPath> {
    if env.defined_from_slice().iter().any(|&d| d > 0) {
        return Err(LabError::invalid(
            "environment must be defined from t0 in every coordinate",
        ));
    }
    let n = env.dims();
    let steps = env.grid().steps();
    let mut level: Vec<f64> = (0..=steps)
        .map(|m| env.row(m)[0] - env.row(0)[0])
        .collect();
    for k in 1..n {
        let mut best = f64::NEG_INFINITY;
        let next: Vec<f64> = (0..=steps)
            .map(|m| {
                let b = env.row(m)[k];
                best = best.max(level[m] - b);
                b + best
            })
            .collect();
        level = next;
    }
    let values = level.into_iter().map(|v| vec![v]).collect();
    VectorPath::new(env.grid().clone(), values)
}

/// The limiting free-energy density inf_{t>0} [β²t − Ψ(t)] − log β² together
/// with the minimizer, where Ψ is the digamma function. The stationarity
/// condition is Ψ'(t*) = β² and Ψ' (trigamma) decreases strictly from +∞ to
/// 0 on (0,∞), so the root is found by bisection.
pub fn variational_free_energy(beta: f64) -> Result<(f64, f64)> {
    if !beta.is_finite() || beta <= 0.0 {
        return Err(LabError::invalid("beta must be a positive real"));
    }
    let target = beta * beta;
    let mut lo = 1.0f64;
    while trigamma(lo)? < target {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(LabError::Numerical("trigamma bracket underflow".into()));
        }
    }
    let mut hi = lo;
    while trigamma(hi)? > target {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(LabError::Numerical("trigamma bracket overflow".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if trigamma(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t_star = 0.5 * (lo + hi);
    let value = target * t_star - digamma(t_star)? - target.ln();
    Ok((t_star, value))
}

/// Comparison of the simulated free-energy density (1/n)·log Z^n_n against
/// the variational formula.
#[derive(Debug, Clone, Serialize)]
pub struct FreeEnergyReport {
    pub n: usize,
    pub beta: f64,
    pub reps: usize,
    /// Monte Carlo average of (1/n)·log Z^n at t = n.
    pub estimate: f64,
    /// inf_{t>0} [β²t − Ψ(t)] − log β².
    pub variational: f64,
    /// Minimizer t* of the variational problem.
    pub t_star: f64,
    /// (estimate − variational) / |variational|.
    pub relative_gap: f64,
}

/// Estimates the free-energy density (1/n)·log Z^n_n by simulating `reps`
/// independent environments on `grid` (whose horizon must equal n) and
/// compares with [`variational_free_energy`]. Replica r uses RNG stream r of
/// `seed`, so the result does not depend on scheduling.
pub fn free_energy_check(
    n: usize,
    beta: f64,
    grid: &TimeGrid,
    seed: u64,
    reps: usize,
) -> Result<FreeEnergyReport> {
    if n < 2 {
        return Err(LabError::invalid("free energy check needs n >= 2 levels"));
    }
    if reps == 0 {
        return Err(LabError::invalid("reps must be positive"));
    }
    if (grid.horizon() - n as f64).abs() > 1e-9 * n as f64 {
        return Err(LabError::invalid(format!(
            "grid horizon {} must equal n = {n} so the estimate is (1/n)·log Z at t = n",
            grid.horizon()
        )));
    }
    let (t_star, variational) = variational_free_energy(beta)?;
    // First-order panels are plenty here: the target tolerance is percent
    // scale while the quadrature bias is O(dt).
    let cfg = QuadratureConfig { rule: PanelRule::Trapezoid, refine: 1 };
    let drift = DriftVector::zero(n);
    let mut acc = 0.0;
    for r in 0..reps {
        let mut rng = RngStream::new(seed, r as u64);
        let env = sample_brownian_path(n, &drift, grid, &mut rng)?;
        let lp = log_partition_with(&env, beta, cfg)?;
        acc += lp.value(grid.steps(), n - 1)? / n as f64;
    }
    let estimate = acc / reps as f64;
    Ok(FreeEnergyReport {
        n,
        beta,
        reps,
        estimate,
        variational,
        t_star,
        relative_gap: (estimate - variational) / variational.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grsk::{transform_t, transform_t_beta};
    use approx::assert_abs_diff_eq;

    fn brownian(dims: usize, grid: &TimeGrid, seed: u64) -> VectorPath {
        let mut rng = RngStream::new(seed, 0);
        sample_brownian_path(dims, &DriftVector::zero(dims), grid, &mut rng).unwrap()
    }

    fn reversed(env: &VectorPath) -> VectorPath {
        let rows: Vec<Vec<f64>> = (0..=env.grid().steps())
            .map(|m| env.row(m).iter().rev().copied().collect())
            .collect();
        VectorPath::new(env.grid().clone(), rows).unwrap()
    }

    #[test]
    fn one_level_is_scaled_environment() {
        let grid = TimeGrid::new(1.0, 64).unwrap();
        let env = brownian(1, &grid, 5);
        let lp = log_partition(&env, 1.7).unwrap();
        for m in 0..=grid.steps() {
            assert_eq!(lp.value(m, 0).unwrap(), 1.7 * env.value(m, 0).unwrap());
        }
    }

    #[test]
    fn zero_environment_gives_simplex_volume() {
        let grid = TimeGrid::new(1.0, 100).unwrap();
        let env = VectorPath::zeros(grid.clone(), 3);
        let lp = log_partition(&env, 0.8).unwrap();
        // Z^3_t = t²/2, and the log-clock panels integrate pure powers
        // exactly, so only accumulation rounding remains.
        for m in 2..=grid.steps() {
            let t = grid.t(m);
            assert_abs_diff_eq!(
                lp.value(m, 2).unwrap(),
                (t * t / 2.0).ln(),
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(lp.value(m, 1).unwrap(), t.ln(), epsilon = 1e-12);
            assert_eq!(lp.value(m, 0).unwrap(), 0.0);
        }
        assert_abs_diff_eq!(
            lp.value(grid.steps(), 2).unwrap(),
            0.5f64.ln(),
            epsilon = 1e-13
        );
    }

    #[test]
    fn beta_zero_ignores_the_environment() {
        let grid = TimeGrid::new(1.0, 80).unwrap();
        let env = brownian(3, &grid, 9);
        let lp = log_partition(&env, 0.0).unwrap();
        assert_abs_diff_eq!(
            lp.value(grid.steps(), 2).unwrap(),
            0.5f64.ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn negative_beta_matches_negated_environment() {
        let grid = TimeGrid::new(1.0, 50).unwrap();
        let env = brownian(2, &grid, 12);
        let negated = VectorPath::new(
            grid.clone(),
            (0..=grid.steps())
                .map(|m| env.row(m).iter().map(|v| -v).collect())
                .collect(),
        )
        .unwrap();
        let a = log_partition(&env, -1.3).unwrap();
        let b = log_partition(&negated, 1.3).unwrap();
        for m in 1..=grid.steps() {
            assert_abs_diff_eq!(
                a.value(m, 1).unwrap(),
                b.value(m, 1).unwrap(),
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn levels_below_their_index_are_undefined() {
        let grid = TimeGrid::new(1.0, 10).unwrap();
        let env = brownian(3, &grid, 3);
        let lp = log_partition(&env, 1.0).unwrap();
        assert_eq!(lp.defined_from_slice(), &[0, 1, 2]);
        assert!(lp.value(1, 2).is_err());
        assert!(lp.value(2, 2).is_ok());
    }

    #[test]
    fn two_levels_match_transform_bitwise() {
        let grid = TimeGrid::new(1.0, 400).unwrap();
        let env = brownian(2, &grid, 21);
        let lp = log_partition(&env, 1.0).unwrap();
        let tw = transform_t(&reversed(&env)).unwrap();
        for m in 1..=grid.steps() {
            assert_eq!(lp.value(m, 1).unwrap(), tw.value(m, 0).unwrap());
        }
    }

    #[test]
    fn three_levels_match_transform_on_shared_grid() {
        // Default quadrature already gives 1e-6 on t >= 0.1; the first few
        // grid points carry the largest panel mismatch and need deeper
        // refinement before the identity holds at every defined index.
        let grid = TimeGrid::new(1.0, 1000).unwrap();
        for seed in [1u64, 2, 3] {
            let env = brownian(3, &grid, seed);
            let lp = log_partition(&env, 1.0).unwrap();
            let tw = transform_t(&reversed(&env)).unwrap();
            for m in 100..=grid.steps() {
                assert_abs_diff_eq!(
                    lp.value(m, 2).unwrap(),
                    tw.value(m, 0).unwrap(),
                    epsilon = 1e-6
                );
            }
        }
        let cfg = QuadratureConfig { rule: PanelRule::LogClock, refine: 128 };
        let env = brownian(3, &grid, 1);
        let lp = log_partition_with(&env, 1.0, cfg).unwrap();
        let tw = crate::grsk::transform_t_with(&reversed(&env), &cfg).unwrap();
        for m in 2..=grid.steps() {
            assert_abs_diff_eq!(
                lp.value(m, 2).unwrap(),
                tw.value(m, 0).unwrap(),
                epsilon = 1e-6
            );
        }
    }

    #[test]
    fn beta_identity_matches_scaled_transform() {
        let grid = TimeGrid::new(1.0, 500).unwrap();
        let beta = 2.0;
        let env = brownian(2, &grid, 33);
        let lp = log_partition(&env, beta).unwrap();
        let tw = transform_t_beta(&reversed(&env), beta).unwrap();
        let shift = 1.0 / beta * (beta * beta).ln();
        for m in 1..=grid.steps() {
            assert_abs_diff_eq!(
                lp.value(m, 1).unwrap() / beta,
                tw.value(m, 0).unwrap() - shift,
                epsilon = 1e-12
            );
        }

        let grid3 = TimeGrid::new(1.0, 1000).unwrap();
        let cfg = QuadratureConfig { rule: PanelRule::LogClock, refine: 128 };
        let env3 = brownian(3, &grid3, 34);
        let lp3 = log_partition_with(&env3, beta, cfg).unwrap();
        let tw3 = crate::grsk::transform_t_beta_with(&reversed(&env3), beta, &cfg).unwrap();
        let shift3 = 2.0 / beta * (beta * beta).ln();
        for m in 2..=grid3.steps() {
            assert_abs_diff_eq!(
                lp3.value(m, 2).unwrap() / beta,
                tw3.value(m, 0).unwrap() - shift3,
                epsilon = 1e-6
            );
        }
    }

    #[test]
    fn accumulated_mass_is_monotone() {
        // log Z^k − βB_k is the log of an integral of a positive integrand
        // over a growing region, hence nondecreasing; log Z itself is
        // monotone whenever the top environment coordinate is.
        let grid = TimeGrid::new(1.0, 300).unwrap();
        let env = brownian(3, &grid, 44);
        let beta = 1.5;
        let lp = log_partition(&env, beta).unwrap();
        for k in 1..3 {
            for m in (k + 1)..=grid.steps() {
                let prev = lp.value(m - 1, k).unwrap() - beta * env.value(m - 1, k).unwrap();
                let cur = lp.value(m, k).unwrap() - beta * env.value(m, k).unwrap();
                assert!(cur >= prev - 1e-12, "level {k} mass decreased at m = {m}");
            }
        }

        let rates = [0.7, 0.0, 1.2];
        let linear = VectorPath::from_fn(grid.clone(), 3, |t| {
            rates.iter().map(|r| r * t).collect()
        })
        .unwrap();
        let lpl = log_partition(&linear, 1.0).unwrap();
        for m in 3..=grid.steps() {
            assert!(lpl.value(m, 2).unwrap() >= lpl.value(m - 1, 2).unwrap() - 1e-12);
        }
    }

    #[test]
    fn ground_state_zero_environment_is_zero() {
        let grid = TimeGrid::new(1.0, 40).unwrap();
        let env = VectorPath::zeros(grid, 3);
        let gs = ground_state(&env).unwrap();
        for m in 0..=40 {
            assert_eq!(gs.value(m, 0).unwrap(), 0.0);
        }
    }

    #[test]
    fn ground_state_linear_ramp_picks_the_whole_ramp() {
        // B₁(s) = s, B₂ ≡ 0: the best strategy stays on level 1 until t, so
        // M(t) = t; in particular M(1) = 1.
        let grid = TimeGrid::new(1.0, 50).unwrap();
        let env = VectorPath::from_fn(grid.clone(), 2, |t| vec![t, 0.0]).unwrap();
        let gs = ground_state(&env).unwrap();
        for m in 0..=grid.steps() {
            assert_abs_diff_eq!(gs.value(m, 0).unwrap(), grid.t(m), epsilon = 1e-15);
        }
    }

    #[test]
    fn ground_state_matches_brute_force() {
        // The streaming recursion must agree with direct maximization over
        // all ordered jump placements (ties allowed). Floating-point
        // addition is reassociated between the two, leaving ulp-level slack.
        let grid = TimeGrid::new(1.0, 60).unwrap();
        for seed in [7u64, 8, 9] {
            let env = brownian(3, &grid, seed);
            let gs = ground_state(&env).unwrap();
            for m in [20usize, 45, 60] {
                let mut best = f64::NEG_INFINITY;
                for j1 in 0..=m {
                    for j2 in j1..=m {
                        let val = env.value(j1, 0).unwrap()
                            + env.value(j2, 1).unwrap()
                            - env.value(j1, 1).unwrap()
                            + env.value(m, 2).unwrap()
                            - env.value(j2, 2).unwrap();
                        best = best.max(val);
                    }
                }
                assert_abs_diff_eq!(gs.value(m, 0).unwrap(), best, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn ground_state_is_the_zero_temperature_limit() {
        // At t = 1 with N = 2 and plain trapezoid panels, the quadrature
        // weights form a fixed probability measure on the grid, so
        // β^{−1} log Z is a power mean: nondecreasing in β, at most M, and
        // within β^{−1} log(2/dt) of M. With dt = 1/8 and β = 64 the bound
        // is 0.043 < 0.05.
        let grid = TimeGrid::new(1.0, 8).unwrap();
        let cfg = QuadratureConfig { rule: PanelRule::Trapezoid, refine: 1 };
        let env = brownian(2, &grid, 101);
        let m_star = ground_state(&env)
            .unwrap()
            .value(grid.steps(), 0)
            .unwrap();
        let mut prev = f64::NEG_INFINITY;
        let mut last = f64::NAN;
        for beta in [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0] {
            let lp = log_partition_with(&env, beta, cfg).unwrap();
            let g = lp.value(grid.steps(), 1).unwrap() / beta;
            assert!(g >= prev - 1e-12, "power mean decreased at beta = {beta}");
            assert!(g <= m_star + 1e-12, "power mean exceeded the max at beta = {beta}");
            prev = g;
            last = g;
        }
        assert!(m_star - last <= 0.05, "gap at beta = 64 was {}", m_star - last);
    }

    #[test]
    fn variational_value_matches_frozen_oracle() {
        // Reference roots of trigamma(t) = β² and the corresponding values
        // of β²t − Ψ(t) − log β², computed with 30-digit arithmetic.
        let cases = [
            (1.0, 1.426255120215079, 1.4610543264294545),
            (2.0, 0.56638598899901324, 2.5480425327651405),
            (0.5, 4.4793942116491181, 1.1224102773552436),
        ];
        for (beta, t_star, value) in cases {
            let (t, v) = variational_free_energy(beta).unwrap();
            assert_abs_diff_eq!(t, t_star, epsilon = 1e-10);
            assert_abs_diff_eq!(v, value, epsilon = 1e-10);
        }
        assert!(variational_free_energy(0.0).is_err());
    }

    #[test]
    fn free_energy_simulation_approaches_variational_value() {
        let n = 200;
        let grid = TimeGrid::new(n as f64, 20_000).unwrap();
        let report = free_energy_check(n, 1.0, &grid, 7, 2).unwrap();
        assert!(
            report.relative_gap.abs() < 0.10,
            "relative gap {} out of tolerance",
            report.relative_gap
        );
    }

    #[test]
    fn free_energy_check_validates_the_grid() {
        let grid = TimeGrid::new(3.0, 30).unwrap();
        assert!(free_energy_check(4, 1.0, &grid, 1, 1).is_err());
    }

    #[test]
    fn beta_scaling_law_has_consistent_means() {
        // Z^N_t(β) has the law of β^{−2(N−1)} Z^N_{β²t}(1); the sample means
        // of log Z on the two sides must agree within a joint confidence
        // interval.
        let beta: f64 = 2.0;
        let t = 0.5;
        let n = 2usize;
        let reps = 400;
        let grid_a = TimeGrid::new(t, 250).unwrap();
        let grid_b = TimeGrid::new(beta * beta * t, 1000).unwrap();
        let cfg = QuadratureConfig { rule: PanelRule::Trapezoid, refine: 1 };
        let drift = DriftVector::zero(n);
        let sample = |grid: &TimeGrid, b: f64, shift: f64, stream0: u64| -> (f64, f64) {
            let mut mean = 0.0;
            let mut m2 = 0.0;
            for r in 0..reps {
                let mut rng = RngStream::new(505, stream0 + r as u64);
                let env = sample_brownian_path(n, &drift, grid, &mut rng).unwrap();
                let lp = log_partition_with(&env, b, cfg).unwrap();
                let x = lp.value(grid.steps(), n - 1).unwrap() + shift;
                let k = (r + 1) as f64;
                let d = x - mean;
                mean += d / k;
                m2 += d * (x - mean);
            }
            (mean, m2 / (reps as f64 - 1.0) / reps as f64)
        };
        let (mean_a, var_a) = sample(&grid_a, beta, 0.0, 0);
        let shift = -2.0 * (n as f64 - 1.0) * beta.ln();
        let (mean_b, var_b) = sample(&grid_b, 1.0, shift, 10_000);
        let gap = (mean_a - mean_b).abs();
        let ci = 4.0 * (var_a + var_b).sqrt();
        assert!(gap < ci, "means {mean_a} vs {mean_b} differ beyond CI {ci}");
    }
}
