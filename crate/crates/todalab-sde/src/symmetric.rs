//! The symmetric triangular system with one independent noise per entry.
//!
//! Unlike the cascade, every entry S_{k,i} here carries its own Brownian
//! motion W_{k,i}, the row-k drift parameter ν_k, and exponential
//! interactions with the row above:
//!
//! ```text
//! dS_{1,1} = dW_{1,1} + ν₁ dt
//! dS_{k,1} = dW_{k,1} + (ν_k + e^{S_{k−1,1}−S_{k,1}}) dt
//! dS_{k,i} = dW_{k,i} + (ν_k + e^{S_{k−1,i}−S_{k,i}} − e^{S_{k,i}−S_{k−1,i−1}}) dt
//! dS_{k,k} = dW_{k,k} + (ν_k − e^{S_{k,k}−S_{k−1,k−1}}) dt.
//! ```
//!
//! Started from the Gibbs pattern law with bottom row x₀, the bottom row of
//! S is a diffusion with the same law as the bottom row of the cascade
//! started the same way, even though the noises are wired completely
//! differently; the two simulators cross-check each other distributionally.
//! For N = 1 the system is plain Brownian motion with drift ν₁.

use todalab_core::{
    DriftVector, LabError, PatternTrajectory, Result, RngStream, TriangularArray,
};

use crate::config::SdeConfig;

fn s_path(
    nu: &DriftVector,
    init: &TriangularArray,
    cfg: &SdeConfig,
    mut noise: impl FnMut() -> f64,
) -> Result<PatternTrajectory> {
    let n = init.n();
    if nu.len() != n {
        return Err(LabError::invalid(format!(
            "drift has {} components but the pattern has {n} rows",
            nu.len()
        )));
    }
    let grid = cfg.grid();
    let dt = cfg.dt();
    let sd = dt.sqrt();
    let guard = cfg.guard();
    let mut state = init.clone();
    let mut inc = vec![0.0; n * (n + 1) / 2];
    let mut states = Vec::with_capacity(cfg.steps());
    for m in 1..=cfg.steps() {
        let time = grid.t(m - 1);
        let ex = |e: f64| -> Result<f64> {
            if e.abs() > guard {
                return Err(LabError::Explosion { time, guard });
            }
            Ok(e.exp())
        };
        let mut pos = 0;
        inc[pos] = sd * noise() + nu.0[0] * dt;
        pos += 1;
        for k in 2..=n {
            let sk = state.row(k);
            let sk1 = state.row(k - 1);
            for i in 1..=k {
                let mut drift = nu.0[k - 1];
                if i < k {
                    // bond down from the row above
                    drift += ex(sk1[i - 1] - sk[i - 1])?;
                }
                if i > 1 {
                    // bond up into the row above
                    drift -= ex(sk[i - 1] - sk1[i - 2])?;
                }
                inc[pos] = sd * noise() + drift * dt;
                pos += 1;
            }
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
        states.push(state.clone());
    }
    PatternTrajectory::new(grid, states)
}

/// Simulates the symmetric system from `init`. Noise is drawn row-major
/// (one standard normal per entry per step), so runs are reproducible for a
/// fixed stream.
pub fn simulate_symmetric_s(
    nu: &DriftVector,
    init: &TriangularArray,
    cfg: &SdeConfig,
    rng: &mut RngStream,
) -> Result<PatternTrajectory> {
    s_path(nu, init, cfg, || rng.standard_normal())
}
