//! Sampling from the Gibbs pattern law and the hyperbolic-time densities
//! attached to it: the cosh-exponential (generalized inverse Gaussian in
//! disguise) coordinate-difference law, the Hartman-Watson time density, and
//! its Bessel Laplace transform.

use crate::array::TriangularArray;
use crate::error::{LabError, Result};
use crate::rng::RngStream;
use crate::special::{erfc, gauss_legendre, log_macdonald_k};

use super::contour::{kl_transform, THETA_MIN_TIME};
use super::psi::{bond_energy, critical_point};
use super::types::GibbsPatternLaw;

use std::f64::consts::PI;

/// Density of the coordinate-difference variable u under the two-coordinate
/// pattern law: exp(mu u - cosh(u)/z) / (2 K_mu(1/z)), the log of a
/// generalized inverse Gaussian variable.
pub fn gig_density(mu: f64, z: f64, u: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(LabError::invalid(format!("gig_density needs z > 0, got {z}")));
    }
    if !mu.is_finite() || !u.is_finite() {
        return Err(LabError::invalid("gig_density needs finite mu and u"));
    }
    let log_norm = std::f64::consts::LN_2 + log_macdonald_k(mu, 1.0 / z)?;
    Ok((mu * u - u.cosh() / z - log_norm).exp())
}

/// Hartman-Watson density theta_r(t), normalized so that
/// int_0^inf e^{-nu^2 t / 2} theta_r(t) dt = I_nu(r).
///
/// Only the regime t >= 0.3 is supported; the density is astronomically
/// small below that and the oscillatory quadrature loses all digits.
pub fn hartman_watson_theta(r: f64, t: f64) -> Result<f64> {
    if !(t >= THETA_MIN_TIME) {
        return Err(LabError::Numerical(format!(
            "hartman_watson_theta supports t >= {THETA_MIN_TIME}, got {t}"
        )));
    }
    Ok(kl_transform(r, t)? / (PI * PI))
}

/// Exact remaining mass int_T^inf t^{-3/2} e^{-a t} dt via the upper
/// incomplete gamma function expressed through erfc.
fn tail_three_halves(t0: f64, a: f64) -> f64 {
    if a == 0.0 {
        return 2.0 / t0.sqrt();
    }
    2.0 * (-a * t0).exp() / t0.sqrt() - 2.0 * (PI * a).sqrt() * erfc((a * t0).sqrt())
}

/// Exact remaining mass int_T^inf t^{-5/2} e^{-a t} dt.
fn tail_five_halves(t0: f64, a: f64) -> f64 {
    (2.0 / 3.0) * ((-a * t0).exp() / t0.powf(1.5) - a * tail_three_halves(t0, a))
}

/// Laplace transform int_0^inf e^{-nu^2 t / 2} theta_r(t) dt of the
/// Hartman-Watson density, which equals the modified Bessel function
/// I_|nu|(r).
///
/// The body t in [0.15, 40] is integrated by Gauss panels; below 0.15 the
/// density is extrapolated by its essential-singularity profile e^{-c/t},
/// and beyond 40 by a two-term algebraic t^{-3/2}, t^{-5/2} fit whose exact
/// exponential moments close the integral.
pub fn hartman_watson_laplace(r: f64, nu: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(LabError::invalid(format!("hartman_watson_laplace needs r > 0, got {r}")));
    }
    if !nu.is_finite() {
        return Err(LabError::invalid("hartman_watson_laplace needs finite nu"));
    }
    let a = 0.5 * nu * nu;
    let theta = |t: f64| -> Result<f64> { Ok(kl_transform(r, t)? / (PI * PI)) };

    // body: composite 20-node Gauss panels, finer where the density rises
    let (nodes, weights) = gauss_legendre(20);
    let mut body = 0.0;
    let sections: [(f64, f64, f64); 3] = [(0.15, 1.0, 0.05), (1.0, 5.0, 0.25), (5.0, 40.0, 1.0)];
    for &(lo, hi, width) in &sections {
        let panels = ((hi - lo) / width).round() as usize;
        let h = (hi - lo) / panels as f64;
        for p in 0..panels {
            let mid = lo + (p as f64 + 0.5) * h;
            for (x, w) in nodes.iter().zip(&weights) {
                let t = mid + 0.5 * h * x;
                body += 0.5 * h * w * (-a * t).exp() * theta(t)?;
            }
        }
    }

    // head: theta(t) ~ e^{alpha - c/t} just below the cutoff, so the missing
    // mass is about theta(0.15) * 0.15^2 / c by Watson's lemma
    let th_cut = theta(0.15)?;
    let th_mid = theta(0.2)?;
    let mut head = 0.0;
    if th_cut > 1e-300 && th_mid > th_cut {
        let c = (th_mid.ln() - th_cut.ln()) / (1.0 / 0.15 - 1.0 / 0.2);
        if c > 0.0 {
            head = th_cut * (0.15 * 0.15 / c) * (-a * 0.15).exp();
        }
    }

    // tail: fit theta(t) = c1 t^{-3/2} + c2 t^{-5/2} at t = 30, 40
    let th30 = theta(30.0)?;
    let th40 = theta(40.0)?;
    let (a11, a12) = (30.0_f64.powf(-1.5), 30.0_f64.powf(-2.5));
    let (a21, a22) = (40.0_f64.powf(-1.5), 40.0_f64.powf(-2.5));
    let det = a11 * a22 - a12 * a21;
    let c1 = (th30 * a22 - th40 * a12) / det;
    let c2 = (a11 * th40 - a21 * th30) / det;
    let tail = c1 * tail_three_halves(40.0, a) + c2 * tail_five_halves(40.0, a);

    Ok(head + body + tail)
}

/// Draws from the Gibbs pattern law, with diagnostics when a Markov chain
/// was involved.
#[derive(Debug, Clone)]
pub struct SigmaSample {
    /// Sampled patterns; the bottom row of each equals the conditioning row.
    pub patterns: Vec<TriangularArray>,
    /// Post-warmup Metropolis acceptance rate (chain-based sizes only).
    pub acceptance_rate: Option<f64>,
    /// Largest split-chain potential scale reduction factor across the free
    /// coordinates (chain-based sizes only).
    pub r_hat: Option<f64>,
}

/// Samples `count` patterns from the Gibbs law with fixed bottom row.
///
/// One row (N = 2) is drawn exactly by inverse-CDF on an adaptive grid;
/// two free rows (N = 3) use random-walk Metropolis with four chains, step
/// adaptation during warmup only, and thinning by 10.
pub fn sample_sigma(law: &GibbsPatternLaw, count: usize, rng: &mut RngStream) -> Result<SigmaSample> {
    if count == 0 {
        return Err(LabError::invalid("sample_sigma needs count >= 1"));
    }
    let n = law.n();
    let x = law.x();
    let nu = &law.nu().0;
    match n {
        1 => {
            let pattern = TriangularArray::from_rows(&[x.to_vec()])?;
            Ok(SigmaSample {
                patterns: vec![pattern; count],
                acceptance_rate: None,
                r_hat: None,
            })
        }
        2 => {
            let mu = nu[0] - nu[1];
            let r = 2.0 * ((x[1] - x[0]) / 2.0).exp();
            let mid = 0.5 * (x[0] + x[1]);
            let log_f = |u: f64| mu * u - r * u.cosh();
            let u_star = (mu / r).asinh();
            let peak = log_f(u_star);
            let mut lo = u_star - 1.0;
            while log_f(lo) > peak - 40.0 {
                lo -= 1.0;
            }
            let mut hi = u_star + 1.0;
            while log_f(hi) > peak - 40.0 {
                hi += 1.0;
            }
            let m = 2048;
            let h = (hi - lo) / (m - 1) as f64;
            let dens: Vec<f64> = (0..m).map(|i| (log_f(lo + i as f64 * h) - peak).exp()).collect();
            let mut cdf = vec![0.0; m];
            for i in 1..m {
                cdf[i] = cdf[i - 1] + 0.5 * h * (dens[i - 1] + dens[i]);
            }
            let total = cdf[m - 1];
            let mut patterns = Vec::with_capacity(count);
            for _ in 0..count {
                let target = rng.uniform() * total;
                let idx = cdf.partition_point(|&c| c < target).clamp(1, m - 1);
                let span = cdf[idx] - cdf[idx - 1];
                let frac = if span > 0.0 { (target - cdf[idx - 1]) / span } else { 0.5 };
                let u = lo + (idx - 1) as f64 * h + frac * h;
                patterns.push(TriangularArray::from_rows(&[vec![mid + u], x.to_vec()])?);
            }
            Ok(SigmaSample { patterns, acceptance_rate: None, r_hat: None })
        }
        3 => sample_sigma_rwm(x, nu, count, rng),
        _ => Err(LabError::UnsupportedSize(format!(
            "pattern sampling implemented for up to 3 coordinates, got {n}"
        ))),
    }
}

/// Log-density of the free entries (z11, z21, z22) under the three-coordinate
/// pattern law, up to an additive constant.
fn log_target3(free: &[f64], x: &[f64], nu: &[f64]) -> f64 {
    let s1 = free[0];
    let s2 = free[1] + free[2];
    nu[0] * s1 + nu[1] * (s2 - s1) - nu[2] * s2 - bond_energy(free, x)
}

fn sample_sigma_rwm(x: &[f64], nu: &[f64], count: usize, rng: &mut RngStream) -> Result<SigmaSample> {
    const CHAINS: usize = 4;
    const THIN: usize = 10;
    const WARMUP: usize = 3000;
    let kept_per_chain = count.div_ceil(CHAINS);

    let start_pattern = critical_point(x)?;
    let mut start = [0.0; 3];
    start[0] = start_pattern.get(1, 1)?;
    start[1] = start_pattern.get(2, 1)?;
    start[2] = start_pattern.get(2, 2)?;

    let mut kept: Vec<Vec<[f64; 3]>> = Vec::with_capacity(CHAINS);
    let mut accepted = 0usize;
    let mut proposed = 0usize;
    for _ in 0..CHAINS {
        let mut state = start;
        for entry in &mut state {
            *entry += 0.5 * rng.standard_normal();
        }
        let mut log_p = log_target3(&state, x, nu);
        let mut step = 0.4;
        let mut warm_accepts = 0usize;
        for it in 1..=WARMUP {
            let mut cand = state;
            for entry in &mut cand {
                *entry += step * rng.standard_normal();
            }
            let log_q = log_target3(&cand, x, nu);
            if (log_q - log_p) >= rng.uniform().ln() {
                state = cand;
                log_p = log_q;
                warm_accepts += 1;
            }
            if it % 100 == 0 {
                let rate = warm_accepts as f64 / 100.0;
                step = (step * (0.6 * (rate - 0.3)).exp()).clamp(1e-2, 5.0);
                warm_accepts = 0;
            }
        }
        let mut chain = Vec::with_capacity(kept_per_chain);
        while chain.len() < kept_per_chain {
            for _ in 0..THIN {
                let mut cand = state;
                for entry in &mut cand {
                    *entry += step * rng.standard_normal();
                }
                let log_q = log_target3(&cand, x, nu);
                proposed += 1;
                if (log_q - log_p) >= rng.uniform().ln() {
                    state = cand;
                    log_p = log_q;
                    accepted += 1;
                }
            }
            chain.push(state);
        }
        kept.push(chain);
    }

    let r_hat = split_r_hat(&kept);
    let mut patterns = Vec::with_capacity(count);
    'outer: for i in 0..kept_per_chain {
        for chain in &kept {
            if patterns.len() == count {
                break 'outer;
            }
            let s = chain[i];
            patterns.push(TriangularArray::from_rows(&[
                vec![s[0]],
                vec![s[1], s[2]],
                x.to_vec(),
            ])?);
        }
    }
    Ok(SigmaSample {
        patterns,
        acceptance_rate: Some(accepted as f64 / proposed as f64),
        r_hat,
    })
}

/// Split-chain potential scale reduction factor, maximized over coordinates.
fn split_r_hat(chains: &[Vec<[f64; 3]>]) -> Option<f64> {
    let len = chains.first()?.len();
    let half = len / 2;
    if half < 2 {
        return None;
    }
    let mut worst: f64 = 1.0;
    for coord in 0..3 {
        let mut means = Vec::with_capacity(chains.len() * 2);
        let mut vars = Vec::with_capacity(chains.len() * 2);
        for chain in chains {
            for part in [&chain[..half], &chain[len - half..]] {
                let m = part.iter().map(|s| s[coord]).sum::<f64>() / half as f64;
                let v = part.iter().map(|s| (s[coord] - m).powi(2)).sum::<f64>()
                    / (half - 1) as f64;
                means.push(m);
                vars.push(v);
            }
        }
        let m_count = means.len() as f64;
        let grand = means.iter().sum::<f64>() / m_count;
        let b = half as f64 * means.iter().map(|m| (m - grand).powi(2)).sum::<f64>()
            / (m_count - 1.0);
        let w = vars.iter().sum::<f64>() / m_count;
        if w > 0.0 {
            let var_plus = (half as f64 - 1.0) / half as f64 * w + b / half as f64;
            worst = worst.max((var_plus / w).sqrt());
        }
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::DriftVector;
    use crate::special::modified_bessel_i;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn gig_density_normalizes_and_rejects_bad_input() {
        let (mu, z) = (0.5, 1.0);
        let m = 4001;
        let (lo, hi) = (-15.0, 15.0);
        let h = (hi - lo) / (m - 1) as f64;
        let mut mass = 0.0;
        for i in 0..m {
            let w = if i == 0 || i == m - 1 { 0.5 } else { 1.0 };
            mass += w * h * gig_density(mu, z, lo + i as f64 * h).unwrap();
        }
        assert_relative_eq!(mass, 1.0, max_relative = 1e-10);
        assert!(gig_density(0.5, 0.0, 0.0).is_err());
        assert!(gig_density(0.5, -1.0, 0.0).is_err());
    }

    #[test]
    fn gig_density_reflection_symmetry() {
        // negating both mu and u leaves the density unchanged
        let a = gig_density(0.7, 0.8, 1.3).unwrap();
        let b = gig_density(-0.7, 0.8, -1.3).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn hartman_watson_theta_matches_frozen_values() {
        assert_relative_eq!(
            hartman_watson_theta(1.0, 0.3).unwrap(),
            0.00804968996192917,
            max_relative = 1e-8
        );
        assert_relative_eq!(
            hartman_watson_theta(1.0, 0.5).unwrap(),
            0.471739943913302,
            max_relative = 1e-8
        );
        assert_relative_eq!(
            hartman_watson_theta(1.0, 1.0).unwrap(),
            0.739076531303232,
            max_relative = 1e-8
        );
        assert_relative_eq!(
            hartman_watson_theta(2.0, 1.0).unwrap(),
            0.7408883386132,
            max_relative = 1e-8
        );
        assert!(hartman_watson_theta(1.0, 0.2).is_err());
    }

    #[test]
    fn hartman_watson_laplace_recovers_bessel_i() {
        for &(r, nu) in &[(1.0, 0.0), (1.0, 1.0), (2.0, 1.0)] {
            let lhs = hartman_watson_laplace(r, nu).unwrap();
            let rhs = modified_bessel_i(nu, r).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-3);
        }
    }

    #[test]
    fn sigma_sampling_two_coordinates_matches_quadrature_moments() {
        let law = GibbsPatternLaw::new(vec![0.8, -0.4], DriftVector(vec![0.5, -0.3])).unwrap();
        let mut rng = RngStream::new(11, 0);
        let count = 20_000;
        let sample = sample_sigma(&law, count, &mut rng).unwrap();
        assert_eq!(sample.patterns.len(), count);
        assert!(sample.acceptance_rate.is_none());
        let mid = 0.5 * (0.8 - 0.4);
        let us: Vec<f64> =
            sample.patterns.iter().map(|p| p.get(1, 1).unwrap() - mid).collect();
        for p in &sample.patterns {
            assert_eq!(p.bottom_row(), &[0.8, -0.4]);
        }
        // quadrature moments of the coordinate-difference density
        let mu = 0.8;
        let z = 1.0 / (2.0 * ((-0.4_f64 - 0.8) / 2.0).exp());
        let m = 8001;
        let (lo, hi) = (-20.0, 20.0);
        let h = (hi - lo) / (m - 1) as f64;
        let (mut mass, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for i in 0..m {
            let u = lo + i as f64 * h;
            let w = if i == 0 || i == m - 1 { 0.5 } else { 1.0 };
            let f = w * h * gig_density(mu, z, u).unwrap();
            mass += f;
            m1 += f * u;
            m2 += f * u * u;
        }
        let mean = m1 / mass;
        let var = m2 / mass - mean * mean;
        let sample_mean = us.iter().sum::<f64>() / count as f64;
        let se = (var / count as f64).sqrt();
        assert!(
            (sample_mean - mean).abs() < 5.0 * se,
            "sample mean {sample_mean} vs quadrature {mean} (se {se})"
        );
        let sample_var =
            us.iter().map(|u| (u - sample_mean).powi(2)).sum::<f64>() / (count - 1) as f64;
        assert_relative_eq!(sample_var, var, max_relative = 0.1);
    }

    #[test]
    fn sigma_sampling_three_coordinates_mixes_and_respects_symmetry() {
        // symmetric bottom row with zero drift: the law is invariant under
        // sign reversal, so both row sums are centered
        let law =
            GibbsPatternLaw::new(vec![1.5, 0.0, -1.5], DriftVector(vec![0.0, 0.0, 0.0])).unwrap();
        let mut rng = RngStream::new(23, 0);
        let count = 4000;
        let sample = sample_sigma(&law, count, &mut rng).unwrap();
        assert_eq!(sample.patterns.len(), count);
        let rate = sample.acceptance_rate.unwrap();
        assert!((0.2..=0.4).contains(&rate), "acceptance rate {rate} out of band");
        let r_hat = sample.r_hat.unwrap();
        assert!(r_hat < 1.05, "split R-hat {r_hat}");
        let mut mean_top = 0.0;
        let mut mean_mid = 0.0;
        for p in &sample.patterns {
            mean_top += p.get(1, 1).unwrap();
            mean_mid += p.get(2, 1).unwrap() + p.get(2, 2).unwrap();
        }
        mean_top /= count as f64;
        mean_mid /= count as f64;
        assert_abs_diff_eq!(mean_top, 0.0, epsilon = 0.1);
        assert_abs_diff_eq!(mean_mid, 0.0, epsilon = 0.15);
    }

    #[test]
    fn sigma_sampling_sizes_and_guards() {
        let law1 = GibbsPatternLaw::new(vec![0.3], DriftVector(vec![0.1])).unwrap();
        let mut rng = RngStream::new(5, 0);
        let s = sample_sigma(&law1, 3, &mut rng).unwrap();
        assert_eq!(s.patterns.len(), 3);
        assert_eq!(s.patterns[0].bottom_row(), &[0.3]);
        assert!(sample_sigma(&law1, 0, &mut rng).is_err());
        let law4 = GibbsPatternLaw::new(
            vec![3.0, 1.0, -1.0, -3.0],
            DriftVector(vec![0.0, 0.0, 0.0, 0.0]),
        )
        .unwrap();
        assert!(sample_sigma(&law4, 10, &mut rng).is_err());
    }
}
