//! Identity and asymptotic verifications: the zero-temperature alternating
//! MGF, the pattern-polytope volume with its Monte Carlo oracle, the
//! exponential-weight pairing identity, and the large-beta/large-separation
//! profiles of psi.

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::path::DriftVector;
use crate::rng::RngStream;
use crate::special::{gauss_legendre, log_gamma_complex, macdonald_k};

use super::psi::{closed_form_log_psi, pattern_log_psi, GiventalConfig};
use super::types::SpectralParam;

/// Vandermonde product prod_{i<j} (x_i - x_j), positive on descending input.
pub fn vandermonde(x: &[f64]) -> f64 {
    let mut h = 1.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            h *= x[i] - x[j];
        }
    }
    h
}

fn factorial_product(n: usize) -> f64 {
    let mut p = 1.0;
    let mut f = 1.0;
    for k in 1..n {
        f *= k as f64;
        p *= f;
    }
    p
}

/// Alternating sum over permutations divided by the Vandermonde of lambda,
/// for distinct entries, via Heap's algorithm with parity tracking.
fn raw_alternating_ratio(x: &[f64], lam: &[f64]) -> Result<f64> {
    let n = x.len();
    let h = vandermonde(lam);
    if h.abs() < 1e-200 {
        return Err(LabError::invalid(
            "lambda entries too close for the alternating-sum formula",
        ));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut counters = vec![0usize; n];
    let mut sign = 1.0;
    let term = |perm: &[usize], sign: f64| -> f64 {
        let dot: f64 = perm.iter().zip(x).map(|(&p, xi)| lam[p] * xi).sum();
        sign * dot.exp()
    };
    let mut acc = term(&perm, sign);
    let mut i = 0;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            sign = -sign;
            acc += term(&perm, sign);
            counters[i] += 1;
            i = 0;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    Ok(acc / h)
}

/// Signed sum over permutations sum_sigma (-1)^sigma e^{(sigma lambda, x)}
/// divided by h(lambda). Entries closer than 1e-4 are clustered and spread
/// symmetrically about their mean, and the removable singularity is crossed
/// by Richardson extrapolation of the centered divided difference (the error
/// is even in the spread, so one extrapolation step leaves O(spread^4)).
fn alternating_ratio(x: &[f64], lambda: &[f64]) -> Result<f64> {
    let n = x.len();
    if lambda.len() != n {
        return Err(LabError::invalid(format!(
            "coordinate vector has {n} entries but lambda has {}",
            lambda.len()
        )));
    }
    if n > 8 {
        return Err(LabError::UnsupportedSize(format!(
            "alternating sum over {n}! permutations refused"
        )));
    }

    // cluster entries closer than the divided-difference window
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| lambda[a].total_cmp(&lambda[b]));
    let mut clusters: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && lambda[order[end]] - lambda[order[end - 1]] < 1e-4 {
            end += 1;
        }
        if end - start > 1 {
            clusters.push((start, end));
        }
        start = end;
    }
    if clusters.is_empty() {
        return raw_alternating_ratio(x, lambda);
    }

    let spread = |s: f64| -> Vec<f64> {
        let mut lam = lambda.to_vec();
        for &(a, b) in &clusters {
            let m = b - a;
            let mid: f64 = order[a..b].iter().map(|&i| lambda[i]).sum::<f64>() / m as f64;
            for (j, &idx) in order[a..b].iter().enumerate() {
                lam[idx] = mid + s * (j as f64 - (m as f64 - 1.0) / 2.0);
            }
        }
        lam
    };
    let coarse = raw_alternating_ratio(x, &spread(2e-3))?;
    let fine = raw_alternating_ratio(x, &spread(1e-3))?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Zero-temperature MGF of the conditioned increment vector,
/// (prod_{k<N} k!) sum_sigma (-1)^sigma e^{(sigma lambda, x)} / (h(x) h(lambda)).
/// Exactly 1 at lambda = 0; removable lambda ties handled by centered
/// divided differences.
pub fn dh_mgf(x: &[f64], lambda: &[f64]) -> Result<f64> {
    let n = x.len();
    if n == 0 {
        return Err(LabError::invalid("dh_mgf needs at least one coordinate"));
    }
    if lambda.iter().all(|&l| l == 0.0) {
        return Ok(1.0);
    }
    let h_x = vandermonde(x);
    if h_x.abs() < 1e-300 {
        return Err(LabError::invalid(
            "coordinates must be distinct for the alternating-sum formula",
        ));
    }
    Ok(factorial_product(n) * alternating_ratio(x, lambda)? / h_x)
}

/// Exact Euclidean volume h(x) / prod_{k<N} k! of the polytope of
/// interlacing patterns with bottom row x (x weakly descending).
pub fn gt_volume(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(LabError::invalid("volume needs a nonempty bottom row"));
    }
    if x.windows(2).any(|w| w[0] < w[1]) {
        return Err(LabError::invalid("bottom row must be weakly descending"));
    }
    Ok(vandermonde(x) / factorial_product(x.len()))
}

/// Hit-or-miss Monte Carlo estimate of the same volume: sample each free
/// entry T_{k,i} uniformly in its interlacing bound [x_{i+N-k}, x_i] and
/// count fully interlaced patterns.
pub fn gt_volume_mc(x: &[f64], samples: usize, rng: &mut RngStream) -> Result<f64> {
    let n = x.len();
    if n < 2 {
        return gt_volume(x);
    }
    if x.windows(2).any(|w| w[0] < w[1]) {
        return Err(LabError::invalid("bottom row must be weakly descending"));
    }
    if samples == 0 {
        return Err(LabError::invalid("Monte Carlo volume needs at least one sample"));
    }
    // bounding box and its volume
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    let mut box_volume = 1.0;
    for k in 1..n {
        for i in 1..=k {
            let low = x[i + n - k - 1];
            let high = x[i - 1];
            lo.push(low);
            hi.push(high);
            box_volume *= high - low;
        }
    }
    if box_volume == 0.0 {
        return Ok(0.0);
    }
    let d = lo.len();
    let mut free = vec![0.0; d];
    let mut hits = 0usize;
    let offset = |k: usize| k * (k - 1) / 2;
    for _ in 0..samples {
        for j in 0..d {
            free[j] = lo[j] + (hi[j] - lo[j]) * rng.uniform();
        }
        let mut ok = true;
        'rows: for k in 1..n {
            let above: &[f64] = if k + 1 < n {
                &free[offset(k + 1)..offset(k + 1) + k + 1]
            } else {
                x
            };
            let row = &free[offset(k)..offset(k) + k];
            for i in 0..k {
                if !(above[i] >= row[i] && row[i] >= above[i + 1]) {
                    ok = false;
                    break 'rows;
                }
            }
        }
        if ok {
            hits += 1;
        }
    }
    Ok(box_volume * hits as f64 / samples as f64)
}

/// Composite 20-node Gauss-Legendre quadrature of f over [a, b].
fn gl_integral<F: FnMut(f64) -> Complex64>(a: f64, b: f64, panel: f64, mut f: F) -> Complex64 {
    let (nodes, weights) = gauss_legendre(20);
    let panels = (((b - a) / panel).ceil() as usize).max(1);
    let h = (b - a) / panels as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (t, w) in nodes.iter().zip(&weights) {
            acc += *w * f(mid + 0.5 * h * t);
        }
    }
    acc * 0.5 * h
}

/// Relative residual of the exponential-weight pairing identity
///
/// ```text
/// int e^{-e^{x_1 - z}} psi_lambda(x) psi_nu(x) dx
///   = e^{z sum(lambda + nu)} prod_{i,j} Gamma(lambda_i + nu_j)
/// ```
///
/// for N <= 2, by quadrature over a truncated box (sheared to coordinates
/// (x_1, x_2 - x_1) so the Macdonald factors live on one axis).
pub fn bump_stade_check(lambda: &SpectralParam, nu: &SpectralParam, z: f64) -> Result<f64> {
    let n = lambda.n();
    if nu.n() != n {
        return Err(LabError::invalid("lambda and nu must have matching sizes"));
    }
    if n > 2 {
        return Err(LabError::UnsupportedSize(format!(
            "pairing identity implemented for up to 2 coordinates, got {n}"
        )));
    }
    if !z.is_finite() {
        return Err(LabError::invalid("shift z must be finite"));
    }
    let mut min_sum = f64::INFINITY;
    let mut rhs_log = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let s = lambda.component(i) + nu.component(j);
            min_sum = min_sum.min(s.re);
            rhs_log += log_gamma_complex(s)?;
        }
    }
    if min_sum <= 0.0 {
        return Err(LabError::invalid(
            "the identity requires Re(lambda_i + nu_j) > 0 for every pair",
        ));
    }
    let total = lambda.sum() + nu.sum();
    rhs_log += z * total;
    let rhs = rhs_log.exp();

    let lhs = match n {
        1 => {
            let s = lambda.component(0) + nu.component(0);
            // e^{s x} decays to the left at rate Re(s), double-exp above z
            let lo = z - 40.0 / min_sum;
            gl_integral(lo, z + 4.5, 0.5, |x1| {
                (s * x1 - (x1 - z).exp()).exp()
            })
        }
        _ => {
            let mu_l = lambda.component(0) - lambda.component(1);
            let mu_n = nu.component(0) - nu.component(1);
            let half = 0.5 * total;
            // coordinate-difference decay rate of the Macdonald pair
            let rate = 0.5 * (total.re - mu_l.re.abs() - mu_n.re.abs());
            let d_lo = (-45.0 / rate).min(-40.0);
            let delta_part = gl_integral(d_lo, 6.0, 0.5, |delta| {
                let r = 2.0 * (delta / 2.0).exp();
                let k_pair = macdonald_k(mu_l, r).and_then(|a| {
                    macdonald_k(mu_n, r).map(|b| a * b)
                });
                match k_pair {
                    Ok(kk) => 4.0 * kk * (half * delta).exp(),
                    Err(_) => Complex64::new(0.0, 0.0),
                }
            });
            let lo = z - 45.0 / min_sum;
            let x1_part = gl_integral(lo, z + 4.5, 0.5, |x1| {
                (total * x1 - (x1 - z).exp()).exp()
            });
            delta_part * x1_part
        }
    };
    Ok((lhs - rhs).norm() / rhs.norm())
}

/// Convergence report for the large-beta profiles: the rescaled psi_0
/// against the polytope volume and the rescaled psi_{lambda/beta} against
/// the alternating-sum target, per ladder entry.
#[derive(Debug, Clone)]
pub struct AsymptoticReport {
    pub betas: Vec<f64>,
    pub ratio_zero: Vec<f64>,
    pub ratio_drift: Vec<f64>,
}

impl AsymptoticReport {
    /// Largest deviation |ratio - 1| at the final ladder entry.
    pub fn final_gap(&self) -> f64 {
        let z = self.ratio_zero.last().map_or(f64::INFINITY, |r| (r - 1.0).abs());
        let d = self.ratio_drift.last().map_or(f64::INFINITY, |r| (r - 1.0).abs());
        z.max(d)
    }

    /// Whether |ratio - 1| decreases strictly along the ladder for both rows.
    pub fn monotone(&self) -> bool {
        let dec = |v: &[f64]| v.windows(2).all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs());
        dec(&self.ratio_zero) && dec(&self.ratio_drift)
    }
}

/// Rescaled large-beta checks beta^{-N(N-1)/2} psi_0(beta x) -> h(x)/prod k!
/// and beta^{-N(N-1)/2} psi_{lambda/beta}(beta x) -> alternating sum / h(lambda),
/// via the log-domain closed forms (the scaled coordinates are far too
/// separated for the pattern quadrature).
pub fn asymptotic_checks(x: &[f64], lambda: &[f64], betas: &[f64]) -> Result<AsymptoticReport> {
    let n = x.len();
    if n > 2 {
        return Err(LabError::UnsupportedSize(format!(
            "asymptotic profiles implemented for up to 2 coordinates, got {n}"
        )));
    }
    if lambda.len() != n {
        return Err(LabError::invalid("lambda must match the coordinate count"));
    }
    if betas.is_empty() || betas.windows(2).any(|w| w[1] <= w[0]) || betas[0] <= 0.0 {
        return Err(LabError::invalid("beta ladder must be positive and increasing"));
    }
    if x.windows(2).any(|w| w[0] <= w[1]) {
        return Err(LabError::invalid("coordinates must be strictly descending"));
    }
    let d = (n * (n - 1) / 2) as f64;
    let target_zero = vandermonde(x) / factorial_product(n);
    let target_drift = alternating_ratio(x, lambda)?;
    let zero = SpectralParam::from_real(&vec![0.0; n])?;
    let mut report = AsymptoticReport {
        betas: betas.to_vec(),
        ratio_zero: Vec::with_capacity(betas.len()),
        ratio_drift: Vec::with_capacity(betas.len()),
    };
    for &beta in betas {
        let scaled: Vec<f64> = x.iter().map(|v| beta * v).collect();
        let log_zero = closed_form_log_psi(&scaled, &zero)?.re;
        let shrunk: Vec<f64> = lambda.iter().map(|l| l / beta).collect();
        let log_drift = closed_form_log_psi(&scaled, &SpectralParam::from_real(&shrunk)?)?.re;
        let rescale = -d * beta.ln();
        report.ratio_zero.push((rescale + log_zero).exp() / target_zero);
        report.ratio_drift.push((rescale + log_drift).exp() / target_drift);
    }
    Ok(report)
}

/// Large-separation profile of psi at x = -M rho with rho = (1/2, -1/2):
/// the drift dependence log psi_nu - log psi_0 (which vanishes as M grows)
/// and the remainder log psi_0 + M/4 + 2 e^{M/2} (which tends to a constant).
#[derive(Debug, Clone)]
pub struct LaplaceProfileReport {
    pub ms: Vec<f64>,
    pub nu_gap: Vec<f64>,
    pub remainder: Vec<f64>,
}

impl LaplaceProfileReport {
    /// Whether |log psi_nu - log psi_0| decreases strictly along the ladder.
    pub fn gap_decreasing(&self) -> bool {
        self.nu_gap.windows(2).all(|w| w[1].abs() < w[0].abs())
    }
}

/// Evaluates the pattern integral at the deep-chamber points -M rho and
/// reports the profile of the previous struct for N = 2.
pub fn laplace_profile(nu: &DriftVector, ms: &[f64]) -> Result<LaplaceProfileReport> {
    if nu.0.len() != 2 {
        return Err(LabError::UnsupportedSize(format!(
            "separation profile implemented for exactly 2 coordinates, got {}",
            nu.0.len()
        )));
    }
    if ms.is_empty() || ms.windows(2).any(|w| w[1] <= w[0]) || ms[0] <= 0.0 {
        return Err(LabError::invalid("M ladder must be positive and increasing"));
    }
    let cfg = GiventalConfig::default();
    let zero = SpectralParam::from_real(&[0.0, 0.0])?;
    let nu_param = SpectralParam::from(nu);
    let mut report = LaplaceProfileReport {
        ms: ms.to_vec(),
        nu_gap: Vec::with_capacity(ms.len()),
        remainder: Vec::with_capacity(ms.len()),
    };
    for &m in ms {
        let x = [-m / 2.0, m / 2.0];
        let log_zero = pattern_log_psi(&x, &zero, &cfg)?.log_value.re;
        let log_nu = pattern_log_psi(&x, &nu_param, &cfg)?.log_value.re;
        report.nu_gap.push(log_nu - log_zero);
        report.remainder.push(log_zero + m / 4.0 + 2.0 * (m / 2.0).exp());
    }
    Ok(report)
}
