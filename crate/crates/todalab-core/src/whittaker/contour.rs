//! Spectral-side integrals: the Sklyanin density, the heat-kernel component
//! theta_t, entrance laws built from it, and Laplace-moment contour
//! integrals.
//!
//! Everything here reduces to real one- or two-dimensional quadratures. The
//! two-coordinate theta_t factorizes exactly into a Gaussian in the
//! coordinate sum times a Kontorovich-Lebedev transform
//!
//! ```text
//! kl(r, tau) = int_0^inf K_{iv}(r) v sinh(pi v) e^{-v^2 tau/2} dv
//! ```
//!
//! in the coordinate difference. A Gaussian identity turns kl into a
//! Bessel-free integral over the Macdonald integration variable,
//!
//! ```text
//! kl(r, tau) = (r/2) sqrt(2 pi / tau) e^{pi^2/(2 tau)}
//!              int_0^inf sinh(w) e^{-r cosh w - w^2/(2 tau)} sin(pi w/tau) dw,
//! ```
//!
//! which is cheap and accurate for tau >= 0.4; below that the e^{pi^2/2tau}
//! amplification cancels too many digits and the Bessel form takes over.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{LabError, Result};
use crate::path::DriftVector;
use crate::special::{log_gamma_complex, log_macdonald_k, macdonald_k};

use super::types::{ContourSpec, SpectralParam};

/// Smallest time at which the oscillatory kl quadratures hold full accuracy.
pub const THETA_MIN_TIME: f64 = 0.3;

/// Spectral density in the imaginary parts u (lambda = i u), including the
/// (2 pi)^N N! normalization: the reciprocal-gamma product collapses to
/// prod_{j<k} v sinh(pi v)/pi with v = u_j - u_k.
pub fn sklyanin_density(lambda: &SpectralParam) -> Result<f64> {
    if !lambda.is_imaginary() {
        return Err(LabError::invalid(
            "the spectral density is defined on purely imaginary parameters",
        ));
    }
    let n = lambda.n();
    let mut factorial = 1.0;
    for k in 2..=n {
        factorial *= k as f64;
    }
    let mut density = 1.0 / ((2.0 * PI).powi(n as i32) * factorial);
    for j in 0..n {
        for k in j + 1..n {
            let v = lambda.component(j).im - lambda.component(k).im;
            density *= v * (PI * v).sinh() / PI;
        }
    }
    Ok(density)
}

/// Kontorovich-Lebedev transform of the Gaussian heat kernel; see the module
/// docs for the two quadrature forms.
pub(super) fn kl_transform(r: f64, tau: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(LabError::invalid(format!("kl transform needs r > 0, got {r}")));
    }
    if !(tau >= 0.5 * THETA_MIN_TIME) {
        return Err(LabError::Numerical(format!(
            "kl transform unstable below tau = {}, got {tau}",
            0.5 * THETA_MIN_TIME
        )));
    }
    if tau >= 0.4 {
        kl_transform_w(r, tau)
    } else {
        kl_transform_v(r, tau)
    }
}

/// Bessel-free form; loses roughly e^{pi^2/(2 tau)} * 1e-16 in absolute
/// terms, so it is reserved for tau >= 0.4.
fn kl_transform_w(r: f64, tau: f64) -> Result<f64> {
    let wmax = (90.0 * tau).sqrt() + 8.0;
    // resolve both the sine oscillation and the cosh decay
    let steps = ((wmax * (PI / tau) * 16.0).ceil() as usize).clamp(2_000, 400_000);
    let h = wmax / steps as f64;
    let mut acc = 0.0;
    for i in 0..=steps {
        let w = i as f64 * h;
        let exponent = -r * w.cosh() - w * w / (2.0 * tau);
        if exponent < -746.0 {
            if w > 1.0 && r * w.sinh() > w / tau + PI / tau {
                break;
            }
            continue;
        }
        let term = w.sinh() * exponent.exp() * (PI * w / tau).sin();
        acc += if i == 0 || i == steps { 0.5 * term } else { term };
    }
    let integral = acc * h;
    Ok(0.5 * r * (2.0 * PI / tau).sqrt() * (PI * PI / (2.0 * tau)).exp() * integral)
}

/// The product v sinh(pi v) K_{iv}(r), which a naive evaluation cannot
/// deliver: K_{iv}(r) decays like e^{-pi v/2} with relative cancellation, so
/// multiplying by sinh(pi v) amplifies quadrature noise by e^{pi v}. The
/// reflection identity K_nu = pi (I_{-nu} - I_nu) / (2 sin pi nu) collapses
/// the product to -pi v Im I_{iv}(r), and the ascending series of I_{iv}
/// carries the growth explicitly in 1/Gamma(1 + iv) with no cancellation for
/// r up to about 9; beyond that the direct quadrature takes over (its noise
/// is dominated elsewhere by the Gaussian damping).
pub(super) fn coupling_product(v: f64, r: f64) -> Result<f64> {
    if v == 0.0 {
        return Ok(0.0);
    }
    if r > 9.0 {
        let k = macdonald_k(Complex64::new(0.0, v), r)?.re;
        return Ok(k * v * (PI * v).sinh());
    }
    let log_first = Complex64::new(0.0, v * (r / 2.0).ln())
        - log_gamma_complex(Complex64::new(1.0, v))?;
    let mut term = log_first.exp();
    let mut sum = term;
    let q = (r / 2.0) * (r / 2.0);
    for k in 1..200 {
        term *= q / Complex64::new(k as f64 * k as f64, k as f64 * v);
        sum += term;
        if term.norm() < 1e-18 * sum.norm().max(1e-300) {
            break;
        }
    }
    Ok(-PI * v * sum.im)
}

/// Bessel-series form; accurate for small tau where the w-form cancels.
fn kl_transform_v(r: f64, tau: f64) -> Result<f64> {
    let vmax = PI / (2.0 * tau) + (90.0 / tau).sqrt();
    // the coupling oscillates in v with frequency about ln(2/r) for small r
    let freq = (2.0 / r).ln().abs().max(1.0);
    let dv = (0.008_f64).min(0.1 / freq);
    let steps = ((vmax / dv).ceil() as usize).clamp(2_000, 400_000);
    let h = vmax / steps as f64;
    let mut acc = 0.0;
    for i in 0..=steps {
        let v = i as f64 * h;
        let damping = PI * v / 2.0 - v * v * tau / 2.0;
        if damping < -40.0 {
            break;
        }
        let g = coupling_product(v, r)? * (-v * v * tau / 2.0).exp();
        acc += if i == 0 || i == steps { 0.5 * g } else { g };
    }
    Ok(acc * h)
}

/// Heat-kernel component theta_t(x): a centered Gaussian for one coordinate;
/// for two coordinates the exact factorization into a Gaussian in x_1 + x_2
/// and a kl transform in x_2 - x_1. The reduction is real by construction,
/// so no imaginary residue survives to be checked at runtime.
pub fn theta_density(x: &[f64], t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(LabError::invalid(format!("theta density needs t > 0, got {t}")));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(LabError::invalid("theta density needs finite coordinates"));
    }
    match x.len() {
        1 => Ok((2.0 * PI * t).sqrt().recip() * (-x[0] * x[0] / (2.0 * t)).exp()),
        2 => {
            if t < THETA_MIN_TIME {
                return Err(LabError::Numerical(format!(
                    "two-coordinate theta density unstable below t = {THETA_MIN_TIME}, got {t}"
                )));
            }
            let sigma = x[0] + x[1];
            let delta = x[1] - x[0];
            let r = 2.0 * (delta / 2.0).exp();
            let kl = kl_transform(r, t / 2.0)?;
            Ok((PI / t).sqrt() / (2.0 * PI.powi(3)) * (-sigma * sigma / (4.0 * t)).exp() * kl)
        }
        n => Err(LabError::UnsupportedSize(format!(
            "theta density implemented for up to 2 coordinates, got {n}"
        ))),
    }
}

/// Entrance-law density e^{-|nu|^2 t/2} psi_nu(x) theta_t(x) for N <= 2.
pub fn entrance_density(x: &[f64], t: f64, nu: &DriftVector) -> Result<f64> {
    if nu.0.len() != x.len() {
        return Err(LabError::invalid(format!(
            "drift vector has {} entries but the coordinate vector has {}",
            nu.0.len(),
            x.len()
        )));
    }
    let nu_sq: f64 = nu.0.iter().map(|v| v * v).sum();
    let psi = super::psi::closed_form_log_psi(x, &SpectralParam::from(nu))?;
    let theta = theta_density(x, t)?;
    Ok((-0.5 * nu_sq * t + psi.re).exp() * theta)
}

/// Tabulated first-coordinate marginal of the entrance law, with the pdf and
/// cdf on a uniform grid and the total quadrature mass (which should be 1 for
/// a wide enough grid).
#[derive(Debug, Clone)]
pub struct MarginalTable {
    xs: Vec<f64>,
    pdf: Vec<f64>,
    cdf: Vec<f64>,
    total_mass: f64,
}

impl MarginalTable {
    /// Builds a table from a density sampled on a uniform grid, accumulating
    /// the CDF by the trapezoid rule.
    pub fn from_uniform_density(xs: Vec<f64>, pdf: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != pdf.len() {
            return Err(LabError::invalid(
                "density table needs matching grids with at least two points",
            ));
        }
        let h = xs[1] - xs[0];
        if h <= 0.0 || xs.windows(2).any(|w| (w[1] - w[0] - h).abs() > 1e-9 * h) {
            return Err(LabError::invalid("density grid must be uniformly spaced"));
        }
        if pdf.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(LabError::invalid("density values must be finite and nonnegative"));
        }
        let mut cdf = vec![0.0; xs.len()];
        for i in 1..xs.len() {
            cdf[i] = cdf[i - 1] + 0.5 * h * (pdf[i - 1] + pdf[i]);
        }
        let total_mass = cdf[xs.len() - 1];
        if total_mass <= 0.0 {
            return Err(LabError::invalid("density table has zero mass"));
        }
        Ok(Self { xs, pdf, cdf, total_mass })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn pdf(&self) -> &[f64] {
        &self.pdf
    }

    /// Total mass of the tabulated pdf before normalization.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// Normalized CDF by linear interpolation, clamped to [0, 1].
    pub fn cdf_at(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return 0.0;
        }
        if x >= self.xs[n - 1] {
            return 1.0;
        }
        let h = self.xs[1] - self.xs[0];
        let idx = ((x - self.xs[0]) / h).floor() as usize;
        let idx = idx.min(n - 2);
        let frac = (x - self.xs[idx]) / h;
        let raw = self.cdf[idx] + frac * (self.cdf[idx + 1] - self.cdf[idx]);
        (raw / self.total_mass).clamp(0.0, 1.0)
    }
}

/// First-coordinate marginal of the two-coordinate entrance law at time t,
/// tabulated on `points` nodes over `[lo, hi]`. The coordinate-sum factor is
/// Gaussian, so only the coordinate difference needs a numerical grid; the
/// expensive kl factor is precomputed per difference node.
pub fn first_coordinate_marginal(
    t: f64,
    nu: &DriftVector,
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<MarginalTable> {
    if nu.0.len() != 2 {
        return Err(LabError::UnsupportedSize(format!(
            "marginal implemented for exactly 2 coordinates, got {}",
            nu.0.len()
        )));
    }
    if !(hi > lo) || points < 16 {
        return Err(LabError::invalid("marginal needs hi > lo and at least 16 points"));
    }
    if t < THETA_MIN_TIME {
        return Err(LabError::Numerical(format!(
            "marginal unstable below t = {THETA_MIN_TIME}, got {t}"
        )));
    }
    let (nu1, nu2) = (nu.0[0], nu.0[1]);
    let mu = nu1 - nu2;
    let nu_sum = nu1 + nu2;
    let nu_sq = nu1 * nu1 + nu2 * nu2;
    let prefactor = (-0.5 * nu_sq * t).exp() * (PI / t).sqrt() / (2.0 * PI.powi(3));

    // difference grid: g(delta) = 2 K_mu(r) kl(r, t/2), r = 2 e^{delta/2}
    let (d_lo, d_hi, d_step) = (-30.0_f64, 8.0_f64, 0.025_f64);
    let d_count = ((d_hi - d_lo) / d_step).round() as usize + 1;
    let mut g = Vec::with_capacity(d_count);
    let mut deltas = Vec::with_capacity(d_count);
    for j in 0..d_count {
        let delta = d_lo + j as f64 * d_step;
        let r = 2.0 * (delta / 2.0).exp();
        let kl = kl_transform(r, t / 2.0)?;
        let k = if kl == 0.0 {
            0.0
        } else {
            (std::f64::consts::LN_2 + log_macdonald_k(mu, r)?).exp()
        };
        deltas.push(delta);
        g.push(k * kl);
    }

    let h = (hi - lo) / (points - 1) as f64;
    let mut xs = Vec::with_capacity(points);
    let mut pdf = Vec::with_capacity(points);
    for i in 0..points {
        let x1 = lo + i as f64 * h;
        let mut acc = 0.0;
        for j in 0..d_count {
            let sigma = 2.0 * x1 + deltas[j];
            let weight = (nu_sum * sigma / 2.0 - sigma * sigma / (4.0 * t)).exp();
            let term = g[j] * weight;
            acc += if j == 0 || j == d_count - 1 { 0.5 * term } else { term };
        }
        xs.push(x1);
        pdf.push(prefactor * acc * d_step);
    }

    let mut cdf = Vec::with_capacity(points);
    let mut running = 0.0;
    cdf.push(0.0);
    for i in 1..points {
        running += 0.5 * (pdf[i - 1] + pdf[i]) * h;
        cdf.push(running);
    }
    Ok(MarginalTable { xs, pdf, cdf, total_mass: running })
}

/// Laplace-moment contour integral with the default contour on Re = -1/2.
pub fn moment_transform(s: f64, t: f64, n: usize) -> Result<f64> {
    let contour = ContourSpec::moment_default(n)?;
    moment_transform_with(s, t, &contour)
}

/// Laplace-moment contour integral
///
/// ```text
/// int s^{sum lambda} prod_i Gamma(-lambda_i)^N e^{t sum lambda_i^2 / 2}
///     s_N(lambda) dlambda
/// ```
///
/// along Re lambda_i = a_i < 0, for N in {1, 2}. The result is the Laplace
/// transform E exp(-s Z) of the partition function at time t, so it lies in
/// (0, 1] and decreases in s.
pub fn moment_transform_with(s: f64, t: f64, contour: &ContourSpec) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(LabError::invalid(format!("moment transform needs s > 0, got {s}")));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(LabError::invalid(format!("moment transform needs t > 0, got {t}")));
    }
    let n = contour.dims();
    if n == 0 || n > 2 {
        return Err(LabError::UnsupportedSize(format!(
            "moment transform implemented for 1 or 2 coordinates, got {n}"
        )));
    }
    for &a in contour.abscissas() {
        if a >= 0.0 {
            return Err(LabError::Contour(format!(
                "moment contour abscissa {a} must be negative to stay left of the gamma poles"
            )));
        }
    }
    let ln_s = s.ln();
    let n_pow = n as i32;
    let value: Complex64 = match n {
        1 => {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..contour.points() {
                let lam = contour.node(0, k);
                let log_term =
                    ln_s * lam + (n as f64) * log_gamma_complex(-lam)? + 0.5 * t * lam * lam;
                acc += contour.weight(k) * log_term.exp();
            }
            acc / (2.0 * PI)
        }
        _ => {
            let points = contour.points();
            // per-axis factor s^lam Gamma(-lam)^2 e^{t lam^2/2}
            let mut axis = vec![Complex64::new(0.0, 0.0); points * 2];
            for (j, slot) in axis.chunks_mut(points).enumerate() {
                for k in 0..points {
                    let lam = contour.node(j, k);
                    let log_term =
                        ln_s * lam + 2.0 * log_gamma_complex(-lam)? + 0.5 * t * lam * lam;
                    slot[k] = contour.weight(k) * log_term.exp();
                }
            }
            let a = contour.abscissas();
            let equal_abscissas = (a[0] - a[1]).abs() < 1e-12;
            let h = contour.step();
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..points {
                for k in 0..points {
                    let pair = axis[j] * axis[points + k];
                    let coupling = if equal_abscissas {
                        let v = (j as f64 - k as f64) * h;
                        Complex64::new(v * (PI * v).sinh() / PI, 0.0)
                    } else {
                        let z = contour.node(0, j) - contour.node(1, k);
                        (-log_gamma_complex(z)? - log_gamma_complex(-z)?).exp()
                    };
                    acc += pair * coupling;
                }
            }
            acc / ((2.0 * PI).powi(n_pow) * 2.0)
        }
    };
    let scale = value.norm().max(f64::MIN_POSITIVE);
    if value.im.abs() > 1e-8 * scale.max(1e-12) {
        return Err(LabError::Numerical(format!(
            "moment contour integral left an imaginary residue of {:.3e}",
            value.im
        )));
    }
    Ok(value.re)
}
