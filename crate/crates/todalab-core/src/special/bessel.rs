//! Macdonald (modified Bessel K) functions of complex order and the modified
//! Bessel function I of the first kind.
//!
//! K is evaluated from the real-line representation
//! K_nu(z) = int_0^inf e^{-z cosh u} cosh(nu u) du,
//! by composite Gauss-Legendre panels with an adaptive truncation point. The
//! integrand decays double-exponentially, so modest panel counts give
//! near-machine accuracy; oscillation from Im(nu) is resolved by capping the
//! panel width at a few points per period.

use crate::error::{LabError, Result};
use num_complex::Complex64;
use std::sync::OnceLock;

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Newton from the Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P_{n-1}(x)
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let k = k as f64;
            let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn gl20() -> &'static (Vec<f64>, Vec<f64>) {
    static GL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    GL.get_or_init(|| gauss_legendre(20))
}

/// Truncation point: z(cosh U - 1) - |Re nu| U >= margin.
fn truncation_point(z: f64, re_nu: f64) -> f64 {
    let margin = 45.0;
    let a = re_nu.abs();
    let mut u = ((1.0 + (margin + 10.0 * a.max(1.0)) / z).max(1.5)).acosh();
    for _ in 0..20 {
        u = ((z + margin + a * u) / z).acosh().max(1.0);
    }
    u + 0.5
}

fn panel_width(im_nu: f64) -> f64 {
    // keep at least ~8 Gauss nodes per oscillation period 2 pi / |Im nu|
    (0.25_f64).min(16.0 / (1.0 + im_nu.abs()))
}

/// Macdonald function K_nu(z) for complex order and z > 0.
///
/// Relative error below 1e-10 for z in [1e-3, 50], |Re nu| <= 10,
/// |Im nu| <= 40. Values underflow for z beyond ~700; use
/// [`log_macdonald_k`] in that regime.
pub fn macdonald_k(order: Complex64, z: f64) -> Result<Complex64> {
    if !(z > 0.0) {
        return Err(LabError::invalid(format!("macdonald_k needs z > 0, got {z}")));
    }
    let u_max = truncation_point(z, order.re);
    let h = panel_width(order.im);
    let panels = (u_max / h).ceil() as usize;
    let (nodes, weights) = gl20();
    let mut sum = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let a = p as f64 * h;
        let b = (a + h).min(u_max);
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        for (x, w) in nodes.iter().zip(weights) {
            let u = c + r * x;
            let f = (-z * u.cosh()).exp() * (order * u).cosh();
            sum += w * r * f;
        }
    }
    Ok(sum)
}

/// log K_nu(z) for real order, valid for arbitrarily large z.
///
/// The Gauss panel sum is accumulated in log space with the running maximum
/// factored out, so the result stays finite wherever log K_nu(z) does.
pub fn log_macdonald_k(order: f64, z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(LabError::invalid(format!("log_macdonald_k needs z > 0, got {z}")));
    }
    let u_max = truncation_point(z, order);
    let h = 0.25;
    let panels = (u_max / h).ceil() as usize;
    let (nodes, weights) = gl20();
    // log integrand: -z cosh u + log cosh(order u)
    let mut max = f64::NEG_INFINITY;
    let mut terms: Vec<f64> = Vec::with_capacity(panels * nodes.len());
    for p in 0..panels {
        let a = p as f64 * h;
        let b = (a + h).min(u_max);
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        for (x, w) in nodes.iter().zip(weights) {
            let u = c + r * x;
            let ou = (order * u).abs();
            // log cosh(y) = |y| + log1p(e^{-2|y|}) - ln 2
            let log_cosh = ou + (-2.0 * ou).exp().ln_1p() - std::f64::consts::LN_2;
            let t = (w * r).ln() - z * u.cosh() + log_cosh;
            max = max.max(t);
            terms.push(t);
        }
    }
    let mut acc = 0.0;
    for t in terms {
        acc += (t - max).exp();
    }
    Ok(max + acc.ln())
}

/// Modified Bessel function I_nu(r) by the ascending power series.
///
/// Relative error below 1e-12 for r <= 20 and nu >= 0.
pub fn modified_bessel_i(order: f64, r: f64) -> Result<f64> {
    if order < 0.0 {
        return Err(LabError::invalid(format!("modified_bessel_i needs order >= 0, got {order}")));
    }
    if !(r > 0.0) {
        if r == 0.0 {
            return Ok(if order == 0.0 { 1.0 } else { 0.0 });
        }
        return Err(LabError::invalid(format!("modified_bessel_i needs r >= 0, got {r}")));
    }
    let half = 0.5 * r;
    let q = half * half;
    // t_0 = (r/2)^nu / Gamma(nu + 1)
    let mut term = (order * half.ln() - crate::special::gamma::log_gamma(order + 1.0)?).exp();
    let mut sum = term;
    for k in 0..200 {
        let k = k as f64;
        term *= q / ((k + 1.0) * (order + k + 1.0));
        let new = sum + term;
        if new == sum {
            break;
        }
        sum = new;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn k_half_closed_form() {
        // K_{1/2}(z) = sqrt(pi/(2z)) e^{-z}
        for &z in &[0.3, 1.0, 2.0, 7.5] {
            let target = (std::f64::consts::PI / (2.0 * z)).sqrt() * (-z).exp();
            let got = macdonald_k(Complex64::new(0.5, 0.0), z).unwrap();
            assert_relative_eq!(got.re, target, max_relative = 1e-11);
            assert_abs_diff_eq!(got.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn k_order_symmetry() {
        for &z in &[0.01, 0.5, 3.0] {
            let a = macdonald_k(Complex64::new(1.3, 2.0), z).unwrap();
            let b = macdonald_k(Complex64::new(-1.3, -2.0), z).unwrap();
            assert_relative_eq!(a.re, b.re, max_relative = 1e-12);
            assert_relative_eq!(a.im, b.im, max_relative = 1e-12);
        }
    }

    #[test]
    fn k_reference_values() {
        // K_0(1) and K_1(1), classical 15-digit references
        assert_relative_eq!(
            macdonald_k(Complex64::new(0.0, 0.0), 1.0).unwrap().re,
            0.421024438240708,
            max_relative = 1e-10
        );
        assert_relative_eq!(
            macdonald_k(Complex64::new(1.0, 0.0), 1.0).unwrap().re,
            0.601907230197235,
            max_relative = 1e-10
        );
        // purely imaginary order: K_{i}(1) is real
        let kiv = macdonald_k(Complex64::new(0.0, 1.0), 1.0).unwrap();
        assert_abs_diff_eq!(kiv.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn log_k_matches_direct_in_overlap() {
        for &(nu, z) in &[(0.0, 0.5), (0.5, 2.0), (2.0, 10.0), (1.0, 50.0)] {
            let direct = macdonald_k(Complex64::new(nu, 0.0), z).unwrap().re.ln();
            let logk = log_macdonald_k(nu, z).unwrap();
            assert_abs_diff_eq!(direct, logk, epsilon = 1e-9);
        }
    }

    #[test]
    fn log_k_survives_huge_argument() {
        // K_nu(z) ~ sqrt(pi/2z) e^{-z}: log K_0(5000) ~ -5000 - 0.5 ln(5000 2/pi)
        let v = log_macdonald_k(0.0, 5000.0).unwrap();
        let asym = -5000.0 + 0.5 * (std::f64::consts::PI / (2.0 * 5000.0)).ln();
        assert_abs_diff_eq!(v, asym, epsilon = 1e-3);
    }

    #[test]
    fn bessel_i_reference_values() {
        assert_abs_diff_eq!(modified_bessel_i(0.0, 0.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(modified_bessel_i(1.0, 1.0).unwrap(), 0.565159103992485, max_relative = 1e-12);
        assert_relative_eq!(modified_bessel_i(0.0, 2.0).unwrap(), 2.279585302336067, max_relative = 1e-12);
    }

    #[test]
    fn bessel_i_derivative_identity() {
        // d/dr I_0(r) = I_1(r)
        let r = 1.3;
        let h = 1e-6;
        let fd = (modified_bessel_i(0.0, r + h).unwrap() - modified_bessel_i(0.0, r - h).unwrap())
            / (2.0 * h);
        assert_abs_diff_eq!(fd, modified_bessel_i(1.0, r).unwrap(), epsilon = 1e-6);
    }
}
