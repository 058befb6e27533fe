//! Numerical verification of the intertwining relations between Toda
//! Hamiltonians of adjacent sizes: the pointwise kernel identity
//! (H_x - theta^2) Q = H_y Q, and the two operator-level relations obtained
//! by extending the row kernel to functions of both row levels.

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::special::gauss_legendre;

use super::psi::log_row_kernel;

/// Quantum Toda Hamiltonian applied to the log of a positive function,
/// assembled from central differences of the log: for each coordinate,
/// (d2 log + (d1 log)^2) is the exact second-derivative ratio.
fn hamiltonian_log_fd<F>(coords: &[f64], log_f: F, step: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let base = log_f(coords)?;
    let mut acc = 0.0;
    let mut work = coords.to_vec();
    for i in 0..coords.len() {
        work[i] = coords[i] + step;
        let up = log_f(&work)?;
        work[i] = coords[i] - step;
        let down = log_f(&work)?;
        work[i] = coords[i];
        let d1 = (up - down) / (2.0 * step);
        let d2 = (up - 2.0 * base + down) / (step * step);
        acc += d2 + d1 * d1;
    }
    for w in coords.windows(2) {
        acc -= 2.0 * (w[1] - w[0]).exp();
    }
    Ok(acc)
}

/// Relative residual of the pointwise kernel identity
/// (H_x - theta^2) Q(x, y) = H_y Q(x, y), with the second derivatives taken
/// by central differences of log Q at the given point.
///
/// Supported for two or three bottom coordinates; accuracy degrades when the
/// coordinates are spread so far apart that the exponentials dominate the
/// fourth log-derivative.
pub fn verify_kernel_intertwining(x: &[f64], y: &[f64], theta: f64) -> Result<f64> {
    let n = x.len();
    if !(2..=3).contains(&n) {
        return Err(LabError::UnsupportedSize(format!(
            "kernel intertwining check implemented for 2 or 3 coordinates, got {n}"
        )));
    }
    if y.len() + 1 != n {
        return Err(LabError::invalid(format!(
            "kernel check needs |y| = |x| - 1, got |x| = {n}, |y| = {}",
            y.len()
        )));
    }
    if !theta.is_finite() {
        return Err(LabError::invalid("theta must be finite"));
    }
    let t = Complex64::new(theta, 0.0);
    let step = 1e-4;
    let hx = hamiltonian_log_fd(x, |xs| Ok(log_row_kernel(t, xs, y)?.re), step)?;
    let hy = hamiltonian_log_fd(y, |ys| Ok(log_row_kernel(t, x, ys)?.re), step)?;
    let residual = hx - theta * theta - hy;
    let scale = hx.abs().max(hy.abs()).max(1.0);
    Ok(residual.abs() / scale)
}

/// Gaussian bump test function exp(-sum_i a_i (u_i - c_i)^2) on
/// (x_1, x_2, y), with analytic derivatives used by the operator checks.
#[derive(Debug, Clone, Copy)]
pub struct BumpSpec {
    /// Bump center (c_1, c_2, c_3) in the (x_1, x_2, y) coordinates.
    pub center: [f64; 3],
    /// Nonnegative quadratic coefficients (a_1, a_2, a_3); a zero entry
    /// makes the bump independent of that coordinate.
    pub sharpness: [f64; 3],
}

impl BumpSpec {
    fn validate(&self) -> Result<()> {
        if self.center.iter().any(|c| !c.is_finite()) {
            return Err(LabError::invalid("bump center must be finite"));
        }
        if self.sharpness.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(LabError::invalid("bump sharpness must be nonnegative"));
        }
        if self.sharpness.iter().all(|&a| a == 0.0) {
            return Err(LabError::invalid("bump must depend on at least one coordinate"));
        }
        Ok(())
    }

    fn value(&self, u: [f64; 3]) -> f64 {
        let mut e = 0.0;
        for i in 0..3 {
            e -= self.sharpness[i] * (u[i] - self.center[i]).powi(2);
        }
        e.exp()
    }

    /// First derivative ratio f_{u_i} / f.
    fn d1(&self, u: [f64; 3], i: usize) -> f64 {
        -2.0 * self.sharpness[i] * (u[i] - self.center[i])
    }

    /// Second derivative ratio f_{u_i u_i} / f.
    fn d2(&self, u: [f64; 3], i: usize) -> f64 {
        let a = self.sharpness[i];
        -2.0 * a + self.d1(u, i).powi(2)
    }
}

/// Values and residuals of the two operator intertwining relations at one
/// evaluation point.
#[derive(Debug, Clone, Copy)]
pub struct OperatorResiduals {
    /// (H_x - theta^2) applied to the extended kernel transform of the bump.
    pub lhs: f64,
    /// Transform of the drift-form operator image of the bump.
    pub u_image: f64,
    /// Transform of the mixed-derivative-form operator image of the bump.
    pub v_image: f64,
    /// |lhs - u_image| relative to the value scale.
    pub u_residual: f64,
    /// |lhs - v_image| relative to the value scale.
    pub v_residual: f64,
}

/// Verifies, for two bottom coordinates, the operator intertwining relations
///
/// ```text
/// (H - theta^2) (R_theta f)(x) = R_theta (U_theta f)(x) = R_theta (V_theta f)(x),
/// R_theta f(x) = int Q_theta(x, y) f(x, y) dy,
/// U_theta = d_yy + d_x1x1 + d_x2x2 + 2 (theta + e^{y - x_1}) d_x1
///           + 2 (theta - e^{x_2 - y}) d_x2,
/// V_theta = d_yy + d_x1x1 + d_x2x2 + 2 (d_y + e^{x_2 - y}) d_x1
///           + 2 (theta - e^{x_2 - y}) d_x2,
/// ```
///
/// with a Gaussian bump as test function. The left side is formed by central
/// differences of the transform in x; both right sides are quadratures of
/// analytic derivatives.
pub fn verify_operator_intertwinings(
    theta: f64,
    x: &[f64],
    bump: &BumpSpec,
) -> Result<OperatorResiduals> {
    if x.len() != 2 {
        return Err(LabError::UnsupportedSize(format!(
            "operator intertwining check implemented for 2 coordinates, got {}",
            x.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) || !theta.is_finite() {
        return Err(LabError::invalid("coordinates and theta must be finite"));
    }
    bump.validate()?;

    let log_q =
        |x1: f64, x2: f64, y: f64| theta * (x1 + x2 - y) - (y - x1).exp() - (x2 - y).exp();
    let y_lo = bump.center[2].min(x[1]) - 30.0;
    let y_hi = bump.center[2].max(x[0]) + 30.0;
    let (nodes, weights) = gauss_legendre(20);
    let panels = ((y_hi - y_lo) / 0.5).ceil() as usize;
    let h = (y_hi - y_lo) / panels as f64;
    let quad = |integrand: &dyn Fn(f64) -> f64| -> f64 {
        let mut acc = 0.0;
        for p in 0..panels {
            let mid = y_lo + (p as f64 + 0.5) * h;
            for (t, w) in nodes.iter().zip(&weights) {
                acc += w * integrand(mid + 0.5 * h * t);
            }
        }
        0.5 * h * acc
    };

    // transform of the bump at shifted x for the central differences
    let transform = |x1: f64, x2: f64| -> f64 {
        quad(&|y| log_q(x1, x2, y).exp() * bump.value([x1, x2, y]))
    };
    let step = 1e-4;
    let g0 = transform(x[0], x[1]);
    let d2x1 =
        (transform(x[0] + step, x[1]) - 2.0 * g0 + transform(x[0] - step, x[1])) / (step * step);
    let d2x2 =
        (transform(x[0], x[1] + step) - 2.0 * g0 + transform(x[0], x[1] - step)) / (step * step);
    let lhs = d2x1 + d2x2 - (2.0 * (x[1] - x[0]).exp() + theta * theta) * g0;

    // operator images under the same quadrature
    let u_image = quad(&|y| {
        let u = [x[0], x[1], y];
        let f = bump.value(u);
        let bracket = bump.d2(u, 2)
            + bump.d2(u, 0)
            + bump.d2(u, 1)
            + 2.0 * (theta + (y - x[0]).exp()) * bump.d1(u, 0)
            + 2.0 * (theta - (x[1] - y).exp()) * bump.d1(u, 1);
        log_q(x[0], x[1], y).exp() * f * bracket
    });
    let v_image = quad(&|y| {
        let u = [x[0], x[1], y];
        let f = bump.value(u);
        let mixed = bump.d1(u, 2) * bump.d1(u, 0);
        let bracket = bump.d2(u, 2)
            + bump.d2(u, 0)
            + bump.d2(u, 1)
            + 2.0 * (mixed + (x[1] - y).exp() * bump.d1(u, 0))
            + 2.0 * (theta - (x[1] - y).exp()) * bump.d1(u, 1);
        log_q(x[0], x[1], y).exp() * f * bracket
    });

    let scale = lhs.abs().max(u_image.abs()).max(v_image.abs()).max(1e-12);
    Ok(OperatorResiduals {
        lhs,
        u_image,
        v_image,
        u_residual: (lhs - u_image).abs() / scale,
        v_residual: (lhs - v_image).abs() / scale,
    })
}
