//! Drift coefficients built from the logarithmic derivative of the
//! Macdonald function K_μ.
//!
//! Several scalar diffusions in this crate share the drift
//! b(x) = d/dx log K_μ(e^{−x}). Evaluating K_μ through its integral
//! representation is too slow to call once per Euler step, so
//! [`MacdonaldDriftTable`] precomputes a central-difference table on a wide
//! grid and interpolates linearly. Outside the table the drift is replaced
//! by its asymptotic forms:
//!
//! * far left (large r = e^{−x}): b(x) ≈ r + 1/2 + (4μ² − 1)/(8r),
//! * far right (r → 0, μ > 0): b(x) → μ, so the last table value is held.
//!
//! For μ = 1/2 the drift is exactly 1/2 + e^{−x}, which pins down both the
//! finite differences and the interpolation in tests.

use todalab_core::special::log_macdonald_k;
use todalab_core::{LabError, Result};

/// Step used in the central differences that discretize d/dx log K_μ(e^{−x}).
pub const DRIFT_FD_STEP: f64 = 1e-5;

/// Central-difference value of d/dx log K_μ(e^{−x}) at a single point.
pub fn macdonald_log_derivative(mu: f64, x: f64) -> Result<f64> {
    if !mu.is_finite() || !x.is_finite() {
        return Err(LabError::invalid("order and point must be finite"));
    }
    let h = DRIFT_FD_STEP;
    let hi = log_macdonald_k(mu, (-(x + h)).exp())?;
    let lo = log_macdonald_k(mu, (-(x - h)).exp())?;
    Ok((hi - lo) / (2.0 * h))
}

/// Tabulated drift b(x) = d/dx log K_μ(e^{−x}) with linear interpolation and
/// asymptotic continuation outside the table.
#[derive(Debug, Clone)]
pub struct MacdonaldDriftTable {
    mu: f64,
    lo: f64,
    hi: f64,
    step: f64,
    values: Vec<f64>,
}

impl MacdonaldDriftTable {
    /// Builds the default table on [−9, 32] with step 0.01, wide enough for
    /// every diffusion in this crate at the parameter ranges we simulate.
    pub fn new(mu: f64) -> Result<Self> {
        Self::with_range(mu, -9.0, 32.0, 0.01)
    }

    /// Builds a table on [lo, hi] with the given node spacing.
    pub fn with_range(mu: f64, lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(LabError::invalid("order must be finite"));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(LabError::invalid("table range must be finite with lo < hi"));
        }
        if !(step.is_finite() && step > 0.0 && (hi - lo) / step >= 2.0) {
            return Err(LabError::invalid(
                "step must be positive and give at least three nodes",
            ));
        }
        let count = ((hi - lo) / step).round() as usize + 1;
        let mut values = Vec::with_capacity(count);
        for j in 0..count {
            let x = lo + step * j as f64;
            values.push(macdonald_log_derivative(mu, x)?);
        }
        Ok(Self {
            mu,
            lo,
            hi: lo + step * (count - 1) as f64,
            step,
            values,
        })
    }

    /// Order μ the table was built for.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Drift value at `x`; interpolated on the table, asymptotic outside it.
    pub fn drift(&self, x: f64) -> f64 {
        if x < self.lo {
            let r = (-x).exp();
            return r + 0.5 + (4.0 * self.mu * self.mu - 1.0) / (8.0 * r);
        }
        if x >= self.hi {
            return *self.values.last().expect("table has nodes");
        }
        let s = (x - self.lo) / self.step;
        let j = s.floor() as usize;
        let frac = s - j as f64;
        self.values[j] * (1.0 - frac) + self.values[j + 1] * frac
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_integer_order_has_elementary_drift() {
        // K_{1/2}(r) = sqrt(pi/(2r)) e^{-r}, so b(x) = 1/2 + e^{-x}.
        for &x in &[-2.0, -1.0, 0.0, 1.0, 2.5, 6.0, 10.0] {
            let raw = macdonald_log_derivative(0.5, x).unwrap();
            let exact = 0.5 + (-x).exp();
            assert!(
                (raw - exact).abs() < 1e-6,
                "raw drift at x = {x}: {raw} vs {exact}"
            );
        }
        let table = MacdonaldDriftTable::new(0.5).unwrap();
        for &x in &[-2.0, 0.0, 1.0, 4.0, 12.0] {
            // grid-aligned points, so no interpolation error enters
            let got = table.drift(x);
            let exact = 0.5 + (-x).exp();
            assert!(
                (got - exact).abs() < 1e-6,
                "table drift at x = {x}: {got} vs {exact}"
            );
        }
    }

    #[test]
    fn positive_order_drift_levels_off_at_the_order() {
        let table = MacdonaldDriftTable::new(0.7).unwrap();
        assert!((table.drift(20.0) - 0.7).abs() < 1e-3);
        assert!((table.drift(31.5) - 0.7).abs() < 1e-3);
    }

    #[test]
    fn zero_order_drift_decays_logarithmically() {
        // K_0(r) ~ -ln(r/2) - gamma for small r gives b(x) ~ 1/(x + ln 2 - gamma).
        let table = MacdonaldDriftTable::new(0.0).unwrap();
        let gamma = 0.577_215_664_901_532_9_f64;
        let expected = 1.0 / (20.0 + 2.0_f64.ln() - gamma);
        assert!(
            (table.drift(20.0) - expected).abs() < 1e-4,
            "drift {} vs asymptote {expected}",
            table.drift(20.0)
        );
    }

    #[test]
    fn zero_order_drift_matches_the_bessel_ratio() {
        // K_0' = -K_1, so b(x) = e^{-x} K_1(e^{-x}) / K_0(e^{-x}).
        for &x in &[-2.0_f64, 0.0, 1.0] {
            let r = (-x).exp();
            let ratio =
                r * (log_macdonald_k(1.0, r).unwrap() - log_macdonald_k(0.0, r).unwrap()).exp();
            let raw = macdonald_log_derivative(0.0, x).unwrap();
            assert!(
                (raw - ratio).abs() < 1e-6,
                "at x = {x}: fd {raw} vs ratio {ratio}"
            );
        }
    }

    #[test]
    fn asymptotic_continuation_is_continuous_at_the_left_edge() {
        for &mu in &[0.0, 0.5, 1.3] {
            let table = MacdonaldDriftTable::with_range(mu, -6.0, 4.0, 0.01).unwrap();
            let inside = table.drift(-6.0);
            let outside = table.drift(-6.0 - 1e-9);
            let rel = (inside - outside).abs() / inside.abs();
            assert!(rel < 2e-4, "mu = {mu}: jump of relative size {rel}");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(MacdonaldDriftTable::with_range(f64::NAN, 0.0, 1.0, 0.1).is_err());
        assert!(MacdonaldDriftTable::with_range(0.5, 1.0, 0.0, 0.1).is_err());
        assert!(MacdonaldDriftTable::with_range(0.5, 0.0, 1.0, 0.9).is_err());
        assert!(macdonald_log_derivative(0.5, f64::INFINITY).is_err());
    }
}
