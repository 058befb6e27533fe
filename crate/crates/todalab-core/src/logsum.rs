//! Stable log-domain arithmetic and the panel rules used by all path
//! integrals.
//!
//! Two panel rules are provided. `Trapezoid` is the literal trapezoidal rule
//! applied to e^f and accumulated in log space; it is the contract behind the
//! public [`log_integral_exp`]. `LogClock` re-expresses each panel in the
//! logarithmic time variable u = log s, where an integrand that is a pure
//! power of s becomes exactly log-linear; the panel value is then exact. The
//! path transforms produce integrands that behave like powers of s near the
//! time origin, which is where the trapezoidal rule loses accuracy, so the
//! composite transforms default to `LogClock` panels on a refined grid.

use crate::error::{LabError, Result};
use serde::{Deserialize, Serialize};

/// log(e^a + e^b) without overflow. Either argument may be -inf.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// log Σ e^{x_i} over a slice; returns -inf for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let mut acc = 0.0;
    for &x in xs {
        acc += (x - max).exp();
    }
    max + acc.ln()
}

/// log(e^a - e^b) for a > b. Errors if the difference is not positive.
pub fn log_sub_exp(a: f64, b: f64) -> Result<f64> {
    if b == f64::NEG_INFINITY {
        return Ok(a);
    }
    if a <= b {
        return Err(LabError::Numerical(format!(
            "log_sub_exp needs a > b, got a={a}, b={b}"
        )));
    }
    Ok(a + (-((b - a).exp())).ln_1p())
}

/// Panel rule for path integrals of e^f.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PanelRule {
    /// Trapezoid applied to e^f in the original time variable.
    Trapezoid,
    /// Exact integral of a log-linear interpolant in u = log s.
    LogClock,
}

/// Quadrature configuration for the composite path transforms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rule: PanelRule,
    /// Each coarse step is split into this many sub-steps before panel sums.
    pub refine: usize,
}

impl QuadratureConfig {
    pub fn new(rule: PanelRule, refine: usize) -> Result<Self> {
        if refine == 0 {
            return Err(LabError::invalid("refine factor must be at least 1"));
        }
        Ok(Self { rule, refine })
    }
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { rule: PanelRule::LogClock, refine: 16 }
    }
}

/// log of ∫ e^{g(x)} dx over one panel of width w = e^{logw}, with g linear
/// between g0 and g1. Exact for log-linear integrands.
pub fn panel_loglin(g0: f64, g1: f64, logw: f64) -> f64 {
    if g0 == f64::NEG_INFINITY && g1 == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let d = g1 - g0;
    if !d.is_finite() {
        // One endpoint is -inf: fall back to the trapezoidal panel, which
        // degrades gracefully to the finite endpoint.
        return panel_trapezoid(g0, g1, logw);
    }
    // ∫ = w · e^{max(g0,g1)} · (1 - e^{-|d|}) / |d|
    let ad = d.abs();
    let log_factor = if ad < 1e-12 {
        // (1 - e^{-a})/a → 1 - a/2 + ...
        (-0.5 * ad).ln_1p()
    } else {
        ((-(-ad).exp_m1()) / ad).ln()
    };
    logw + g0.max(g1) + log_factor
}

/// log of the trapezoidal panel (w/2)(e^{g0} + e^{g1}).
pub fn panel_trapezoid(g0: f64, g1: f64, logw: f64) -> f64 {
    logw - std::f64::consts::LN_2 + log_add_exp(g0, g1)
}

/// Running log-integral of e^f over a uniformly sampled prefix, by
/// trapezoidal panels accumulated with log-sum-exp.
///
/// `values[m]` holds f(m·dt). Output `L[m] = log ∫₀^{t_m} e^{f}`; `L[0]` is
/// -inf. Entries may be -inf (panels degrade to the finite endpoint), and the
/// output is monotone nondecreasing in m.
pub fn log_integral_exp_running(values: &[f64], dt: f64) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(LabError::invalid("need at least two samples for a panel"));
    }
    if !(dt > 0.0) {
        return Err(LabError::invalid(format!("dt must be positive, got {dt}")));
    }
    let logdt = dt.ln();
    let mut out = Vec::with_capacity(values.len());
    out.push(f64::NEG_INFINITY);
    let mut acc = f64::NEG_INFINITY;
    for m in 1..values.len() {
        acc = log_add_exp(acc, panel_trapezoid(values[m - 1], values[m], logdt));
        out.push(acc);
    }
    Ok(out)
}

/// log ∫₀^{t_m} e^{f(s)} ds for a sampled f on a uniform grid of step dt.
pub fn log_integral_exp(values: &[f64], dt: f64, m: usize) -> Result<f64> {
    if m == 0 || m >= values.len() {
        return Err(LabError::invalid(format!(
            "index m={m} out of range 1..{}",
            values.len()
        )));
    }
    Ok(log_integral_exp_running(&values[..=m], dt)?[m])
}
