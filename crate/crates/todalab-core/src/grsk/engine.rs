//! Fine-grid quadrature engine shared by the path transforms and the polymer
//! recursion.
//!
//! Sampled paths are treated as piecewise-linear interpolants on a refined
//! copy of the coarse grid. Near the time origin a transformed coordinate
//! behaves like a multiple of log s, so the integrands arising in composite
//! transforms are asymptotically pure powers c·s^k. The engine tracks that
//! power per coordinate: the opening panel on [0, δ] is integrated by the
//! power rule δ·e^{f(δ)}/(k+1), and interior `LogClock` panels are exact on
//! powers because the integrand is log-linear in u = log s. `Trapezoid`
//! panels implement the plain trapezoidal rule instead and are first-order
//! accurate near the origin; they are used where a first-order error model is
//! wanted (the braid diagnostics) and for the public single-transform
//! contract.

use crate::error::{LabError, Result};
use crate::grid::TimeGrid;
use crate::logsum::{log_add_exp, panel_loglin, panel_trapezoid, PanelRule};
use crate::path::VectorPath;

/// Log-domain tables for one fine grid: ln j and ln ln(j/(j-1)).
pub(crate) struct FineGrid {
    pub delta: f64,
    pub n: usize,
    log_delta: f64,
    log_index: Vec<f64>,
    log_width_u: Vec<f64>,
}

impl FineGrid {
    pub fn new(delta: f64, n: usize) -> Self {
        let mut log_index = vec![f64::NEG_INFINITY; n + 1];
        let mut log_width_u = vec![f64::NEG_INFINITY; n + 1];
        for j in 1..=n {
            log_index[j] = (j as f64).ln();
        }
        for j in 2..=n {
            // ln ln(j/(j-1)) computed via ln1p for accuracy at large j
            log_width_u[j] = (1.0 / (j as f64 - 1.0)).ln_1p().ln();
        }
        Self { delta, n, log_delta: delta.ln(), log_index, log_width_u }
    }

    /// Running log-integral of e^{f(s)} ds over [0, t_j] for all j, where
    /// `f(j)` samples the integrand's logarithm at s = j·δ.
    ///
    /// `slope` is the power k of the integrand near the origin (e^f ~ c·s^k);
    /// `defined0` says whether f(0) is a usable finite value. `log_mass0` is
    /// the logarithm of an initial mass added to the integral (used by the
    /// offset transforms; negative infinity for a plain integral).
    pub fn running_log_integral<F: Fn(usize) -> f64>(
        &self,
        f: F,
        slope: f64,
        defined0: bool,
        rule: PanelRule,
        log_mass0: f64,
    ) -> Result<Vec<f64>> {
        if slope <= -1.0 {
            return Err(LabError::Numerical(format!(
                "integrand behaves like s^{slope} at the origin; the integral diverges"
            )));
        }
        let n = self.n;
        let mut out = vec![f64::NEG_INFINITY; n + 1];
        out[0] = log_mass0;
        let mut f_prev = f(1);
        // opening panel on [0, δ]: power rule ∫₀^δ c s^k ds with c matched
        // at s = δ, except that a trapezoid run on an integrand with a
        // usable origin sample keeps the plain trapezoid panel
        let opening = if rule == PanelRule::Trapezoid && defined0 && slope == 0.0 {
            panel_trapezoid(f(0), f_prev, self.log_delta)
        } else {
            f_prev + self.log_delta - (slope + 1.0).ln()
        };
        let mut acc = log_add_exp(log_mass0, opening);
        out[1] = acc;
        match rule {
            PanelRule::Trapezoid => {
                for j in 2..=n {
                    let fj = f(j);
                    acc = log_add_exp(acc, panel_trapezoid(f_prev, fj, self.log_delta));
                    out[j] = acc;
                    f_prev = fj;
                }
            }
            PanelRule::LogClock => {
                for j in 2..=n {
                    let fj = f(j);
                    let g0 = f_prev + self.log_index[j - 1] + self.log_delta;
                    let g1 = fj + self.log_index[j] + self.log_delta;
                    acc = log_add_exp(acc, panel_loglin(g0, g1, self.log_width_u[j]));
                    out[j] = acc;
                    f_prev = fj;
                }
            }
        }
        Ok(out)
    }
}

/// Path state on the fine grid with per-coordinate origin metadata.
pub(crate) struct FinePath {
    pub grid: FineGrid,
    pub refine: usize,
    /// One column per coordinate, n+1 samples each.
    pub cols: Vec<Vec<f64>>,
    /// Power of s in e^{η_i(s)} as s → 0 (0 for a raw path coordinate).
    pub slopes: Vec<f64>,
    /// Whether the stored value at index 0 is meaningful.
    pub defined0: Vec<bool>,
}

impl FinePath {
    /// Builds the fine path by linear interpolation of a coarse path that is
    /// defined from t₀ in every coordinate.
    pub fn from_path(path: &VectorPath, refine: usize) -> Result<Self> {
        if refine == 0 {
            return Err(LabError::invalid("refine factor must be at least 1"));
        }
        if path.defined_from_slice().iter().any(|&d| d > 0) {
            return Err(LabError::invalid(
                "transform input must be defined from t₀ in every coordinate",
            ));
        }
        let dims = path.dims();
        let steps = path.grid().steps();
        let n = steps * refine;
        let delta = path.grid().dt() / refine as f64;
        let mut cols = vec![Vec::with_capacity(n + 1); dims];
        for i in 0..dims {
            let col = &mut cols[i];
            for m in 0..steps {
                let a = path.row(m)[i];
                let b = path.row(m + 1)[i];
                for r in 0..refine {
                    let lam = r as f64 / refine as f64;
                    col.push(a + lam * (b - a));
                }
            }
            col.push(path.row(steps)[i]);
        }
        Ok(Self {
            grid: FineGrid::new(delta, n),
            refine,
            cols,
            slopes: vec![0.0; dims],
            defined0: vec![true; dims],
        })
    }

    pub fn dims(&self) -> usize {
        self.cols.len()
    }

    /// Applies the rescaled transform in place on coordinates (i, i+1),
    /// zero-based: η ← η + L·(e_i − e_{i+1}) with
    /// L = (1/β)·log(β² ∫₀^t e^{β(η_{i+1}−η_i)} ds).
    pub fn apply_ti(&mut self, i: usize, beta: f64, rule: PanelRule) -> Result<()> {
        if i + 1 >= self.dims() {
            return Err(LabError::invalid(format!(
                "transform index {} out of range for {} coordinates",
                i + 1,
                self.dims()
            )));
        }
        let dslope = self.slopes[i + 1] - self.slopes[i];
        let defined = self.defined0[i] && self.defined0[i + 1];
        let (lo, hi) = self.cols.split_at_mut(i + 1);
        let (a, b) = (&mut lo[i], &mut hi[0]);
        let integral = self.grid.running_log_integral(
            |j| beta * (b[j] - a[j]),
            beta * dslope,
            defined,
            rule,
            f64::NEG_INFINITY,
        )?;
        let log_beta_sq = 2.0 * beta.ln();
        for j in 1..=self.grid.n {
            let l = (log_beta_sq + integral[j]) / beta;
            a[j] += l;
            b[j] -= l;
        }
        // both coordinates blow up at t₀; park placeholders there
        a[0] = 0.0;
        b[0] = 0.0;
        self.defined0[i] = false;
        self.defined0[i + 1] = false;
        let d = dslope + 1.0 / beta;
        self.slopes[i] += d;
        self.slopes[i + 1] -= d;
        Ok(())
    }

    /// Restriction of one coordinate to the coarse grid.
    pub fn coarse_column(&self, i: usize) -> Vec<f64> {
        self.cols[i].iter().step_by(self.refine).copied().collect()
    }

    /// Restriction of all coordinates to a coarse VectorPath.
    pub fn to_vector_path(&self, grid: &TimeGrid) -> Result<VectorPath> {
        let steps = self.grid.n / self.refine;
        let spacing_ok =
            (grid.dt() - self.grid.delta * self.refine as f64).abs() <= 1e-12 * (1.0 + grid.dt());
        if grid.steps() != steps || !spacing_ok {
            return Err(LabError::invalid("coarse grid does not match fine path"));
        }
        let dims = self.dims();
        let mut values = vec![vec![0.0; dims]; steps + 1];
        for i in 0..dims {
            for (m, v) in self.cols[i].iter().step_by(self.refine).enumerate() {
                values[m][i] = *v;
            }
        }
        let defined_from = self.defined0.iter().map(|&d| usize::from(!d)).collect();
        VectorPath::with_defined_from(grid.clone(), values, defined_from)
    }
}
