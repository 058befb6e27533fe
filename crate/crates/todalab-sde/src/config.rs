use serde::Serialize;
use todalab_core::{LabError, Result, TimeGrid};

/// Default explosion-guard threshold on drift exponents.
pub const DEFAULT_GUARD: f64 = 50.0;

/// Parameters of an Euler-Maruyama run.
///
/// The scheme itself is fixed (explicit Euler with additive noise, strong
/// order 1 here); the knobs are the step, the horizon, and the explosion
/// guard. Every drift in this crate is built from exponentials of state
/// differences, so a simulation aborts with [`LabError::Explosion`] as soon
/// as any such exponent exceeds `guard` in absolute value: beyond that point
/// a single Euler step dwarfs the step size and the discretization is
/// meaningless.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SdeConfig {
    dt: f64,
    horizon: f64,
    guard: f64,
    steps: usize,
}

impl SdeConfig {
    /// Run configuration with the default guard of [`DEFAULT_GUARD`].
    pub fn new(dt: f64, horizon: f64) -> Result<Self> {
        Self::with_guard(dt, horizon, DEFAULT_GUARD)
    }

    /// Run configuration with an explicit guard. The horizon must be a whole
    /// number of steps.
    pub fn with_guard(dt: f64, horizon: f64, guard: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(LabError::invalid(format!("dt must be positive, got {dt}")));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(LabError::invalid(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        if !(guard > 0.0) || !guard.is_finite() {
            return Err(LabError::invalid(format!(
                "explosion guard must be positive, got {guard}"
            )));
        }
        let ratio = horizon / dt;
        let steps = ratio.round();
        if steps < 1.0 || (ratio - steps).abs() > 1e-6 * steps {
            return Err(LabError::invalid(format!(
                "horizon {horizon} is not a whole number of steps of size {dt}"
            )));
        }
        Ok(Self { dt, horizon, guard, steps: steps as usize })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn guard(&self) -> f64 {
        self.guard
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// The uniform grid 0 < dt < 2dt < … < horizon walked by the scheme.
    pub fn grid(&self) -> TimeGrid {
        TimeGrid::new(self.horizon, self.steps).expect("validated at construction")
    }
}
