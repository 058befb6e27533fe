use crate::error::{LabError, Result};
use serde::{Deserialize, Serialize};

/// Uniform time grid 0 = t_0 < t_1 < ... < t_M = horizon.
///
/// Grid points are always computed as `m * dt`, never by repeated addition,
/// so there is no accumulation of rounding error across a long horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(LabError::invalid(format!("horizon must be positive, got {horizon}")));
        }
        if steps == 0 {
            return Err(LabError::invalid("steps must be positive"));
        }
        Ok(TimeGrid { horizon, steps })
    }

    /// Grid with a requested step size; the horizon is rounded to a whole
    /// number of steps.
    pub fn with_dt(horizon: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(LabError::invalid(format!("dt must be positive, got {dt}")));
        }
        let steps = (horizon / dt).round().max(1.0) as usize;
        TimeGrid::new(steps as f64 * dt, steps)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    /// t_m = m * dt.
    pub fn t(&self, m: usize) -> f64 {
        m as f64 * self.dt()
    }

    /// Index of the first grid point with t_m >= t (clamped to [0, M]).
    pub fn index_at_or_after(&self, t: f64) -> usize {
        let m = (t / self.dt()).ceil();
        (m.max(0.0) as usize).min(self.steps)
    }

    /// Grid of identical horizon with `factor` times more steps.
    pub fn refined(&self, factor: usize) -> TimeGrid {
        TimeGrid { horizon: self.horizon, steps: self.steps * factor.max(1) }
    }

    /// Grid of identical horizon keeping every `factor`-th point.
    ///
    /// Fails unless `factor` divides the step count.
    pub fn coarsened(&self, factor: usize) -> Result<TimeGrid> {
        if factor == 0 || self.steps % factor != 0 {
            return Err(LabError::invalid(format!(
                "coarsening factor {factor} does not divide step count {}",
                self.steps
            )));
        }
        Ok(TimeGrid { horizon: self.horizon, steps: self.steps / factor })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn grid_points_are_multiples_of_dt() {
        let g = TimeGrid::new(1.0, 1000).unwrap();
        assert_relative_eq!(g.dt(), 1e-3);
        assert_eq!(g.t(0), 0.0);
        // exact multiplication, not accumulated addition
        assert_eq!(g.t(777), 777.0 * g.dt());
        assert_relative_eq!(g.t(1000), 1.0);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(TimeGrid::new(0.0, 10).is_err());
        assert!(TimeGrid::new(-1.0, 10).is_err());
        assert!(TimeGrid::new(1.0, 0).is_err());
    }

    #[test]
    fn refine_and_coarsen_roundtrip() {
        let g = TimeGrid::new(2.0, 100).unwrap();
        let f = g.refined(8);
        assert_eq!(f.steps(), 800);
        assert_eq!(f.coarsened(8).unwrap(), g);
        assert!(g.coarsened(3).is_err());
    }

    #[test]
    fn index_lookup() {
        let g = TimeGrid::new(1.0, 1000).unwrap();
        assert_eq!(g.index_at_or_after(0.1), 100);
        assert_eq!(g.index_at_or_after(0.0995), 100);
        assert_eq!(g.index_at_or_after(2.0), 1000);
    }
}
