//! A numerical laboratory for geometric RSK path transforms, Brownian
//! directed polymers, gl_N Whittaker functions, and Toda-lattice diffusions.
//!
//! The crate is organized in layers. `grid`, `rng`, `path`, `array`, and
//! `logsum` provide deterministic plumbing: uniform time grids, counter-based
//! random streams, sampled vector paths, triangular patterns, and log-domain
//! quadrature. `special` supplies the error-function, gamma, and Bessel
//! machinery. On top of these sit the path transforms (`grsk`), the polymer
//! partition functions (`polymer`), the Whittaker-function engine
//! (`whittaker`), the triangular diffusions (`toda`), random-matrix sampling
//! (`rmt`), and the statistical verification suites (`stats`, `suites`).

pub mod array;
pub mod error;
pub mod grid;
pub mod grsk;
pub mod polymer;
pub mod logsum;
pub mod path;
pub mod rng;
pub mod special;
pub mod whittaker;

pub use array::{PatternTrajectory, TriangularArray};
pub use error::{LabError, Result};
pub use grid::TimeGrid;
pub use logsum::{log_add_exp, log_integral_exp, log_sum_exp, PanelRule, QuadratureConfig};
pub use path::{sample_brownian_path, DriftVector, VectorPath};
pub use rng::RngStream;
