//! Geometric path transforms and their max-plus limits.
//!
//! The central object is a family of exchange maps on multidimensional
//! paths: each map moves mass log ∫₀^t e^{η_{i+1}−η_i} ds from coordinate
//! i+1 to coordinate i. Composing them in a canonical word produces a
//! triangular pattern of trajectories whose bottom row carries the polymer
//! partition function, and whose structure is probed here by braid,
//! symmetry, and disjoint-path diagnostics.

pub(crate) mod engine;

mod checks;
mod pitman;
mod transforms;

pub use checks::{
    greene_k_sum, greene_k_sum_with, reverse_negate, verify_braid, verify_braid_with,
    verify_symmetry, verify_symmetry_with, BraidReport, SymmetryReport,
};
pub use pitman::{gamma_k, pitman_pi, pitman_transform};
pub use transforms::{
    transform_pattern, transform_pattern_with, transform_pi_k, transform_pi_k_with, transform_t,
    transform_t_beta, transform_t_beta_with, transform_t_offset, transform_t_offset_with,
    transform_t_with, transform_ti, transform_ti_with,
};
