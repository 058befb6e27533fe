//! Whittaker functions of gl_N and the spectral toolkit built on them.
//!
//! The submodules cover evaluation of psi_lambda by closed form, pattern
//! integral, and contour recursion ([`psi`]), the spectral densities and
//! moment contour ([`contour`]), identity and asymptotic verifications
//! ([`identities`]), and the domain types shared by the spectral routines
//! ([`types`]).

pub mod contour;
pub mod identities;
pub mod intertwine;
pub mod psi;
pub mod sampling;
pub mod types;

pub use contour::{
    entrance_density, first_coordinate_marginal, moment_transform, moment_transform_with,
    sklyanin_density, theta_density, MarginalTable, THETA_MIN_TIME,
};
pub use identities::{
    asymptotic_checks, bump_stade_check, dh_mgf, gt_volume, gt_volume_mc, laplace_profile,
    vandermonde, AsymptoticReport, LaplaceProfileReport,
};
pub use intertwine::{
    verify_kernel_intertwining, verify_operator_intertwinings, BumpSpec, OperatorResiduals,
};
pub use sampling::{
    gig_density, hartman_watson_laplace, hartman_watson_theta, sample_sigma, SigmaSample,
};
pub use psi::{
    closed_form_psi, conditional_mgf, critical_point, givental_psi, givental_psi_with,
    log_row_kernel, log_whittaker_psi, mellin_barnes_psi, mellin_barnes_psi_with,
    pattern_log_weight, pattern_type, whittaker_psi, whittaker_psi_detailed, GiventalConfig,
    PsiEvaluation, PsiMethod,
};
pub use types::{ContourSpec, GibbsPatternLaw, SpectralParam};
