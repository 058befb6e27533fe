//! Special functions used throughout the laboratory: error functions and the
//! normal quantile, the complex log-gamma family, and Macdonald/Bessel
//! functions.

pub mod bessel;
pub mod erf;
pub mod gamma;

pub use bessel::{gauss_legendre, log_macdonald_k, macdonald_k, modified_bessel_i};
pub use erf::{erf, erfc, normal_cdf, normal_pdf, normal_quantile};
pub use gamma::{digamma, log_gamma, log_gamma_complex, trigamma};
