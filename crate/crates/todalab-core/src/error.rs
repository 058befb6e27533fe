use thiserror::Error;

/// Error type shared by every module of the laboratory.
#[derive(Debug, Error)]
pub enum LabError {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A quadrature contour would cross a pole or violate an ordering constraint.
    #[error("contour violation: {0}")]
    Contour(String),

    /// Evaluation requested at a pole of a special function.
    #[error("pole of {function} at {location}")]
    Pole { function: &'static str, location: String },

    /// A size supported only in principle, not by this implementation.
    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    /// An iterative numerical procedure failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// An SDE path tripped the explosion guard.
    #[error("SDE explosion guard tripped at t = {time:.6} (|exponent| > {guard})")]
    Explosion { time: f64, guard: f64 },

    /// Unknown verification suite name.
    #[error("unknown suite: {0}")]
    UnknownSuite(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

impl LabError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        LabError::InvalidArgument(msg.into())
    }
}
