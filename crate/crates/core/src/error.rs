use thiserror::Error;

/// Errors raised by the pricing engine and its numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A point outside the half-plane where a transform is known to converge.
    #[error("domain error: {0}")]
    Domain(String),

    /// Evaluation exactly at a pole of a special function or transform.
    #[error("pole: {0}")]
    Pole(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("{what} did not converge (estimated error {estimate:e}, tolerance {tolerance:e})")]
    NonConvergence {
        what: String,
        estimate: f64,
        tolerance: f64,
    },

    /// The requested computation is well defined but out of reach in double precision.
    #[error("impractical in double precision: {0}")]
    Practicality(String),
}

impl Error {
    /// Short machine-readable tag, used by the CLI error object.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::Domain(_) => "domain",
            Error::Pole(_) => "pole",
            Error::Overflow(_) => "overflow",
            Error::NonConvergence { .. } => "non_convergence",
            Error::Practicality(_) => "practicality",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
