use thiserror::Error;

/// Errors raised by the numerical layers.
///
/// `Domain` covers precondition violations (parameters outside their stated
/// ranges); the remaining variants are genuine numerical failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singularity: {0}")]
    Singularity(String),

    #[error("Seiberg bounds violated: {0}")]
    Seiberg(String),

    #[error("quadrature budget exceeded: {0}")]
    Quadrature(String),

    #[error("extrapolation did not converge: residual {residual:e} exceeds {tolerance:e}")]
    Convergence { residual: f64, tolerance: f64 },

    #[error("covariance factorization failed: {0}")]
    Factorization(String),

    #[error("branch mismatch: {0}")]
    Branch(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Exit-status class: 2 for validation problems, 3 for numerical failures.
    pub fn exit_class(&self) -> u8 {
        match self {
            Error::Domain(_) | Error::Seiberg(_) | Error::Branch(_) => 2,
            _ => 3,
        }
    }
}
