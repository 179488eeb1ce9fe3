use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid elliptic modulus: {0}")]
    InvalidModulus(String),

    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),

    #[error("{what} did not converge within {max_iter} iterations")]
    IterationLimit { what: &'static str, max_iter: usize },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid estimate: {0}")]
    InvalidEstimate(String),
}
