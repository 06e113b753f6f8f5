use thiserror::Error;

/// Errors produced by the numerical routines.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("eigensolver did not converge after {iterations} iterations (best residual {residual:.3e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        /// Best eigenvalue estimate at the point of failure.
        best_eigenvalue: f64,
    },

    #[error("truncation too small: discarded tail mass {tail:.3e} exceeds {limit:.3e}")]
    TruncationTail { tail: f64, limit: f64 },

    #[error("covariance matrix is not physical (min eigenvalue {min_eigenvalue:.3e})")]
    Unphysical { min_eigenvalue: f64 },

    #[error("optimizer failed: {0}")]
    OptimizerFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
