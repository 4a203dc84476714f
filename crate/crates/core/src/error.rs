use thiserror::Error;

/// Errors raised across the crate. Numeric payloads are widened to `f64`.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Caller-supplied parameters violate a precondition.
    #[error("input error: {0}")]
    Input(String),
    /// A bracket or search interval could not be established.
    #[error("range error: {0}")]
    Range(String),
    /// A quadrature did not reach its tolerance; `estimate` is the best value found.
    #[error("accuracy error: {message} (estimate {estimate}, error bound {error_bound})")]
    Accuracy { message: String, estimate: f64, error_bound: f64 },
    #[error("mesh error: {0}")]
    Mesh(String),
    #[error("assembly error: {0}")]
    Assembly(String),
    /// Iterative solver hit its iteration cap.
    #[error("convergence error after {iterations} iterations (relative residual {residual})")]
    Convergence { iterations: usize, residual: f64 },
    /// Too many Monte Carlo walks were discarded.
    #[error("reliability error: {discarded} of {walks} walks exceeded the step cap")]
    Reliability { discarded: usize, walks: usize },
}

impl Error {
    /// True for errors caused by invalid caller input rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Input(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
