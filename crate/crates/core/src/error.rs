use thiserror::Error;

/// Errors raised by the estimation pipeline.
///
/// Variants are grouped by what the caller can do about them: the first four
/// mean the inputs violate a precondition, the rest mean a numerical procedure
/// did not reach its stated accuracy.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("resolution error: requested lag {max_lag} needs a grid larger than {grid_size}")]
    Resolution { max_lag: usize, grid_size: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("no convergence: {message}")]
    Convergence { message: String, trace: Vec<String> },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("truncation error: {0}")]
    Truncation(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn convergence(msg: impl Into<String>, trace: Vec<String>) -> Self {
        Error::Convergence {
            message: msg.into(),
            trace,
        }
    }

    /// True for errors caused by bad inputs rather than by a solver.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::Validation(_) | Error::Resolution { .. } | Error::Unsupported(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
