use thiserror::Error;

/// Library error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the region where a model is defined (e.g. z <= 0).
    #[error("domain error: {0}")]
    Domain(String),
    /// Parameters rejected by a constructor or a config check.
    #[error("validation error: {0}")]
    Validation(String),
    /// Mathieu parameters outside the first stability region.
    #[error("unstable Mathieu parameters a = {a}, q = {q} (|trace| = {trace})")]
    Unstable { a: f64, q: f64, trace: f64 },
    /// A trajectory left the escape region before a requested time.
    #[error("trajectory escaped at t = {time}")]
    Escaped { time: f64 },
    /// Integrator or root finder did not converge.
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
