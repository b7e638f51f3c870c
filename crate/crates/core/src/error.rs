use thiserror::Error;

/// Errors raised by the numerical routines and samplers.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two inputs that must agree in length or dimension do not.
    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },

    /// Every weight underflowed while normalizing.
    #[error("normalization failed: all weights are zero or non-finite")]
    Normalization,

    /// A factorization or iteration failed to produce a usable result.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A model constraint (e.g. at least one active mixture component) is violated.
    #[error("constraint violated: {0}")]
    Constraint(String),

    /// The caller asked for something that makes no sense, such as summarizing an empty trace.
    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
