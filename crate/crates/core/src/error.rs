use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed or out-of-range input.
    #[error("invalid input: {0}")]
    Input(String),

    /// The operation is mathematically undefined at the given argument.
    #[error("outside the domain of definition: {0}")]
    Domain(String),

    #[error("numerical failure: {message} (residual {residual:e})")]
    Numeric { message: String, residual: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Should never happen; signals a solver bug.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>, residual: f64) -> Self {
        Error::Numeric { message: msg.into(), residual }
    }
}
