use thiserror::Error;

/// Errors raised by the laboratory. Variants map onto the CLI exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("kernel is not symmetric: c({offset:?}) = {forward} but c(-v) = {backward}")]
    SymmetryViolation {
        offset: Vec<i32>,
        forward: f64,
        backward: f64,
    },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("resource guard exceeded: {what} reached {reached} (limit {limit})")]
    Resource {
        what: &'static str,
        reached: u64,
        limit: u64,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn hypothesis(msg: impl Into<String>) -> Self {
        Error::Hypothesis(msg.into())
    }

    pub(crate) fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }

    /// Short machine-readable tag for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::Precondition(_) => "precondition",
            Error::SymmetryViolation { .. } => "symmetry-violation",
            Error::Hypothesis(_) => "hypothesis",
            Error::Resource { .. } => "resource",
            Error::Internal(_) => "internal",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
