use thiserror::Error;

/// Errors raised by the library. Verification failures are not errors; they
/// come back as [`crate::code::Verdict`] values.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// A bound whose denominator vanishes, e.g. `Vol_q(n, d-1) - 1 = 0`.
    #[error("division-domain error: {0}")]
    DivisionDomain(String),

    #[error("capacity exceeded in {stage}: requires {required}, budget is {budget}")]
    Capacity {
        stage: &'static str,
        required: String,
        budget: u64,
    },

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn capacity(stage: &'static str, required: impl ToString, budget: u64) -> Self {
        Error::Capacity {
            stage,
            required: required.to_string(),
            budget,
        }
    }
}
