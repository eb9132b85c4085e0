use std::path::PathBuf;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An input lies outside the domain of a physical formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value is invalid. `field` names the offending key.
    #[error("invalid configuration `{field}`: {message}")]
    Config { field: String, message: String },

    /// The integration produced a non-finite value or broke a state invariant.
    /// `snapshot` points at the diagnostic dump, when one was written.
    #[error("numeric failure at step {step}: {message}")]
    Numeric {
        step: u64,
        message: String,
        snapshot: Option<PathBuf>,
    },

    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A data file could not be parsed.
    #[error("malformed input {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn numeric(step: u64, message: impl Into<String>) -> Self {
        Error::Numeric {
            step,
            message: message.into(),
            snapshot: None,
        }
    }
}
