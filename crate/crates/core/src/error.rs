use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its documented domain. `field` names the
    /// offending parameter so callers can report it verbatim.
    #[error("invalid {field}: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("point ({x}, {y}) is not a finite first-quadrant point")]
    InvalidPoint { x: f64, y: f64 },

    #[error("operation requires a non-empty point set")]
    EmptySet,

    #[error("{p} is not prime")]
    NotPrime { p: u64 },

    #[error("refusing to materialize ~{estimated_points:.3e} points ({reason}); use implicit mode")]
    TooLarge { estimated_points: f64, reason: String },

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}
