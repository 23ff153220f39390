use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read profile {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed profile: {0}")]
    Parse(#[from] serde_json::Error),

    /// A profile field violates one of its invariants.
    #[error("invalid profile field `{field}`: {reason}")]
    InvalidProfile { field: String, reason: String },

    #[error("unknown tx-power level {requested} dBm (available: {available})")]
    UnknownTxPower { requested: i32, available: String },

    /// A model parameter lies outside its legal range.
    #[error("parameter `{name}` out of range: {reason}")]
    OutOfRange { name: &'static str, reason: String },

    /// The chosen model does not apply to the given parameters.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("phase `{phase}` has no {kind} variation data")]
    NoVariationData { phase: String, kind: &'static str },
}

impl Error {
    pub(crate) fn out_of_range(name: &'static str, reason: impl Into<String>) -> Self {
        Error::OutOfRange {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidProfile {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
