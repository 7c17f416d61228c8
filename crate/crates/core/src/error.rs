use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of a mathematical function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value is invalid. `field` names the offending entry.
    #[error("invalid configuration for `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// No pair at this lag carries information about the correlation.
    #[error("no informative pairs at lag {lag}")]
    NoInformation { lag: f64 },

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// Malformed tabular input; `row` is 1-based and counts the header.
    #[error("parse error at row {row}: {message}")]
    Parse { row: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
