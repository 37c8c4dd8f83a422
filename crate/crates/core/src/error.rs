use thiserror::Error;

/// Errors raised by code construction, simulation and persistence.
#[derive(Debug, Error)]
pub enum Error {
    /// Not enough coordinates to hold the requested number of orthogonal codewords.
    #[error("dimension deficit: {needed} codewords need at least {needed} coordinates, only {available} available")]
    DimensionDeficit { needed: usize, available: usize },

    /// A parameter lies outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("mismatched arms: {0}")]
    MismatchedArms(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by user-supplied configuration rather than a runtime failure.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Domain(_)
                | Error::DimensionDeficit { .. }
                | Error::MismatchedArms(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
