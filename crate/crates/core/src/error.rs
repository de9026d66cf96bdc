use thiserror::Error;

use crate::decomposition::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid system: {0}")]
    InvalidSystem(ValidationReport),

    #[error("invalid grammar: {}", .0.join("; "))]
    InvalidGrammar(Vec<String>),

    #[error("{0}")]
    Input(String),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("resource cap exceeded: {what} (limit {limit})")]
    ResourceCap { what: &'static str, limit: usize },

    #[error("no stabilization: {0}")]
    NonStabilization(String),

    #[error("inconsistent input: {0}")]
    Inconsistent(String),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ResourceCap { .. } => 4,
            Error::NonStabilization(_) => 3,
            _ => 1,
        }
    }

    pub(crate) fn cap(what: &'static str, limit: usize) -> Self {
        Error::ResourceCap { what, limit }
    }
}
