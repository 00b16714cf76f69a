//! Crate-wide error type with CLI exit-code mapping.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A keyword normalized to the empty string.
    #[error("rejected keyword: {0:?} is empty after normalization")]
    RejectedKeyword(String),

    /// A choice was ingested without any context keywords.
    #[error("choice {choice_id:?} in domain {domain_id:?} has no keywords")]
    ChoiceWithoutKeywords { domain_id: String, choice_id: String },

    #[error("duplicate choice id {choice_id:?} in domain {domain_id:?}")]
    DuplicateChoice { domain_id: String, choice_id: String },

    /// Catalogs need at least two choices for any ranking to be non-trivial.
    #[error("domain {domain_id:?} has {m} choices, need at least 2")]
    CatalogTooSmall { domain_id: String, m: usize },

    #[error("action references choice index {index} but catalog {domain_id:?} has {m} choices")]
    ChoiceIndexOutOfRange { domain_id: String, index: usize, m: usize },

    /// Sequences shorter than two actions carry no first-order signal.
    #[error("sequence for user {user_id:?} in domain {domain_id:?} has {n} actions, need at least 2 to fit")]
    Unfittable { user_id: String, domain_id: String, n: usize },

    #[error("line {line}: {message}")]
    LogParse { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty history: cannot score next items without context")]
    EmptyHistory,

    #[error("no fitted model available for method {0:?}")]
    MissingModel(String),

    #[error("unknown method {0:?}")]
    UnknownMethod(String),

    #[error("unknown domain {0:?} in store")]
    UnknownDomain(String),

    #[error("embedding table: {0}")]
    Embedding(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// CLI exit code: 1 usage error, 2 data error, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::UnknownMethod(_) | Error::InvalidConfig(_) => 1,
            Error::Numerical(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
