use std::path::PathBuf;

use crate::corpus::EntityId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A malformed data row. `line` is 1-based and counts the header.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },

    #[error("{path}: {message}")]
    Format { path: String, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("unknown {} `{}`", .0.kind(), .0.id())]
    UnknownEntity(EntityId),

    #[error("knee detection needs at least 3 users, got {0}")]
    TooFewUsers(usize),

    #[error("cannot build a text index from an empty document collection")]
    EmptyIndex,

    #[error("corpus has no interactions")]
    EmptyCorpus,

    #[error("no evaluated targets for {0}")]
    NoTargets(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("config not found: {}", .0.display())]
    ConfigNotFound(PathBuf),

    #[error("{scenario}/{method} target `{target}`: {source}")]
    Cell {
        scenario: String,
        method: String,
        target: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
