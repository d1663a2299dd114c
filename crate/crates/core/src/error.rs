use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: line {line}: malformed record: {reason}")]
    MalformedRecord {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("duplicate document id {id:?} (lines {first_line} and {line})")]
    DuplicateId {
        id: String,
        first_line: usize,
        line: usize,
    },

    #[error("document {doc_id:?}: {reason}")]
    InvalidDocument { doc_id: String, reason: String },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("query {query_id:?} references unknown gold document {doc_id:?}")]
    DanglingGold { query_id: String, doc_id: String },

    #[error("query {query_id:?}: {reason}")]
    InvalidQuery { query_id: String, reason: String },

    #[error("invalid sub-query set: {0}")]
    InvalidSubQuerySet(String),

    #[error("invalid configuration: {field}: {reason}")]
    Config { field: String, reason: String },

    #[error("document {doc_id:?} has embedding of dimension {got}, expected {expected}")]
    DimensionMismatch {
        doc_id: String,
        expected: usize,
        got: usize,
    },

    #[error("no embedding provided for {0:?}")]
    MissingEmbedding(String),

    #[error("ranked list {list}: {reason}")]
    InvalidRankedList { list: usize, reason: String },

    #[error("fusion requires at least one ranked list")]
    NoLists,

    #[error("top_k must be at least 1")]
    ZeroTopK,

    #[error("rank must be at least 1")]
    ZeroRank,

    #[error("gold id set is empty")]
    NoGolds,

    #[error("sub-query set has {got} sub-queries, enumeration cap is {cap}")]
    TooManySubQueries { got: usize, cap: usize },

    #[error("unknown query id {0:?}")]
    UnknownQuery(String),

    #[error("rollout for query {got:?} passed to update of {expected:?}")]
    QueryMismatch { expected: String, got: String },

    #[error("query {0:?} has no candidate sub-query sets")]
    NoCandidates(String),

    #[error("empty rollout batch")]
    NoRollouts,

    #[error("stage II requires a non-empty curriculum")]
    EmptyCurriculum,

    #[error("missing dependency artifact {path}: run `{phase}` first")]
    MissingArtifact { path: PathBuf, phase: &'static str },

    #[error("corrupt artifact {path}: {reason}")]
    CorruptArtifact { path: PathBuf, reason: String },

    #[error("no evaluation artifacts in {0}")]
    NoEvalArtifacts(PathBuf),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Short machine-readable category used by the command-line runner.
    pub fn category(&self) -> &'static str {
        match self {
            Error::MalformedRecord { .. }
            | Error::DuplicateId { .. }
            | Error::EmptyCorpus
            | Error::InvalidDocument { .. }
            | Error::DanglingGold { .. }
            | Error::InvalidQuery { .. }
            | Error::InvalidSubQuerySet(_)
            | Error::DimensionMismatch { .. }
            | Error::MissingEmbedding(_) => "data",
            Error::Config { .. } => "config",
            Error::MissingArtifact { .. } | Error::EmptyCurriculum => "dependency",
            Error::CorruptArtifact { .. } | Error::NoEvalArtifacts(_) => "artifact",
            Error::Io { .. } => "io",
            _ => "invalid-input",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
