use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::ingestion::FetchSummary;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad category of an error, used to pick HTTP statuses and exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// The request was malformed or violated a precondition.
    Invalid,
    /// The referenced entity does not exist.
    NotFound,
    /// The request conflicts with current state.
    Conflict,
    /// Storage, transport or other server-side failure.
    Server,
}

#[derive(Debug, Error)]
pub enum Error {
    // ontology
    #[error("label or synonym {0:?} already belongs to another concept")]
    DuplicateLabel(String),
    #[error("concept label is empty after normalization")]
    InvalidLabel,
    #[error("unknown concept {0}")]
    UnknownConcept(u64),
    #[error("relation endpoints are the same concept {0}")]
    SelfLoop(u64),
    #[error("relation weight {0} outside (0, 1]")]
    InvalidWeight(f64),
    #[error("concept {id} cannot move from {from} to {to}")]
    InvalidTransition {
        id: u64,
        from: &'static str,
        to: &'static str,
    },
    #[error("snapshot {path} is corrupt: {reason}")]
    CorruptSnapshot { path: PathBuf, reason: String },
    #[error("i/o failure on {path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    // enrichment queue
    #[error("no candidate {0:?} in the queue")]
    UnknownCandidate(String),
    #[error("candidate {0:?} was already resolved")]
    AlreadyResolved(String),

    // ingestion
    #[error("document has neither text nor DOI")]
    EmptyDocument,
    #[error("limit must be at least 1")]
    InvalidLimit,
    #[error("source unavailable after {} fetched, {} ingested: {reason}", summary.fetched, summary.ingested)]
    SourceUnavailable { summary: FetchSummary, reason: String },
    #[error("unknown document {0}")]
    UnknownDocument(u64),
    #[error("document {0} is already purged")]
    AlreadyPurged(u64),
    #[error("document {0} has no stored full text")]
    NoFullText(u64),
    #[error("full text of document {0} was purged")]
    Purged(u64),

    // search
    #[error("metadata search needs at least one filter")]
    NoFilter,
    #[error("query is empty")]
    EmptyQuery,

    // evaluation
    #[error("count {0} is negative")]
    NegativeCount(i64),
    #[error("relevant retrieved {g_r} exceeds retrieved {n}")]
    GExceedsN { g_r: i64, n: i64 },
    #[error("total relevant G must be at least 1, got {0}")]
    InvalidG(i64),
    #[error("{what} = {value} is out of range")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("no relevance judgments for query {0:?}")]
    MissingJudgment(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("compared runs cover different queries: {0}")]
    QuerySetMismatch(String),
    #[error("no judged query has G = {0}")]
    GMismatch(u64),

    #[error("parse error in {source_name} line {line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Every code [`Error::code`] can return.
pub const ERROR_CODES: &[&str] = &[
    "DuplicateLabel",
    "InvalidLabel",
    "UnknownConcept",
    "SelfLoop",
    "InvalidWeight",
    "InvalidTransition",
    "CorruptSnapshot",
    "IoFailure",
    "UnknownCandidate",
    "AlreadyResolved",
    "EmptyDocument",
    "InvalidLimit",
    "SourceUnavailable",
    "UnknownDocument",
    "AlreadyPurged",
    "NoFullText",
    "Purged",
    "NoFilter",
    "EmptyQuery",
    "NegativeCount",
    "GExceedsN",
    "InvalidG",
    "OutOfRange",
    "MissingJudgment",
    "InvariantViolation",
    "QuerySetMismatch",
    "GMismatch",
    "ParseError",
    "ConfigError",
];

impl Error {
    pub fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        Error::IoFailure {
            path: path.as_ref().to_path_buf(),
            source,
        }
    }

    pub fn corrupt(path: impl AsRef<Path>, reason: impl Into<String>) -> Self {
        Error::CorruptSnapshot {
            path: path.as_ref().to_path_buf(),
            reason: reason.into(),
        }
    }

    pub fn parse(source_name: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.into(),
            line,
            message: message.into(),
        }
    }

    /// Stable machine-readable name of the error.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DuplicateLabel(_) => "DuplicateLabel",
            Error::InvalidLabel => "InvalidLabel",
            Error::UnknownConcept(_) => "UnknownConcept",
            Error::SelfLoop(_) => "SelfLoop",
            Error::InvalidWeight(_) => "InvalidWeight",
            Error::InvalidTransition { .. } => "InvalidTransition",
            Error::CorruptSnapshot { .. } => "CorruptSnapshot",
            Error::IoFailure { .. } => "IoFailure",
            Error::UnknownCandidate(_) => "UnknownCandidate",
            Error::AlreadyResolved(_) => "AlreadyResolved",
            Error::EmptyDocument => "EmptyDocument",
            Error::InvalidLimit => "InvalidLimit",
            Error::SourceUnavailable { .. } => "SourceUnavailable",
            Error::UnknownDocument(_) => "UnknownDocument",
            Error::AlreadyPurged(_) => "AlreadyPurged",
            Error::NoFullText(_) => "NoFullText",
            Error::Purged(_) => "Purged",
            Error::NoFilter => "NoFilter",
            Error::EmptyQuery => "EmptyQuery",
            Error::NegativeCount(_) => "NegativeCount",
            Error::GExceedsN { .. } => "GExceedsN",
            Error::InvalidG(_) => "InvalidG",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::MissingJudgment(_) => "MissingJudgment",
            Error::InvariantViolation(_) => "InvariantViolation",
            Error::QuerySetMismatch(_) => "QuerySetMismatch",
            Error::GMismatch(_) => "GMismatch",
            Error::Parse { .. } => "ParseError",
            Error::Config(_) => "ConfigError",
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::UnknownConcept(_)
            | Error::UnknownCandidate(_)
            | Error::UnknownDocument(_)
            | Error::MissingJudgment(_) => ErrorClass::NotFound,
            Error::DuplicateLabel(_)
            | Error::InvalidTransition { .. }
            | Error::AlreadyResolved(_)
            | Error::AlreadyPurged(_)
            | Error::NoFullText(_)
            | Error::Purged(_) => ErrorClass::Conflict,
            Error::CorruptSnapshot { .. } | Error::IoFailure { .. } | Error::SourceUnavailable { .. } => {
                ErrorClass::Server
            }
            _ => ErrorClass::Invalid,
        }
    }
}
