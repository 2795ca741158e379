use std::path::PathBuf;

use thiserror::Error;

use crate::model::Attribute;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{attribute} score is undefined for an empty set of samples")]
    ScoreUndefined { attribute: Attribute },

    #[error("insufficient data for {what}: need at least {needed}, got {got}")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("sample id must not be empty{}", line_suffix(*.line))]
    EmptyId { line: Option<usize> },

    #[error("duplicate sample id {id:?}{}", line_suffix(*.line))]
    DuplicateId { id: String, line: Option<usize> },

    #[error(
        "unknown label {label:?} on line {line} (expected \"vulnerable\" or \"non_vulnerable\")"
    )]
    UnknownLabel { line: usize, label: String },

    #[error("malformed record on line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot sample {requested} items from {available} candidates")]
    SampleTooLarge { requested: usize, available: usize },

    #[error("review entry {id:?} has an unset rater verdict")]
    UnsetVerdict { id: String },

    #[error("review entry {id:?} is not adjudicated")]
    Unadjudicated { id: String },

    #[error("unknown sample id {0:?}")]
    UnknownId(String),

    #[error("input lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn line_suffix(line: Option<usize>) -> String {
    match line {
        Some(line) => format!(" on line {line}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
