use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Record { line: usize, message: String },

    #[error("duplicate id {id:?} at line {line}")]
    DuplicateId { id: String, line: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("tweets without hate_score: {}", .0.join(", "))]
    MissingHateScore(Vec<String>),

    #[error("tweets without category label: {}", .0.join(", "))]
    MissingCategory(Vec<String>),

    #[error("degenerate prior for word {word:?}: non-positive denominator")]
    DegeneratePrior { word: String },

    #[error("empty vocabulary after min_count pruning")]
    EmptyVocabulary,

    #[error("embedding for tweet {tweet:?} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        tweet: String,
        expected: usize,
        found: usize,
    },

    #[error("day {day} outside window [0, {end}]")]
    DayOutOfWindow { day: i64, end: u32 },

    #[error("segment has {0} points, need at least 2")]
    ShortSegment(usize),

    #[error("config: {0}")]
    Config(String),

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
