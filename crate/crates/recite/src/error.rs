//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("corpus line {line}: malformed record: {message}")]
    MalformedRecord { line: usize, message: String },

    #[error("corpus line {line}: unparseable date {value:?} (expected YYYY-MM-DD)")]
    BadDate { line: usize, value: String },

    #[error("duplicate article id {id:?} (lines {first_line} and {dup_line})")]
    DuplicateArticle {
        id: String,
        first_line: usize,
        dup_line: usize,
    },

    #[error("unknown article id {0:?}")]
    UnknownArticle(String),

    #[error("empty pattern")]
    EmptyPattern,

    #[error("pattern length must be at least 1")]
    ZeroPatternLength,

    #[error("no value for placeholder {{{0}}}")]
    MissingPlaceholder(String),

    #[error("summary must be non-empty")]
    EmptySummary,

    #[error("article body must be non-empty")]
    EmptyBody,

    #[error("target sentence {index} of article {article_id:?} is not qualified")]
    UnqualifiedTarget { article_id: String, index: usize },

    #[error("target index {index} exceeds sentence count {count}")]
    TargetOutOfRange { index: usize, count: usize },

    #[error("cannot summarize an empty round")]
    EmptyRound,

    #[error("round config invalid: {0}")]
    BadRoundConfig(String),

    #[error("invalid generation params: {0}")]
    BadParams(String),

    #[error("no post-cutoff articles for baseline run")]
    EmptyBaseline,

    #[error("no usable summary for article {0:?} after retries")]
    SummaryUnavailable(String),

    #[error("quote control unavailable for article {0:?}: model refused")]
    ControlUnavailable(String),

    #[error("provider error (status {status}): {body}")]
    Provider { status: u16, body: String },

    #[error("provider retries exhausted after {attempts} attempts: {last}")]
    RetriesExhausted { attempts: usize, last: String },

    #[error("transport error: {0}")]
    Transport(String),

    #[error("run aborted: {0}")]
    Aborted(String),

    #[error("{0}")]
    Other(String),
}

pub type Result<T> = std::result::Result<T, Error>;
