//! Crate-wide error type.
//!
//! Variants are grouped so the CLI can map them onto distinct exit codes:
//! configuration problems, data/format problems, and numeric failures.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DafError {
    #[error("{op}: incompatible shapes {lhs:?} and {rhs:?}")]
    ShapeMismatch {
        op: &'static str,
        lhs: Vec<usize>,
        rhs: Vec<usize>,
    },

    #[error("{op}: invalid argument: {detail}")]
    InvalidArgument { op: &'static str, detail: String },

    #[error("softmax: row {row} has every position masked")]
    AllMasked { row: usize },

    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    #[error("{0}: empty input")]
    EmptyInput(&'static str),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("training diverged at epoch {epoch}, batch {batch}: {detail}")]
    Diverged {
        epoch: usize,
        batch: usize,
        detail: String,
    },

    #[error("gradient check: function is not deterministic ({first} vs {second})")]
    NonDeterministic { first: f64, second: f64 },

    #[error("gradient check failed: {0}")]
    GradCheckFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl DafError {
    /// True for errors that signal a numeric failure (as opposed to bad
    /// configuration or malformed data).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            DafError::NonFinite { .. }
                | DafError::AllMasked { .. }
                | DafError::Diverged { .. }
                | DafError::NonDeterministic { .. }
                | DafError::GradCheckFailed(_)
                | DafError::UndefinedMetric(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, DafError>;
