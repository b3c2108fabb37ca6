use thiserror::Error;

use crate::series::Mode;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mode mismatch: {left} vs {right}")]
    ModeMismatch { left: Mode, right: Mode },

    #[error("division by zero")]
    DivisionByZero,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("solver error: {0}")]
    Solver(String),

    #[error("window of {size} coefficients exceeds the cap of {cap}")]
    WindowTooLarge { size: u64, cap: u64 },

    #[error("stage {stage} failed: {reason}")]
    StageFailed { stage: usize, reason: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
