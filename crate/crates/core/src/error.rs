use std::io;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("input contains non-finite entries")]
    NonFinite,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Krylov subspace too small: {available} columns for target rank {k}")]
    InsufficientSubspace { available: usize, k: usize },

    #[error("starting block is zero")]
    DegenerateStart,

    #[error("reference optimum is zero, relative error undefined")]
    ZeroReference,

    #[error("spectrum is not sorted descending at index {0}")]
    Unsorted(usize),

    #[error("cannot aggregate an empty group")]
    EmptyGroup,

    #[error("matrix market line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Errors caused by the caller's configuration rather than by a failed computation.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::DimensionMismatch { .. }
                | Error::InsufficientSubspace { .. }
                | Error::Unsorted(_)
                | Error::Parse { .. }
        )
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
