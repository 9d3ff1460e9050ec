//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by polynomial arithmetic, domain reductions, SDP
/// assembly/solving, and certificate extraction.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("missing moment entry for {0}")]
    MissingMoment(String),

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("relaxation level t={got} below threshold t>={need}")]
    LevelTooSmall { got: u32, need: u32 },

    #[error("block side {side} exceeds supported maximum {max}")]
    BlockTooLarge { side: usize, max: usize },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("SDPA format error: {0}")]
    Format(String),

    #[error("extraction failed: {0}")]
    ExtractionFailed(String),

    #[error("ambiguous signature: {0}")]
    AmbiguousSignature(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, CoreError>;
