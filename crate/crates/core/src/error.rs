//! Crate-wide error type with the categories the CLI maps to exit codes.

use std::path::PathBuf;

/// Errors produced by simulator, reward, pipeline and harness operations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument violated an operation precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A caller broke an internal protocol (e.g. stepping a terminated world,
    /// reading an unannotated reward).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// A configuration file or section failed validation.
    #[error("configuration error: {0}")]
    Config(String),

    /// The replay buffer is full and holds no annotated transition to evict.
    #[error("buffer backpressure: no ready transition to evict")]
    Backpressure,

    /// The learner asked for more ready transitions than the buffer holds.
    #[error("insufficient data: wanted {wanted} ready transitions, have {available}")]
    InsufficientData { wanted: usize, available: usize },

    /// A checkpoint file required by an eval run is missing or unreadable.
    #[error("missing checkpoint: {0}")]
    MissingCheckpoint(PathBuf),

    /// Two reports cannot be compared (different seeds or step budgets).
    #[error("invalid comparison: {0}")]
    InvalidComparison(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable process exit code for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) => 2,
            Error::Config(_) => 3,
            Error::ContractViolation(_) => 4,
            Error::Backpressure => 5,
            Error::InsufficientData { .. } => 6,
            Error::MissingCheckpoint(_) => 7,
            Error::InvalidComparison(_) => 8,
            Error::Io(_) => 9,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
