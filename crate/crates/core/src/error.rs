//! Error type shared across the crate, with the CLI exit-code mapping.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A Cholesky pivot fell at or below the positive-definiteness
    /// threshold. Carries the zero-based pivot index.
    #[error("matrix not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    /// All responses identical; the maximum-likelihood estimate diverges.
    #[error("degenerate response: every value equals {value}")]
    DegenerateResponse { value: f64 },

    #[error("leverage numerically one for row {row} (h = {leverage})")]
    LeverageAtOne { row: usize, leverage: f64 },

    #[error("zero standard error for nonzero coefficient {index}")]
    ZeroStandardError { index: usize },

    #[error("reference sigma is zero at index {index}")]
    ZeroSigma { index: usize },

    #[error("sample {value} at index {index} outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("missing column: {0}")]
    MissingColumn(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("too many failed resamples: {failed} of {total}")]
    TooManyFailures { failed: usize, total: usize },

    #[error("solver did not converge: {0}")]
    SolverFailure(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl Error {
    /// CLI exit code: 1 for usage/configuration errors, 2 for data errors,
    /// 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) => 1,
            Error::DimensionMismatch(_)
            | Error::DegenerateResponse { .. }
            | Error::OutOfRange { .. }
            | Error::Parse { .. }
            | Error::MissingColumn(_)
            | Error::EmptyDataset
            | Error::Io { .. } => 2,
            Error::NotPositiveDefinite { .. }
            | Error::LeverageAtOne { .. }
            | Error::ZeroStandardError { .. }
            | Error::ZeroSigma { .. }
            | Error::TooManyFailures { .. }
            | Error::SolverFailure(_) => 3,
        }
    }
}
