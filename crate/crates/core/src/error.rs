use std::path::PathBuf;
use std::sync::Arc;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad arguments or configuration.
    Usage,
    /// Input data failed validation.
    Data,
    /// A numerical routine could not produce a trustworthy answer.
    Numerical,
}

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("eigensolver did not converge for a matrix of order {order} (off-diagonal residual {residual:.3e})")]
    EigenNonConvergence { order: usize, residual: f64 },

    #[error("matrix is not positive semidefinite: smallest eigenvalue {min:.6e} below -1e-8 * {max:.6e}")]
    NotPositiveSemidefinite { min: f64, max: f64 },

    #[error("shifted matrix of order {order} is not positive definite (Cholesky pivot {pivot} failed)")]
    NotPositiveDefinite { order: usize, pivot: usize },

    #[error("covariate column {column} is linearly dependent on the preceding columns")]
    RankDeficient { column: usize },

    #[error("cannot sample {requested} {what} from {available}")]
    Oversample { what: &'static str, requested: usize, available: usize },

    #[error("signal vector is identically zero")]
    ZeroSignal,

    #[error("diagnostic refused: {0}")]
    PreconditionUnmet(String),

    #[error("{path}: row {row}, column {col}: {reason}")]
    InvalidCell { path: PathBuf, row: usize, col: usize, reason: String },

    #[error("{path}: row {row} has {found} fields, expected {expected}")]
    RaggedRow { path: PathBuf, row: usize, expected: usize, found: usize },

    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: Arc<std::io::Error>,
    },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter { .. } | Error::PreconditionUnmet(_) => ErrorKind::Usage,
            Error::EigenNonConvergence { .. }
            | Error::NotPositiveSemidefinite { .. }
            | Error::NotPositiveDefinite { .. } => ErrorKind::Numerical,
            _ => ErrorKind::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source: Arc::new(source) }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
