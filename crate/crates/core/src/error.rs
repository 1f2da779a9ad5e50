use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the alignment library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("ragged row at line {line}: expected {expected} columns, found {found}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("non-numeric cell at line {line}, column {column}: {value:?}")]
    NonNumeric {
        line: usize,
        column: usize,
        value: String,
    },
    #[error("malformed csv at line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("invalid time series: {0}")]
    InvalidSeries(String),
    #[error("invalid alignment path: {0}")]
    InvalidPath(String),
    #[error("unknown generator kind {0:?}")]
    UnknownKind(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("vertex {0} has zero degree")]
    IsolatedVertex(usize),
    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("operator norm {norm} exceeds 1; dyadic powers would diverge")]
    OperatorNorm { norm: f64 },
    #[error("not enough non-trivial eigenvectors: wanted {wanted}, found {found}")]
    NotEnoughEigenvectors { wanted: usize, found: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable identifier for diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "E_IO",
            Error::RaggedRow { .. } => "E_RAGGED_ROW",
            Error::NonNumeric { .. } => "E_NON_NUMERIC",
            Error::Csv { .. } => "E_CSV",
            Error::InvalidSeries(_) => "E_INVALID_SERIES",
            Error::InvalidPath(_) => "E_INVALID_PATH",
            Error::UnknownKind(_) => "E_UNKNOWN_KIND",
            Error::DimensionMismatch(_) => "E_DIMENSION",
            Error::OutOfRange(_) => "E_OUT_OF_RANGE",
            Error::IsolatedVertex(_) => "E_ISOLATED_VERTEX",
            Error::Disconnected { .. } => "E_DISCONNECTED",
            Error::OperatorNorm { .. } => "E_OPERATOR_NORM",
            Error::NotEnoughEigenvectors { .. } => "E_EIGEN",
        }
    }
}
