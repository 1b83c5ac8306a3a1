use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input shape mismatch: {0}")]
    InputShape(String),

    #[error("invalid frame specification: {0}")]
    InvalidSpec(String),

    #[error("degenerate frame: lower frame bound is zero (upper bound {upper:e})")]
    DegenerateFrame { upper: f64 },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("spectrum of length {len} yields {slices} slice(s); at least two are required")]
    InsufficientLength { len: usize, slices: usize },

    #[error("wrong entry point: {0}")]
    Misuse(String),

    #[error("target of {target} peaks is unattainable; at most {max_count} can be extracted")]
    UnattainableTarget { target: usize, max_count: usize },

    #[error("synthetic generation failed: {0}")]
    Generation(String),

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("malformed container: {0}")]
    Format(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("spot ({row}, {col}): {source}")]
    Spot {
        row: usize,
        col: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the filesystem rather than of the data or parameters.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } => true,
            Error::Spot { source, .. } => source.is_io(),
            _ => false,
        }
    }
}
