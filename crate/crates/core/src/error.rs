use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: malformed event: {reason}")]
    Parse { line: usize, reason: String },

    #[error("line {line}: timestamp {t} is earlier than the previous event ({prev})")]
    Ordering { line: usize, t: u64, prev: u64 },

    #[error("event ({x}, {y}) lies outside the {width}x{height} sensor")]
    OutOfSensor { x: u32, y: u32, width: u32, height: u32 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("requantized value {value} does not fit in 16 bits")]
    LutOverflow { value: i64 },

    #[error("requantization multiplier {0} is outside the representable range")]
    Multiplier(f64),

    #[error("{numerator} ns is not divisible by {denominator} ns; refusing to truncate")]
    Inexact { numerator: u64, denominator: u64 },

    #[error("channels cannot be compared: {0}")]
    Comparison(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json { path: path.into(), source }
    }
}
