use std::path::PathBuf;

use thiserror::Error;

use crate::survival::EstimatorMode;

pub type Result<T> = std::result::Result<T, SizerError>;

#[derive(Debug, Error)]
pub enum SizerError {
    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("{mode} mode requires uncensored data, found {censored} censored observation(s)")]
    CensoredInput {
        mode: EstimatorMode,
        censored: usize,
    },

    #[error("every observation weight is zero ({dropped} dropped for a zero denominator)")]
    ZeroWeights { dropped: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("point {value} lies outside the grid [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
