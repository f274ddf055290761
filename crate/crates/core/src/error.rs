use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported bandwidth {requested} kHz; supported values are 186, 264, 342, 420, 498, 576, 654, 732")]
    UnsupportedBandwidth { requested: u32 },

    #[error("unsupported decimation factor {factor}; must be in 1..=7")]
    UnsupportedDecimation { factor: usize },

    #[error("equiripple design did not converge after {iterations} iterations (last ripple {last_ripple:e})")]
    DesignFailure { iterations: usize, last_ripple: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input")]
    EmptyInput,

    #[error("empty active band set")]
    EmptyBandSet,

    #[error("capacity mismatch: expected {expected} items, got {actual}")]
    CapacityMismatch { expected: usize, actual: usize },

    #[error("pilot pattern {pattern} is not used at {bandwidth_khz} kHz")]
    PatternNotInFrame { pattern: String, bandwidth_khz: u32 },

    #[error("resource grid corrupted: {0}")]
    Corruption(String),

    #[error("length {length} is not a multiple of block size {block}")]
    BlockLength { length: usize, block: usize },

    #[error("synchronization failed: no correlation peak above threshold (best metric {best_metric:.3})")]
    SyncNotFound { best_metric: f64 },

    #[error("channel estimation failed: every pilot erased")]
    EstimationFailure,

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("frequency interval [{f1}, {f2}] Hz lies outside the spectrum span [{lo}, {hi}] Hz")]
    OutOfSpan { f1: f64, f2: f64, lo: f64, hi: f64 },

    #[error("signal too short: need at least {needed} samples, got {actual}")]
    TooShort { needed: usize, actual: usize },

    #[error("cyclic prefix ({cp} samples) shorter than channel delay spread ({delay} samples)")]
    CyclicPrefixTooShort { cp: usize, delay: usize },

    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}
