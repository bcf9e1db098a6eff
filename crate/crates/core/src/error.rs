use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid image dimensions {width}x{height} for {len} samples")]
    InvalidDimensions {
        width: usize,
        height: usize,
        len: usize,
    },
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("malformed header in {path}: {reason}")]
    MalformedHeader { path: PathBuf, reason: String },
    #[error("truncated payload in {path}: expected {expected} samples, found {found}")]
    TruncatedPayload {
        path: PathBuf,
        expected: usize,
        found: usize,
    },
    #[error("unsupported bit depth in {path}: {depth}")]
    UnsupportedBitDepth { path: PathBuf, depth: String },
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("png decoding failed: {0}")]
    Png(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(String),

    #[error("window side length must be odd and at least 3, got {0}")]
    InvalidWindow(usize),
    #[error("empty pixel region")]
    EmptyRegion,
    #[error("region pixel ({x}, {y}) outside {width}x{height} image")]
    OutOfBounds {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },
    #[error("background ring is empty after clipping")]
    EmptyRing,
    #[error("target masks {0} and {1} overlap")]
    OverlappingTargets(usize, usize),
    #[error("target index {index} out of range for {count} targets")]
    NoSuchTarget { index: usize, count: usize },
    #[error("ground truth has no targets")]
    NoTargets,

    #[error("background standard deviation is zero; SCR is undefined")]
    FlatBackground,
    #[error("map is constant; no valid threshold exists")]
    ConstantMap,
    #[error("iterative threshold did not converge within {0} iterations")]
    NonConvergence(usize),
    #[error("thresholds must be strictly descending")]
    UnsortedThresholds,
    #[error("largest admissible control parameter is not positive ({0})")]
    NonPositiveKMax(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
