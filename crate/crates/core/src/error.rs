use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index arity {got} does not match {expected} variables")]
    Arity { expected: usize, got: usize },

    #[error("point {norm:.6} lies outside the domain with margin {margin}")]
    Domain { norm: f64, margin: f64 },

    #[error("series truncated at {terms} terms leaves tail bound {bound:e} above tolerance {tolerance:e}")]
    Truncation {
        terms: usize,
        bound: f64,
        tolerance: f64,
    },

    #[error("moment for index {index:?} is not available: {reason}")]
    MissingMoment { index: Vec<u32>, reason: String },

    #[error("invalid moment table: {0}")]
    InvalidMoments(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{method} is not available here: {reason}")]
    Method {
        method: &'static str,
        reason: String,
    },

    #[error("curvature {curvature} is non-negative, h is undefined")]
    InvariantUndefined { curvature: f64 },

    #[error("frame Grammian is singular at the requested point")]
    FrameDegenerate,

    #[error("curvature paths disagree: {discrepancy:e} exceeds {tolerance:e}")]
    CrossCheck { discrepancy: f64, tolerance: f64 },

    #[error("numerical rank is ambiguous: singular value gap {gap:e} below required {required:e}")]
    Precision { gap: f64, required: f64 },

    #[error("truncation degree {degree} is below the required {required}")]
    DegreeCap { degree: u32, required: u32 },

    #[error("finite differences did not stabilise by k = {k_max}")]
    Inconclusive { k_max: usize },

    #[error("matrix has operator norm {norm} > 1")]
    NotContraction { norm: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("i/o: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
