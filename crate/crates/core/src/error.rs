use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("linear map `{label}` is singular (|det| = {det:e})")]
    Singular { label: String, det: f64 },

    #[error("group too large: closure exceeded cap of {cap} elements")]
    GroupTooLarge { cap: usize },

    #[error(
        "generator `{label}` is not orthogonal; the distribution-free procedure needs orthogonal \
         generators, use the bootstrap procedure (b) instead"
    )]
    NotOrthogonal { label: String },

    #[error("group `{name}` is not a coordinate-permutation group")]
    NotPermutationGroup { name: String },

    #[error("cannot draw uniform group elements: {0}")]
    Symmetrize(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("data error: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
