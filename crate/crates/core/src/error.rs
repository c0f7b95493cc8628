use thiserror::Error;

pub type Result<T> = std::result::Result<T, HlsError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HlsError {
    #[error("dimension mismatch: n={left} vs n={right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("lambda out of (0,Q): lambda={lambda}, Q={q}")]
    LambdaOutOfRange { lambda: f64, q: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("function is identically zero")]
    ZeroFunction,

    #[error("profile has negative entries")]
    NegativeProfile,

    #[error("measure is not normalized: total mass {0}")]
    Unnormalized(f64),

    #[error("vanishing-type failure: {0}")]
    Vanishing(String),
}

impl HlsError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        HlsError::InvalidParameter(msg.into())
    }
}
