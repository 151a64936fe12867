use thiserror::Error;

#[derive(Debug, Error)]
pub enum GsgError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("supremum diverges for {what} at index {index}")]
    DivergentSequence { what: &'static str, index: usize },

    #[error("quadrature did not converge at p = {point:?}")]
    Quadrature { point: Vec<f64> },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error("unresolved {kind} reference {name:?}")]
    UnresolvedReference { kind: &'static str, name: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GsgError>;
