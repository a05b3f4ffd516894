use thiserror::Error;

#[derive(Debug, Error)]
pub enum QlabError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("degenerate twist for mode {0}: q = 1, the normalized trace is undefined")]
    DegenerateTwist(String),
    #[error("index sets overlap")]
    Overlap,
    #[error("not converged: {0}")]
    NotConverged(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, QlabError>;
