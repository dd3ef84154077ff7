use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("linear solve failed: {message} (residual {residual:e})")]
    LinearSolve { message: String, residual: f64 },

    #[error("singular Jacobian: {message}")]
    SingularJacobian { message: String },

    #[error("invalid family specification: {0}")]
    Spec(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
