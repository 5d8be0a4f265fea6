use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0} vs {1}")]
    GridMismatch(usize, usize),
    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("quadrature did not reach tolerance {tol:e} (estimate {estimate:e}, error {error:e})")]
    Quadrature { tol: f64, estimate: f64, error: f64 },
    #[error("contraction failed at t = {t}: ratio {ratio}, window {window}")]
    ContractionFailed { t: f64, ratio: f64, window: f64 },
    #[error("norm overflow at t = {t}: {norm:e}")]
    NormOverflow { t: f64, norm: f64 },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
