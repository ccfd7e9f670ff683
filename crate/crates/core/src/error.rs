use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("radial integrator produced a non-finite value at r = {radius} (lambda = {lambda}); use a finer grid")]
    IntegratorInstability { lambda: f64, radius: f64 },

    #[error("no sign change of u'(1; lambda) in (0, {bracket_hi}] for dim = {dim}; enlarge the bracket")]
    BracketTooSmall { dim: usize, bracket_hi: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("line search failed to decrease the objective after {iterations} iterations (residual {residual:e}); the state may be under-resolved, try a finer grid")]
    StepSizeFailure { iterations: usize, residual: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
