use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid mode identifier `{0}` (expected 1, 2 or c)")]
    InvalidMode(String),
    #[error("state {0} is not part of the truncated basis")]
    MissingLabel(String),
    #[error("unitarity drift {drift:.3e} exceeds tolerance; retry with dt <= {suggested_dt:.3e} ns")]
    Integration { drift: f64, suggested_dt: f64 },
    #[error("fit failed: {0}")]
    FitFailed(String),
    #[error("extraction unreliable: subspace norm {0:.4} is below 3.5")]
    ExtractionUnreliable(f64),
    #[error("undefined result: {0}")]
    Undefined(String),
    #[error("solver did not converge: {0}")]
    NoConvergence(String),
    #[error("no root: {0}")]
    NoRoot(String),
}

pub type Result<T> = std::result::Result<T, Error>;
