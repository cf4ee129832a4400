use thiserror::Error;

/// Failure modes shared by every module in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),
    #[error("out of chart: {0}")]
    OutOfChart(String),
    #[error("divergent input: {0}")]
    DivergentInput(String),
    #[error("geometry violation: {0}")]
    GeometryViolation(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("no bound state: {0}")]
    NoBoundState(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),
    #[error("ill-conditioned: {0}")]
    IllConditioned(String),
    #[error("degenerate perturbation: {0}")]
    DegeneratePerturbation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

/// Returns `InvalidArgument` unless `value` is finite and strictly positive.
pub(crate) fn require_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        invalid(format!("{name} must be finite and > 0, got {value}"))
    }
}
