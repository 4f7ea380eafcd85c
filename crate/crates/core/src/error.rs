use thiserror::Error;

/// Errors raised by field construction, quadrature, and tracing.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("accuracy error: {0}")]
    Accuracy(String),

    #[error("no convergence after {evaluations} evaluations (estimated error {error_estimate:e})")]
    NonConvergence { evaluations: usize, error_estimate: f64 },

    #[error("step size underflow at lambda = {lambda} after {points} points")]
    StepUnderflow { lambda: f64, points: usize },

    #[error("degenerate point: {0}")]
    Degenerate(String),

    #[error("trace never departed from its seed beyond radius {0}")]
    NeverDeparted(f64),

    #[error("traces too close: minimum separation {0:e} below resolution")]
    TracesTooClose(f64),

    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),
}

pub type Result<T> = std::result::Result<T, Error>;
