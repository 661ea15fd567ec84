use thiserror::Error;

/// Errors raised by the simulation and optimization layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("degenerate state: {0}")]
    DegenerateState(String),

    #[error("{what} = {value} outside [{lo}, {hi}]")]
    OutOfBounds {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numerical blowup at step {step}")]
    NumericalBlowup { step: usize },

    #[error("ground state did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("shape mismatch: expected {expected} samples, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
