use thiserror::Error;

/// Failures reported by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("grids do not match")]
    GridMismatch,
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("cannot bound the wrapped-kernel tail: {0}")]
    UnboundedTail(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("constraint projection failed: {0}")]
    Projection(String),
    #[error("diverged after {iterations} iterations: {reason}")]
    Divergence {
        iterations: usize,
        reason: String,
        energy_trace: Vec<f64>,
    },
    #[error("step size: {0}")]
    StepSize(String),
    #[error("out of scope: {0}")]
    OutOfScope(String),
}

pub type Result<T> = std::result::Result<T, Error>;
