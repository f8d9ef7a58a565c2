use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("time integration blew up at step {step} (t = {time})")]
    BlowUp { step: u64, time: f64 },

    #[error("no critical forcing found for F in [{lo}, {hi}]")]
    NotFound { lo: f64, hi: f64 },

    #[error("localized solution does not exist: {0}")]
    Existence(String),

    #[error("singular reduction: {0}")]
    SingularReduction(String),

    #[error("Newton failed to converge after {iterations} iterations (residual {residual:e})")]
    Divergence { iterations: usize, residual: f64 },

    #[error("continuation stalled at parameter {parameter} (step {step:e})")]
    Stalled { parameter: f64, step: f64 },

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),
}

pub type Result<T> = std::result::Result<T, Error>;
