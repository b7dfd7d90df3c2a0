//! Optimizers over the flat parameter vector.

mod adam;
mod lbfgs;

pub use adam::{AdamConfig, AdamState};
pub use lbfgs::{Evaluation, LbfgsConfig, LbfgsState, StepOutcome, StepStatus};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum OptimError {
    #[error("optimizer holds {expected} parameters, got {params} parameters and {grad} gradient entries")]
    SizeMismatch { expected: usize, params: usize, grad: usize },
    #[error("non-finite gradient entry {0}")]
    NonFiniteGradient(usize),
    #[error("invalid optimizer settings: {0}")]
    InvalidConfig(String),
}
