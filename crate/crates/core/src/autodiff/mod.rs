//! Exact derivatives for the PINN loss.
//!
//! Spatial derivatives ride forward through the network inside
//! [`DiffScalar`] payloads; derivatives with respect to trainable parameters
//! come from a reverse sweep over a [`ParamTape`].

mod dual;
mod scalar;
mod tape;

pub use dual::{seed_spatial, silu, DiffScalar, SPATIAL_DIMS};
pub use scalar::Real;
pub use tape::{Adjoints, ParamTape, Var};

pub(crate) use scalar::logistic;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum AutodiffError {
    #[error("non-finite input coordinate on axis {axis}")]
    NonFiniteInput { axis: usize },
    #[error("loss is not a node recorded on this tape")]
    NotOnTape,
}
