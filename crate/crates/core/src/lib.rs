//! Physics-informed neural networks for steady laminar flow in a Y-shaped
//! mixer, with an optional variational quantum layer.

pub mod autodiff;
pub mod cli;
pub mod geometry;
pub mod network;
pub mod optim;
pub mod physics;
pub mod quantum;
pub mod export;
pub mod trainer;
