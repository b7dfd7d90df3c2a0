//! Statevector simulation of the variational quantum layer.
//!
//! Only `R_y` rotations and CNOTs are used, so starting from `|0…0⟩` every
//! amplitude stays real. The simulator still tracks complex amplitudes; with
//! tape scalars the identically zero imaginary parts fold away as constants.

mod adjoint;
mod circuit;
mod state;

pub use adjoint::{adjoint_gradient, parameter_shift_gradient};
pub use circuit::{prepare_state, run_circuit, AngleSource, Block, CircuitSpec, Gate, Rotation};
pub use state::{Complex, StateVector, MAX_QUBITS};

use crate::autodiff::Real;

/// Map an unbounded trunk feature to an encoding angle, `π · tanh(f)`.
pub fn encode_feature<S: Real>(feature: S) -> S {
    feature.tanh().scale(std::f64::consts::PI)
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum QuantumError {
    #[error("qubit {qubit} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("control and target are both qubit {0}")]
    SameQubit(usize),
    #[error("unsupported register size {0}")]
    RegisterSize(usize),
    #[error("expected {expected} {what}, got {got}")]
    SizeMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid circuit: {0}")]
    InvalidSpec(String),
}
