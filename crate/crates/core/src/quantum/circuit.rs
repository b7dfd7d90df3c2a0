//! Variational circuit description and execution.

use serde::{Deserialize, Serialize};

use super::{QuantumError, StateVector};
use crate::autodiff::Real;

/// An `R_y` gate whose angle is taken from the feature or parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rotation {
    pub qubit: usize,
    pub index: usize,
}

/// One data-reuploading block: encoding rotations, variational rotations,
/// then CNOT entanglers, applied in that order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub encoding: Vec<Rotation>,
    pub variational: Vec<Rotation>,
    /// `(control, target)` pairs.
    pub entanglers: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub n_qubits: usize,
    pub n_features: usize,
    pub n_params: usize,
    pub blocks: Vec<Block>,
    /// Qubits read out with `⟨Z⟩`, in output order.
    pub readout: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleSource {
    Feature(usize),
    Param(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Ry { qubit: usize, angle: AngleSource },
    Cnot { control: usize, target: usize },
}

impl CircuitSpec {
    /// `n_blocks` blocks on `n_qubits` qubits. Block `b` encodes features
    /// `b·n .. (b+1)·n` (one per qubit), applies one trainable rotation per
    /// qubit, then a CNOT ring `0→1→…→n−1→0`. Every qubit is read out.
    pub fn reuploading(n_qubits: usize, n_blocks: usize) -> Self {
        let ring: Vec<(usize, usize)> = match n_qubits {
            0 | 1 => Vec::new(),
            2 => vec![(0, 1)],
            n => (0..n).map(|q| (q, (q + 1) % n)).collect(),
        };
        let blocks = (0..n_blocks)
            .map(|b| Block {
                encoding: (0..n_qubits)
                    .map(|q| Rotation { qubit: q, index: b * n_qubits + q })
                    .collect(),
                variational: (0..n_qubits)
                    .map(|q| Rotation { qubit: q, index: b * n_qubits + q })
                    .collect(),
                entanglers: ring.clone(),
            })
            .collect();
        Self {
            n_qubits,
            n_features: n_qubits * n_blocks,
            n_params: n_qubits * n_blocks,
            blocks,
            readout: (0..n_qubits).collect(),
        }
    }

    /// The circuit used by the hybrid model: 4 qubits, 4 blocks, 16 features,
    /// 16 variational angles, 4 readouts.
    pub fn hybrid_default() -> Self {
        Self::reuploading(4, 4)
    }

    pub fn validate(&self) -> Result<(), QuantumError> {
        let bad = |msg: String| Err(QuantumError::InvalidSpec(msg));
        if self.n_qubits == 0 || self.n_qubits > super::state::MAX_QUBITS {
            return Err(QuantumError::RegisterSize(self.n_qubits));
        }
        let mut feature_seen = vec![0usize; self.n_features];
        let mut param_seen = vec![0usize; self.n_params];
        for (b, block) in self.blocks.iter().enumerate() {
            for r in &block.encoding {
                if r.qubit >= self.n_qubits {
                    return bad(format!("block {b}: encoding qubit {} out of range", r.qubit));
                }
                match feature_seen.get_mut(r.index) {
                    Some(c) => *c += 1,
                    None => return bad(format!("block {b}: feature index {} out of range", r.index)),
                }
            }
            for r in &block.variational {
                if r.qubit >= self.n_qubits {
                    return bad(format!("block {b}: variational qubit {} out of range", r.qubit));
                }
                match param_seen.get_mut(r.index) {
                    Some(c) => *c += 1,
                    None => return bad(format!("block {b}: parameter index {} out of range", r.index)),
                }
            }
            for &(c, t) in &block.entanglers {
                if c >= self.n_qubits || t >= self.n_qubits || c == t {
                    return bad(format!("block {b}: invalid CNOT ({c}, {t})"));
                }
            }
        }
        if let Some(i) = feature_seen.iter().position(|&c| c != 1) {
            return bad(format!("feature {i} used {} times, expected exactly once", feature_seen[i]));
        }
        if let Some(i) = param_seen.iter().position(|&c| c != 1) {
            return bad(format!("parameter {i} used {} times, expected exactly once", param_seen[i]));
        }
        if self.readout.is_empty() || self.readout.iter().any(|&q| q >= self.n_qubits) {
            return bad(format!("invalid readout {:?}", self.readout));
        }
        Ok(())
    }

    /// Flattened gate sequence.
    pub fn gates(&self) -> Vec<Gate> {
        let mut gates = Vec::new();
        for block in &self.blocks {
            gates.extend(block.encoding.iter().map(|r| Gate::Ry {
                qubit: r.qubit,
                angle: AngleSource::Feature(r.index),
            }));
            gates.extend(block.variational.iter().map(|r| Gate::Ry {
                qubit: r.qubit,
                angle: AngleSource::Param(r.index),
            }));
            gates.extend(
                block
                    .entanglers
                    .iter()
                    .map(|&(control, target)| Gate::Cnot { control, target }),
            );
        }
        gates
    }

    pub(crate) fn check_sizes(&self, features: usize, params: usize) -> Result<(), QuantumError> {
        if features != self.n_features {
            return Err(QuantumError::SizeMismatch {
                what: "features",
                expected: self.n_features,
                got: features,
            });
        }
        if params != self.n_params {
            return Err(QuantumError::SizeMismatch {
                what: "parameters",
                expected: self.n_params,
                got: params,
            });
        }
        Ok(())
    }
}

/// Final state of the circuit started from `|0…0⟩`.
pub fn prepare_state<S: Real>(spec: &CircuitSpec, features: &[S], params: &[S]) -> Result<StateVector<S>, QuantumError> {
    spec.check_sizes(features.len(), params.len())?;
    let mut state = StateVector::zero_state(spec.n_qubits)?;
    for gate in spec.gates() {
        match gate {
            Gate::Ry { qubit, angle } => {
                let theta = match angle {
                    AngleSource::Feature(i) => features[i],
                    AngleSource::Param(j) => params[j],
                };
                state.apply_ry(qubit, theta)?;
            }
            Gate::Cnot { control, target } => state.apply_cnot(control, target)?,
        }
    }
    Ok(state)
}

/// Run the circuit and return `⟨Z⟩` on each readout qubit.
///
/// Generic over the scalar so derivative payloads pass through every
/// trigonometric gate entry.
pub fn run_circuit<S: Real>(spec: &CircuitSpec, features: &[S], params: &[S]) -> Result<Vec<S>, QuantumError> {
    let state = prepare_state(spec, features, params)?;
    spec.readout.iter().map(|&q| state.expectation_z(q)).collect()
}
