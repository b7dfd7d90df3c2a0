//! Multilayer perceptron trunk and heads.
//!
//! Parameters are stored layer by layer; within a layer the weight matrix
//! comes first (row-major, `out × in`) followed by the bias vector. That
//! order is also the flat-vector order seen by the optimizers and written
//! to checkpoints.

mod batch;
mod checkpoint;
mod model;

pub use batch::{BatchTrace, CHANNELS};
pub use checkpoint::{Architecture, Checkpoint, CheckpointError, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use model::{HybridHead, PinnModel, ANGLE_INIT_RANGE};

use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{DiffScalar, Real};

/// Hidden width of the trunk.
pub const HIDDEN_WIDTH: usize = 64;
/// Number of hidden layers of the trunk.
pub const HIDDEN_LAYERS: usize = 5;
/// Width of the penultimate (feature) layer.
pub const FEATURE_WIDTH: usize = 16;
/// `(v_x, v_y, v_z, p)`
pub const OUTPUT_WIDTH: usize = 4;
pub const INPUT_WIDTH: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Classical,
    Hybrid,
}

impl Variant {
    /// Widths of the MLP part of the variant: the full network for the
    /// classical variant, the trunk ending at the feature layer for the hybrid.
    pub fn mlp_widths(self) -> Vec<usize> {
        let mut w = vec![INPUT_WIDTH];
        w.extend(std::iter::repeat_n(HIDDEN_WIDTH, HIDDEN_LAYERS));
        w.push(FEATURE_WIDTH);
        if self == Variant::Classical {
            w.push(OUTPUT_WIDTH);
        }
        w
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum NetworkError {
    #[error("architecture needs at least two widths, got {0:?}")]
    TooFewLayers(Vec<usize>),
    #[error("zero width in architecture {0:?}")]
    ZeroWidth(Vec<usize>),
    #[error("expected {expected} parameters for widths {widths:?}, got {got}")]
    ParamCount {
        widths: Vec<usize>,
        expected: usize,
        got: usize,
    },
    #[error("network expects {expected} inputs, got {got}")]
    InputWidth { expected: usize, got: usize },
    #[error("non-finite parameter at flat index {0}")]
    NonFinite(usize),
    #[error("architecture mismatch: {0}")]
    Mismatch(String),
}

/// Weights and biases of a fully connected network with SiLU between
/// adjacent layers and a linear output layer.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    widths: Vec<usize>,
    flat: Vec<f64>,
}

pub fn param_count(widths: &[usize]) -> usize {
    widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

fn check_widths(widths: &[usize]) -> Result<(), NetworkError> {
    if widths.len() < 2 {
        return Err(NetworkError::TooFewLayers(widths.to_vec()));
    }
    if widths.contains(&0) {
        return Err(NetworkError::ZeroWidth(widths.to_vec()));
    }
    Ok(())
}

impl MlpParams {
    pub fn from_flat(widths: Vec<usize>, flat: Vec<f64>) -> Result<Self, NetworkError> {
        check_widths(&widths)?;
        let expected = param_count(&widths);
        if flat.len() != expected {
            return Err(NetworkError::ParamCount {
                widths,
                expected,
                got: flat.len(),
            });
        }
        if let Some(i) = flat.iter().position(|w| !w.is_finite()) {
            return Err(NetworkError::NonFinite(i));
        }
        Ok(Self { widths, flat })
    }

    pub fn zeros(widths: Vec<usize>) -> Result<Self, NetworkError> {
        let n = param_count(&widths);
        Self::from_flat(widths, vec![0.0; n])
    }

    /// Glorot-uniform weights (`±sqrt(6 / (fan_in + fan_out))`) and zero
    /// biases, drawn from a ChaCha stream seeded with `seed`.
    pub fn glorot(widths: Vec<usize>, seed: u64) -> Result<Self, NetworkError> {
        check_widths(&widths)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut flat = Vec::with_capacity(param_count(&widths));
        for w in widths.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit).expect("finite Glorot bound");
            flat.extend(dist.sample_iter(&mut rng).take(fan_in * fan_out));
            flat.extend(std::iter::repeat_n(0.0, fan_out));
        }
        Ok(Self { widths, flat })
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn num_layers(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn input_width(&self) -> usize {
        self.widths[0]
    }

    pub fn output_width(&self) -> usize {
        *self.widths.last().expect("validated widths")
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.flat
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.flat
    }

    pub fn len(&self) -> usize {
        self.flat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    /// Replace all parameter values; the architecture is unchanged.
    pub fn set_flat(&mut self, flat: &[f64]) -> Result<(), NetworkError> {
        if flat.len() != self.flat.len() {
            return Err(NetworkError::ParamCount {
                widths: self.widths.clone(),
                expected: self.flat.len(),
                got: flat.len(),
            });
        }
        self.flat.copy_from_slice(flat);
        Ok(())
    }

    /// `(weights, biases)` slices of layer `l`.
    pub fn layer(&self, l: usize) -> (&[f64], &[f64]) {
        let off = self.layer_offset(l);
        let (fan_in, fan_out) = (self.widths[l], self.widths[l + 1]);
        let w = &self.flat[off..off + fan_in * fan_out];
        let b = &self.flat[off + fan_in * fan_out..off + fan_in * fan_out + fan_out];
        (w, b)
    }

    pub fn layer_offset(&self, l: usize) -> usize {
        param_count(&self.widths[..=l])
    }

    /// Per-point forward pass with derivative payloads.
    pub fn forward<T: Real>(&self, input: &[DiffScalar<T>]) -> Result<Vec<DiffScalar<T>>, NetworkError> {
        let weights: Vec<T> = self.flat.iter().map(|&w| T::from_f64(w)).collect();
        forward_with(&self.widths, &weights, input)
    }

    /// Plain evaluation without derivative payloads.
    pub fn eval(&self, input: &[f64]) -> Result<Vec<f64>, NetworkError> {
        if input.len() != self.input_width() {
            return Err(NetworkError::InputWidth {
                expected: self.input_width(),
                got: input.len(),
            });
        }
        let mut act = input.to_vec();
        for l in 0..self.num_layers() {
            let (w, b) = self.layer(l);
            let fan_in = self.widths[l];
            let mut next: Vec<f64> = b
                .iter()
                .enumerate()
                .map(|(j, &bj)| bj + w[j * fan_in..(j + 1) * fan_in].iter().zip(&act).map(|(a, x)| a * x).sum::<f64>())
                .collect();
            if l + 1 < self.num_layers() {
                for z in &mut next {
                    *z *= crate::autodiff::logistic(*z);
                }
            }
            act = next;
        }
        Ok(act)
    }
}

/// Forward pass with weights supplied as scalars of the payload's component
/// type, so parameters can be tape variables.
pub fn forward_with<T: Real>(
    widths: &[usize],
    weights: &[T],
    input: &[DiffScalar<T>],
) -> Result<Vec<DiffScalar<T>>, NetworkError> {
    check_widths(widths)?;
    let expected = param_count(widths);
    if weights.len() != expected {
        return Err(NetworkError::ParamCount {
            widths: widths.to_vec(),
            expected,
            got: weights.len(),
        });
    }
    if input.len() != widths[0] {
        return Err(NetworkError::InputWidth {
            expected: widths[0],
            got: input.len(),
        });
    }
    let n_layers = widths.len() - 1;
    let mut act = input.to_vec();
    let mut off = 0;
    for l in 0..n_layers {
        let (fan_in, fan_out) = (widths[l], widths[l + 1]);
        let w = &weights[off..off + fan_in * fan_out];
        let b = &weights[off + fan_in * fan_out..off + fan_in * fan_out + fan_out];
        off += fan_in * fan_out + fan_out;
        let mut next = Vec::with_capacity(fan_out);
        for j in 0..fan_out {
            let row = &w[j * fan_in..(j + 1) * fan_in];
            let mut z = DiffScalar::constant(b[j]);
            for (a, &wk) in act.iter().zip(row) {
                z = z + a.mul_component(wk);
            }
            next.push(if l + 1 < n_layers { z.silu() } else { z });
        }
        act = next;
    }
    Ok(act)
}

/// Deterministic initialization of the MLP part of a variant.
pub fn init_params(seed: u64, variant: Variant) -> MlpParams {
    MlpParams::glorot(variant.mlp_widths(), seed).expect("built-in widths are valid")
}
