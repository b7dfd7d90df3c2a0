//! Model checkpoints.
//!
//! A checkpoint is a JSON document:
//!
//! ```text
//! {
//!   "format": "qpinn-checkpoint",
//!   "version": 1,
//!   "architecture": {
//!     "variant": "classical" | "hybrid",
//!     "mlp_widths": [3, 64, ...],
//!     "circuit": null | { circuit spec },
//!     "head_widths": null | [4, 4]
//!   },
//!   "epoch": 120,
//!   "alpha_deg": 30.0,
//!   "params": [ ... flat parameter vector ... ]
//! }
//! ```
//!
//! The flat vector is the trunk (layer by layer, weights then biases), then
//! the variational angles, then the dense head. Floats are written in
//! shortest round-trip form, so a load reproduces the saved model bit for bit.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{HybridHead, MlpParams, NetworkError, PinnModel, Variant};
use crate::quantum::CircuitSpec;

pub const CHECKPOINT_FORMAT: &str = "qpinn-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Architecture {
    pub variant: Variant,
    pub mlp_widths: Vec<usize>,
    pub circuit: Option<CircuitSpec>,
    pub head_widths: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub architecture: Architecture,
    /// Epochs completed when the checkpoint was taken.
    #[serde(default)]
    pub epoch: usize,
    /// Branch angle of the geometry the model was trained on, if known.
    #[serde(default)]
    pub alpha_deg: Option<f64>,
    pub params: Vec<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("not a checkpoint: format {0:?}")]
    Format(String),
    #[error("unsupported checkpoint version {0} (this build reads {CHECKPOINT_VERSION})")]
    Version(u32),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("checkpoint json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Checkpoint {
    pub fn from_model(model: &PinnModel, epoch: usize, alpha_deg: Option<f64>) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            architecture: model.architecture(),
            epoch,
            alpha_deg,
            params: model.flat_params(),
        }
    }

    pub fn to_model(&self) -> Result<PinnModel, NetworkError> {
        let arch = &self.architecture;
        if let Some(i) = self.params.iter().position(|p| !p.is_finite()) {
            return Err(NetworkError::NonFinite(i));
        }
        match arch.variant {
            Variant::Classical => {
                if arch.circuit.is_some() || arch.head_widths.is_some() {
                    return Err(NetworkError::Mismatch("classical checkpoint carries a quantum head".into()));
                }
                PinnModel::classical(MlpParams::from_flat(arch.mlp_widths.clone(), self.params.clone())?)
            }
            Variant::Hybrid => {
                let (Some(circuit), Some(head_widths)) = (&arch.circuit, &arch.head_widths) else {
                    return Err(NetworkError::Mismatch("hybrid checkpoint lacks circuit or head widths".into()));
                };
                let nt = super::param_count(&arch.mlp_widths);
                let nh = super::param_count(head_widths);
                let expected = nt + circuit.n_params + nh;
                if self.params.len() != expected {
                    return Err(NetworkError::ParamCount {
                        widths: arch.mlp_widths.clone(),
                        expected,
                        got: self.params.len(),
                    });
                }
                let trunk = MlpParams::from_flat(arch.mlp_widths.clone(), self.params[..nt].to_vec())?;
                let head = HybridHead {
                    circuit: circuit.clone(),
                    angles: self.params[nt..nt + circuit.n_params].to_vec(),
                    dense: MlpParams::from_flat(head_widths.clone(), self.params[nt + circuit.n_params..].to_vec())?,
                };
                PinnModel::hybrid(trunk, head)
            }
        }
    }

    pub fn write<W: Write>(&self, writer: W) -> Result<(), CheckpointError> {
        let mut w = BufWriter::new(writer);
        serde_json::to_writer(&mut w, self)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    pub fn read<R: Read>(reader: R) -> Result<Self, CheckpointError> {
        // Check the envelope before the strict parse so that foreign JSON
        // gets a clear message.
        let value: serde_json::Value = serde_json::from_reader(BufReader::new(reader))?;
        let format = value.get("format").and_then(|f| f.as_str()).unwrap_or("");
        if format != CHECKPOINT_FORMAT {
            return Err(CheckpointError::Format(format.to_string()));
        }
        let version = value.get("version").and_then(|v| v.as_u64()).unwrap_or(0);
        if version != u64::from(CHECKPOINT_VERSION) {
            return Err(CheckpointError::Version(version as u32));
        }
        let ckpt: Checkpoint = serde_json::from_value(value)?;
        ckpt.to_model()?;
        Ok(ckpt)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CheckpointError> {
        self.write(File::create(path)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CheckpointError> {
        Self::read(File::open(path)?)
    }
}
