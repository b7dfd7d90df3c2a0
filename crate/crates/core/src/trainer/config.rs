use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::TrainError;
use crate::geometry::{generate_mixer, load_csv, MixerSpec, PointCloud};
use crate::network::Variant;
use crate::optim::{AdamConfig, LbfgsConfig};
use crate::physics::{FluidParams, LossWeights};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BatchMode {
    Full,
    /// Mini-batches of this many points, drawn without replacement from a
    /// fresh seeded shuffle every epoch.
    Mini(usize),
}

/// Alpha sweep for transfer learning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransferConfig {
    pub alphas: Vec<f64>,
    /// L-BFGS epochs at every angle.
    pub epochs: usize,
}

impl Default for TransferConfig {
    fn default() -> Self {
        Self {
            alphas: vec![31.0, 32.0, 33.0, 34.0, 35.0],
            epochs: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub variant: Variant,
    pub seed: u64,
    /// Run loss evaluation on the calling thread only.
    pub deterministic: bool,
    pub adam_epochs: usize,
    pub lbfgs_epochs: usize,
    /// Batching of the Adam phase. L-BFGS is always full batch.
    pub batch: BatchMode,
    /// Also keep a checkpoint every this many epochs; 0 keeps only the last.
    pub checkpoint_every: usize,
    pub log_every: usize,
    /// Read the point cloud from this CSV file instead of generating it.
    pub geometry_csv: Option<PathBuf>,
    /// Starting checkpoint for `qpinn train`: donates the trunk of a hybrid
    /// run, or the initial weights of a classical one.
    pub pretrained: Option<PathBuf>,
    pub geometry: MixerSpec,
    pub fluid: FluidParams,
    pub weights: LossWeights,
    pub adam: AdamConfig,
    pub lbfgs: LbfgsConfig,
    pub transfer: TransferConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            variant: Variant::Classical,
            seed: 0,
            deterministic: false,
            adam_epochs: 1000,
            lbfgs_epochs: 100,
            batch: BatchMode::Full,
            checkpoint_every: 0,
            log_every: 50,
            geometry_csv: None,
            pretrained: None,
            geometry: MixerSpec::default(),
            fluid: FluidParams::default(),
            weights: LossWeights::default(),
            adam: AdamConfig::default(),
            lbfgs: LbfgsConfig::default(),
            transfer: TransferConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn from_toml(text: &str) -> Result<Self, TrainError> {
        let cfg: Self = toml::from_str(text).map_err(|e| TrainError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is representable in TOML")
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |msg: String| Err(TrainError::Config(msg));
        if let BatchMode::Mini(0) = self.batch {
            return bad("mini-batch size must be at least 1".into());
        }
        self.geometry.validate().map_err(|e| TrainError::Config(e.to_string()))?;
        self.fluid.validate().map_err(|e| TrainError::Config(e.to_string()))?;
        self.adam.validate().map_err(|e| TrainError::Config(e.to_string()))?;
        self.lbfgs.validate().map_err(|e| TrainError::Config(e.to_string()))?;
        let w = self.weights.as_array();
        if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return bad(format!("loss weights must be finite and non-negative, got {w:?}"));
        }
        if let Some(a) = self.transfer.alphas.iter().find(|a| !(**a > 0.0 && **a < 90.0)) {
            return bad(format!("transfer alpha {a} must lie in (0, 90) degrees"));
        }
        Ok(())
    }

    /// The training cloud: the CSV file if one is configured, otherwise the
    /// generated mixer.
    pub fn cloud(&self) -> Result<PointCloud, TrainError> {
        Ok(match &self.geometry_csv {
            Some(path) => load_csv(path)?,
            None => generate_mixer(&self.geometry)?,
        })
    }

    pub fn alpha(&self) -> Option<f64> {
        self.geometry_csv.is_none().then_some(self.geometry.alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let mut cfg = TrainConfig::default();
        cfg.batch = BatchMode::Mini(64);
        cfg.geometry_csv = Some("cloud.csv".into());
        let back = TrainConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn partial_documents_take_defaults() {
        let cfg = TrainConfig::from_toml("seed = 7\nbatch = { mini = 32 }\n[geometry]\nalpha = 40.0\n").unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.batch, BatchMode::Mini(32));
        assert_eq!(cfg.geometry.alpha, 40.0);
        assert_eq!(cfg.geometry.radius, MixerSpec::default().radius);
        assert_eq!(cfg.adam_epochs, 1000);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for text in ["sed = 1", "[geometry]\nangle = 3.0", "[adam]\nlearning_rate = 1.0"] {
            let err = TrainConfig::from_toml(text).unwrap_err();
            assert!(err.to_string().contains("unknown field"), "{err}");
        }
    }

    #[test]
    fn invalid_values_are_rejected() {
        for text in ["batch = { mini = 0 }", "[geometry]\nalpha = 120.0", "[fluid]\nnu = -1.0", "[transfer]\nalphas = [95.0]"] {
            assert!(TrainConfig::from_toml(text).is_err(), "{text}");
        }
    }
}
