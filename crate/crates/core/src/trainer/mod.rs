//! Training protocols: classical training, transfer learning across branch
//! angles, and hybrid training on a pretrained trunk.
//!
//! A run directory holds
//!
//! ```text
//! config.toml             configuration the run used
//! loss.csv                loss terms per epoch (epoch 0 is the initial state)
//! checkpoint_<epoch>.json model checkpoints
//! report.json             summary
//! ```

mod config;
mod objective;
mod report;

pub use config::{BatchMode, TrainConfig, TransferConfig};
pub use objective::{Execution, Objective, CHUNK};
pub use report::{compare, ComparisonReport, Divergence, RunReport};

use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::geometry::{generate_mixer, GeometryError, PointCloud};
use crate::network::{Checkpoint, CheckpointError, NetworkError, PinnModel, Variant};
use crate::optim::{AdamState, Evaluation, LbfgsState, OptimError, StepStatus};
use crate::physics::{write_loss_csv, LossBreakdown};

pub const CONFIG_FILE: &str = "config.toml";
pub const LOSS_FILE: &str = "loss.csv";
pub const REPORT_FILE: &str = "report.json";

pub fn checkpoint_file(epoch: usize) -> String {
    format!("checkpoint_{epoch}.json")
}

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error(transparent)]
    Optim(#[from] OptimError),
    #[error("loss term {term} became non-finite at epoch {epoch}")]
    Diverged {
        epoch: usize,
        term: String,
        /// The run up to its last finite state.
        partial: Box<Trained>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A finished (or aborted) run.
#[derive(Debug, Clone)]
pub struct Trained {
    pub model: PinnModel,
    pub report: RunReport,
    /// Periodic checkpoints followed by the final one.
    pub checkpoints: Vec<Checkpoint>,
}

impl Trained {
    pub fn final_checkpoint(&self) -> &Checkpoint {
        self.checkpoints.last().expect("a run always keeps its final checkpoint")
    }

    /// Write the run directory, creating it if needed.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<(), TrainError> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        fs::write(dir.join(CONFIG_FILE), self.report.config.to_toml())?;
        let mut rows = vec![self.report.initial];
        rows.extend_from_slice(&self.report.history);
        write_loss_csv(&rows, 0, fs::File::create(dir.join(LOSS_FILE))?).map_err(std::io::Error::other)?;
        for ckpt in &self.checkpoints {
            ckpt.save(dir.join(checkpoint_file(ckpt.epoch)))?;
        }
        let json = serde_json::to_string_pretty(&self.report).map_err(std::io::Error::other)?;
        fs::write(dir.join(REPORT_FILE), json + "\n")?;
        Ok(())
    }
}

enum Stop {
    /// Parameters of the last finite state and the offending loss.
    Diverged(Vec<f64>, LossBreakdown),
    Error(TrainError),
}

impl<E: Into<TrainError>> From<E> for Stop {
    fn from(e: E) -> Self {
        Stop::Error(e.into())
    }
}

struct Run<'a> {
    cfg: &'a TrainConfig,
    cloud: &'a PointCloud,
    objective: Objective<'a>,
    model: PinnModel,
    alpha: Option<f64>,
    label: String,
    started: Instant,
    initial: LossBreakdown,
    history: Vec<LossBreakdown>,
    checkpoints: Vec<Checkpoint>,
    adam_epochs: usize,
    lbfgs_epochs: usize,
    lbfgs_failures: usize,
}

impl<'a> Run<'a> {
    fn execution(cfg: &TrainConfig) -> Execution {
        if cfg.deterministic {
            Execution::Deterministic
        } else {
            Execution::Parallel
        }
    }

    fn epoch(&self) -> usize {
        self.history.len()
    }

    fn finish(self, diverged: Option<Divergence>) -> Trained {
        let epoch = self.epoch();
        let final_loss = self
            .history
            .iter()
            .rev()
            .find(|l| l.is_finite())
            .copied()
            .unwrap_or(self.initial);
        let mut checkpoints = self.checkpoints;
        let last = Checkpoint::from_model(&self.model, epoch, self.alpha);
        if checkpoints.last().map(|c| c.epoch) == Some(epoch) {
            checkpoints.pop();
        }
        checkpoints.push(last);
        let report = RunReport {
            label: self.label,
            variant: self.model.variant(),
            alpha_deg: self.alpha,
            points: self.cloud.len(),
            adam_epochs: self.adam_epochs,
            lbfgs_epochs: self.lbfgs_epochs,
            lbfgs_failed_line_searches: self.lbfgs_failures,
            initial: self.initial,
            final_loss,
            duration_secs: self.started.elapsed().as_secs_f64(),
            diverged,
            final_checkpoint: Some(checkpoint_file(epoch)),
            config: self.cfg.clone(),
            history: self.history,
        };
        Trained {
            model: self.model,
            report,
            checkpoints,
        }
    }

    /// Abort keeping `last_good` as the model. The non-finite loss stays in
    /// the history so its length counts every epoch that ran; `None` means
    /// the initial state was already non-finite.
    fn diverge(mut self, last_good: Vec<f64>, loss: Option<LossBreakdown>) -> TrainError {
        if let Some(loss) = loss {
            self.history.push(loss);
        }
        let loss = loss.unwrap_or(self.initial);
        let epoch = self.epoch();
        let term = loss.first_non_finite().unwrap_or("total").to_string();
        log::error!("{}: {term} is non-finite at epoch {epoch}; keeping the last finite parameters", self.label);
        if let Err(e) = self.model.set_flat_params(&last_good) {
            return e.into();
        }
        let partial = self.finish(Some(Divergence {
            epoch,
            term: term.clone(),
        }));
        TrainError::Diverged {
            epoch,
            term,
            partial: Box::new(partial),
        }
    }

    fn record(&mut self, loss: LossBreakdown) {
        self.history.push(loss);
        let epoch = self.epoch();
        if self.cfg.log_every > 0 && epoch % self.cfg.log_every == 0 {
            log::info!("{} epoch {epoch}: loss {:.6e}", self.label, loss.total);
        }
        if self.cfg.checkpoint_every > 0 && epoch % self.cfg.checkpoint_every == 0 {
            self.checkpoints.push(Checkpoint::from_model(&self.model, epoch, self.alpha));
        }
    }

    fn adam_full(&mut self, params: &mut Vec<f64>, adam: &mut AdamState) -> Result<(), Stop> {
        let mut previous = params.clone();
        for e in 0..self.cfg.adam_epochs {
            let (loss, grad) = self.objective.loss_and_gradient(&self.model)?;
            if e > 0 {
                if !loss.is_finite() {
                    return Err(Stop::Diverged(previous, loss));
                }
                self.record(loss);
            }
            previous.clone_from(params);
            if adam.step(params, &grad).is_err() {
                // Non-finite gradient at a finite loss.
                let mut l = loss;
                l.total = f64::NAN;
                return Err(Stop::Diverged(previous, l));
            }
            self.model.set_flat_params(params)?;
            self.adam_epochs += 1;
        }
        if self.cfg.adam_epochs > 0 {
            let loss = self.objective.evaluate(&self.model)?;
            if !loss.is_finite() {
                return Err(Stop::Diverged(previous, loss));
            }
            self.record(loss);
        }
        Ok(())
    }

    fn adam_mini(&mut self, params: &mut Vec<f64>, adam: &mut AdamState, size: usize) -> Result<(), Stop> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed ^ 0x5eed_ba7c_u64);
        let mut order: Vec<usize> = (0..self.cloud.len()).collect();
        let execution = Self::execution(self.cfg);
        for _ in 0..self.cfg.adam_epochs {
            let start = params.clone();
            order.shuffle(&mut rng);
            for batch in order.chunks(size) {
                let sub = self.cloud.subset(batch);
                let obj = Objective::new(&sub, self.cfg.fluid, &self.cfg.weights, execution);
                let (loss, grad) = obj.loss_and_gradient(&self.model)?;
                if !loss.is_finite() || adam.step(params, &grad).is_err() {
                    let mut full = self.objective.evaluate(&self.model)?;
                    if full.is_finite() {
                        full.total = f64::NAN;
                    }
                    return Err(Stop::Diverged(start, full));
                }
                self.model.set_flat_params(params)?;
            }
            self.adam_epochs += 1;
            let loss = self.objective.evaluate(&self.model)?;
            if !loss.is_finite() {
                return Err(Stop::Diverged(start, loss));
            }
            self.record(loss);
        }
        Ok(())
    }

    fn lbfgs(&mut self, params: &mut [f64]) -> Result<(), Stop> {
        let mut state = LbfgsState::<LossBreakdown>::new(self.cfg.lbfgs);
        let mut model = self.model.clone();
        for _ in 0..self.cfg.lbfgs_epochs {
            let objective = &self.objective;
            let out = state
                .step(params, |x| -> Result<Evaluation<LossBreakdown>, NetworkError> {
                    model.set_flat_params(x)?;
                    let (loss, grad) = objective.loss_and_gradient(&model)?;
                    Ok(Evaluation {
                        loss: loss.total,
                        grad,
                        aux: loss,
                    })
                })
                ?;
            self.lbfgs_epochs += 1;
            if out.status == StepStatus::LineSearchFailed {
                self.lbfgs_failures += 1;
                log::warn!("{}: line search failed at epoch {}; step skipped", self.label, self.epoch() + 1);
            }
            if !out.current.aux.is_finite() {
                return Err(Stop::Diverged(params.to_vec(), out.current.aux));
            }
            self.model.set_flat_params(params)?;
            self.record(out.current.aux);
        }
        Ok(())
    }
}

/// Train `model` on `cloud` following `cfg`: Adam epochs (full or
/// mini-batch), then full-batch L-BFGS epochs. Every epoch appends the loss
/// of the whole cloud at the parameters it ends with.
pub fn train_model(
    model: PinnModel,
    cloud: &PointCloud,
    cfg: &TrainConfig,
    alpha: Option<f64>,
    label: impl Into<String>,
) -> Result<Trained, TrainError> {
    cfg.validate()?;
    crate::physics::warn_empty_groups(cloud);
    let objective = Objective::new(cloud, cfg.fluid, &cfg.weights, Run::execution(cfg));
    let initial = objective.evaluate(&model)?;
    let mut run = Run {
        cfg,
        cloud,
        objective,
        model,
        alpha,
        label: label.into(),
        started: Instant::now(),
        initial,
        history: Vec::with_capacity(cfg.adam_epochs + cfg.lbfgs_epochs),
        checkpoints: Vec::new(),
        adam_epochs: 0,
        lbfgs_epochs: 0,
        lbfgs_failures: 0,
    };
    let mut params = run.model.flat_params();
    if !initial.is_finite() {
        return Err(run.diverge(params, None));
    }

    let mut adam = AdamState::new(params.len(), cfg.adam);
    let adam_result = match cfg.batch {
        BatchMode::Full => run.adam_full(&mut params, &mut adam),
        BatchMode::Mini(size) => run.adam_mini(&mut params, &mut adam, size),
    };
    let result = adam_result.and_then(|_| run.lbfgs(&mut params));
    match result {
        Ok(()) => Ok(run.finish(None)),
        Err(Stop::Diverged(last_good, loss)) => Err(run.diverge(last_good, Some(loss))),
        Err(Stop::Error(e)) => Err(e),
    }
}

/// Classical training from a fresh initialization.
pub fn train_classical(cfg: &TrainConfig, cloud: &PointCloud) -> Result<Trained, TrainError> {
    if cfg.variant != Variant::Classical {
        return Err(TrainError::Config("train_classical needs variant = \"classical\"".into()));
    }
    let model = PinnModel::init(cfg.seed, Variant::Classical);
    train_model(model, cloud, cfg, cfg.alpha(), "classical")
}

/// Hybrid training. A classical `pretrained` model donates its trunk to a
/// fresh quantum head; a hybrid one is trained further as is.
pub fn train_hybrid(cfg: &TrainConfig, cloud: &PointCloud, pretrained: &PinnModel) -> Result<Trained, TrainError> {
    if cfg.variant != Variant::Hybrid {
        return Err(TrainError::Config("train_hybrid needs variant = \"hybrid\"".into()));
    }
    let model = match pretrained.variant() {
        Variant::Classical => PinnModel::hybrid_from_classical(pretrained, cfg.seed)?,
        Variant::Hybrid => pretrained.clone(),
    };
    train_model(model, cloud, cfg, cfg.alpha(), "hybrid")
}

/// Sweep the branch angle, starting each step from the previous step's
/// model and running `epochs_per_step` L-BFGS epochs on the regenerated
/// mixer.
pub fn transfer_learn(
    base: &Checkpoint,
    alphas: &[f64],
    epochs_per_step: usize,
    cfg: &TrainConfig,
) -> Result<Vec<Trained>, TrainError> {
    let mut model = base.to_model()?;
    let expected = PinnModel::init(0, cfg.variant).architecture();
    if model.architecture() != expected {
        return Err(NetworkError::Mismatch(format!(
            "base checkpoint is a {:?} model with widths {:?}; the configuration expects {:?} with widths {:?}",
            base.architecture.variant, base.architecture.mlp_widths, expected.variant, expected.mlp_widths
        ))
        .into());
    }
    let step_cfg = TrainConfig {
        adam_epochs: 0,
        lbfgs_epochs: epochs_per_step,
        geometry_csv: None,
        ..cfg.clone()
    };
    step_cfg.validate()?;
    for &a in alphas {
        step_cfg.geometry.clone().with_alpha(a).validate()?;
    }
    let mut runs = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let mut c = step_cfg.clone();
        c.geometry = c.geometry.with_alpha(alpha);
        let cloud = generate_mixer(&c.geometry)?;
        let trained = train_model(model, &cloud, &c, Some(alpha), format!("transfer alpha={alpha}"))?;
        model = trained.model.clone();
        runs.push(trained);
    }
    Ok(runs)
}
