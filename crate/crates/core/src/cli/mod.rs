//! Command-line front end: `geometry`, `train`, `transfer`, `infer` and
//! `compare`.
//!
//! Exit codes: 0 success, 2 bad configuration or arguments, 3 training
//! diverged, 4 I/O or malformed input file. The thread count of parallel
//! loss evaluation comes from `QPINN_THREADS` (default: all cores).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::export::{infer, write_vtk};
use crate::geometry::{load_csv, save_csv, generate_mixer, GeometryError, Region};
use crate::network::{Checkpoint, CheckpointError, NetworkError, PinnModel, Variant};
use crate::trainer::{compare, train_classical, train_hybrid, train_model, transfer_learn, RunReport, TrainConfig, TrainError};

pub const THREADS_ENV: &str = "QPINN_THREADS";

/// The checked-in default configuration.
pub const DEFAULT_CONFIG: &str = include_str!("../../configs/default.toml");

pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const DIVERGED: i32 = 3;
    pub const IO: i32 = 4;
}

#[derive(Debug, Parser)]
#[command(name = "qpinn", version, about = "PINN and hybrid quantum PINN for laminar flow in a Y-shaped mixer")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML configuration; command-line flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Evaluate losses on one thread in a fixed order.
    #[arg(long, global = true)]
    pub deterministic: bool,
    /// Output file or directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the mixer and write the point cloud as CSV.
    Geometry(GeometryArgs),
    /// Train a classical or hybrid model into a run directory.
    Train(TrainArgs),
    /// Chain L-BFGS runs over a sequence of branch angles.
    Transfer(TransferArgs),
    /// Predict velocity and pressure on a point cloud and write VTK.
    Infer(InferArgs),
    /// Compare the loss curves of two run directories.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct GeometryArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub inlet_length: Option<f64>,
    #[arg(long)]
    pub outlet_length: Option<f64>,
    #[arg(long)]
    pub grid_step: Option<f64>,
    #[arg(long)]
    pub v_max: Option<f64>,
    #[arg(long)]
    pub p_out: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_parser = parse_variant)]
    pub variant: Option<Variant>,
    #[arg(long)]
    pub adam_epochs: Option<usize>,
    #[arg(long)]
    pub lbfgs_epochs: Option<usize>,
    /// Starting checkpoint: the trunk of a hybrid model, or the initial
    /// weights of a classical one.
    #[arg(long)]
    pub pretrained: Option<PathBuf>,
    /// Train on this CSV point cloud instead of the generated mixer.
    #[arg(long)]
    pub geometry_csv: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TransferArgs {
    /// Checkpoint to start the sweep from.
    #[arg(long)]
    pub base: PathBuf,
    /// Comma-separated branch angles in degrees.
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    /// L-BFGS epochs per angle.
    #[arg(long)]
    pub epochs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Point cloud CSV; without it the configured mixer is sampled.
    #[arg(long)]
    pub cloud: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub run_a: PathBuf,
    pub run_b: PathBuf,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    match s {
        "classical" => Ok(Variant::Classical),
        "hybrid" => Ok(Variant::Hybrid),
        _ => Err(format!("unknown variant {s:?} (expected classical or hybrid)")),
    }
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: exit::CONFIG,
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> Self {
        Self {
            code: exit::IO,
            message: message.into(),
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        let code = match &e {
            TrainError::Config(_) | TrainError::Optim(_) | TrainError::Network(_) => exit::CONFIG,
            TrainError::Geometry(g) => return g.into(),
            TrainError::Checkpoint(c) => return c.into(),
            TrainError::Diverged { .. } => exit::DIVERGED,
            TrainError::Io(_) => exit::IO,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<&GeometryError> for CliError {
    fn from(e: &GeometryError) -> Self {
        let code = match e {
            GeometryError::InvalidSpec { .. } | GeometryError::NoFluidPoints { .. } | GeometryError::TooFine { .. } => exit::CONFIG,
            _ => exit::IO,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        (&e).into()
    }
}

impl From<&CheckpointError> for CliError {
    fn from(e: &CheckpointError) -> Self {
        let code = match e {
            CheckpointError::Network(NetworkError::Mismatch(_)) => exit::CONFIG,
            _ => exit::IO,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<CheckpointError> for CliError {
    fn from(e: CheckpointError) -> Self {
        (&e).into()
    }
}

impl From<NetworkError> for CliError {
    fn from(e: NetworkError) -> Self {
        Self::config(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::io(e.to_string())
    }
}

/// Configuration file (or the built-in default) with the global overrides.
pub fn load_config(common: &Common) -> Result<TrainConfig, CliError> {
    let text = match &common.config {
        Some(path) => fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?,
        None => DEFAULT_CONFIG.to_string(),
    };
    let mut cfg = TrainConfig::from_toml(&text).map_err(|e| CliError::config(e.to_string()))?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if common.deterministic {
        cfg.deterministic = true;
    }
    Ok(cfg)
}

fn load_checkpoint(path: &Path) -> Result<Checkpoint, CliError> {
    Checkpoint::load(path).map_err(|e| {
        let mut err = CliError::from(&e);
        err.message = format!("{}: {}", path.display(), err.message);
        err
    })
}

fn out_path(common: &Common, default: &str) -> PathBuf {
    common.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

pub fn cmd_geometry(common: &Common, args: &GeometryArgs) -> Result<String, CliError> {
    let mut spec = load_config(common)?.geometry;
    let overrides = [
        (&mut spec.alpha, args.alpha),
        (&mut spec.radius, args.radius),
        (&mut spec.inlet_length, args.inlet_length),
        (&mut spec.outlet_length, args.outlet_length),
        (&mut spec.grid_step, args.grid_step),
        (&mut spec.v_max, args.v_max),
        (&mut spec.p_out, args.p_out),
    ];
    for (field, value) in overrides {
        if let Some(v) = value {
            *field = v;
        }
    }
    let cloud = generate_mixer(&spec)?;
    let out = out_path(common, "mixer.csv");
    save_csv(&cloud, &out)?;
    let counts: Vec<String> = Region::ALL.iter().map(|&r| format!("{r} {}", cloud.count(r))).collect();
    Ok(format!("wrote {} points ({}) to {}", cloud.len(), counts.join(", "), out.display()))
}

pub fn cmd_train(common: &Common, args: &TrainArgs) -> Result<String, CliError> {
    let mut cfg = load_config(common)?;
    if let Some(v) = args.variant {
        cfg.variant = v;
    }
    if let Some(n) = args.adam_epochs {
        cfg.adam_epochs = n;
    }
    if let Some(n) = args.lbfgs_epochs {
        cfg.lbfgs_epochs = n;
    }
    if let Some(p) = &args.pretrained {
        cfg.pretrained = Some(p.clone());
    }
    if let Some(p) = &args.geometry_csv {
        cfg.geometry_csv = Some(p.clone());
    }
    if let Some(a) = args.alpha {
        cfg.geometry.alpha = a;
    }
    cfg.validate()?;
    let out = out_path(common, match cfg.variant {
        Variant::Classical => "runs/classical",
        Variant::Hybrid => "runs/hybrid",
    });
    let cloud = cfg.cloud()?;
    let result = match cfg.variant {
        Variant::Classical => match &cfg.pretrained {
            // Continue from a classical checkpoint, e.g. the classical arm
            // of a hybrid comparison.
            Some(path) => {
                let model = load_checkpoint(path)?.to_model()?;
                if model.variant() != Variant::Classical {
                    return Err(CliError::config(format!("{} is not a classical checkpoint", path.display())));
                }
                train_model(model, &cloud, &cfg, cfg.alpha(), "classical")
            }
            None => train_classical(&cfg, &cloud),
        },
        Variant::Hybrid => {
            let path = cfg
                .pretrained
                .clone()
                .ok_or_else(|| CliError::config("hybrid training needs a pretrained checkpoint (--pretrained or `pretrained` in the config)"))?;
            let model = load_checkpoint(&path)?.to_model()?;
            train_hybrid(&cfg, &cloud, &model)
        }
    };
    match result {
        Ok(run) => {
            run.write_dir(&out)?;
            Ok(format!(
                "{} epochs, loss {:.6e} -> {:.6e}; run directory {}",
                run.report.epochs(),
                run.report.initial.total,
                run.report.final_loss.total,
                out.display()
            ))
        }
        Err(TrainError::Diverged { epoch, term, partial }) => {
            partial.write_dir(&out)?;
            Err(CliError {
                code: exit::DIVERGED,
                message: format!(
                    "training diverged: {term} non-finite at epoch {epoch}; last finite state saved in {}",
                    out.display()
                ),
            })
        }
        Err(e) => Err(e.into()),
    }
}

fn alpha_dir(alpha: f64) -> String {
    format!("alpha_{alpha}")
}

pub fn cmd_transfer(common: &Common, args: &TransferArgs) -> Result<String, CliError> {
    let cfg = load_config(common)?;
    let alphas = args.alphas.clone().unwrap_or_else(|| cfg.transfer.alphas.clone());
    let epochs = args.epochs.unwrap_or(cfg.transfer.epochs);
    if alphas.is_empty() {
        return Err(CliError::config("no alphas given"));
    }
    let base = load_checkpoint(&args.base)?;
    let out = out_path(common, "runs/transfer");
    let runs = match transfer_learn(&base, &alphas, epochs, &cfg) {
        Ok(runs) => runs,
        Err(TrainError::Diverged { epoch, term, partial }) => {
            let dir = out.join(alpha_dir(partial.report.alpha_deg.unwrap_or(f64::NAN)));
            partial.write_dir(&dir)?;
            return Err(CliError {
                code: exit::DIVERGED,
                message: format!("transfer diverged: {term} non-finite at epoch {epoch}; see {}", dir.display()),
            });
        }
        Err(e) => return Err(e.into()),
    };
    let mut lines = Vec::new();
    for run in &runs {
        let alpha = run.report.alpha_deg.expect("transfer runs know their angle");
        let dir = out.join(alpha_dir(alpha));
        run.write_dir(&dir)?;
        lines.push(format!(
            "alpha {alpha}: loss {:.6e} -> {:.6e} ({})",
            run.report.initial.total,
            run.report.final_loss.total,
            dir.display()
        ));
    }
    Ok(lines.join("\n"))
}

pub fn cmd_infer(common: &Common, args: &InferArgs) -> Result<String, CliError> {
    let ckpt = load_checkpoint(&args.checkpoint)?;
    let cloud = match &args.cloud {
        Some(path) => load_csv(path).map_err(|e| {
            let mut err = CliError::from(&e);
            err.message = format!("{}: {}", path.display(), err.message);
            err
        })?,
        None => {
            let cfg = load_config(common)?;
            let mut spec = cfg.geometry;
            if let Some(a) = ckpt.alpha_deg {
                spec.alpha = a;
            }
            generate_mixer(&spec)?
        }
    };
    let snapshot = infer(&ckpt, &cloud)?;
    let out = out_path(common, "field.vtk");
    write_vtk(&snapshot, &out).map_err(|e| CliError::io(format!("{}: {e}", out.display())))?;
    let bad = snapshot.non_finite().len();
    Ok(format!(
        "wrote {} points to {}{}",
        snapshot.len(),
        out.display(),
        if bad > 0 { format!(" ({bad} with non-finite values)") } else { String::new() }
    ))
}

pub fn cmd_compare(common: &Common, args: &CompareArgs) -> Result<String, CliError> {
    let load = |p: &Path| RunReport::load(p).map_err(|e| CliError::io(format!("{}: {e}", p.display())));
    let a = load(&args.run_a)?;
    let b = load(&args.run_b)?;
    let cmp = compare(&a, &b);
    if let Some(out) = &common.out {
        fs::create_dir_all(out)?;
        let json = serde_json::to_string_pretty(&cmp).map_err(std::io::Error::other)?;
        fs::write(out.join("comparison.json"), json + "\n")?;
        cmp.write_curves_csv(fs::File::create(out.join("comparison.csv"))?)
            .map_err(std::io::Error::other)?;
    }
    Ok(cmp.summary())
}

fn init_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::config(format!("{THREADS_ENV} must be a positive integer, got {value:?}")))?;
    // A second initialization in the same process is harmless.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn dispatch(cli: &Cli) -> Result<String, CliError> {
    init_threads()?;
    match &cli.command {
        Command::Geometry(a) => cmd_geometry(&cli.common, a),
        Command::Train(a) => cmd_train(&cli.common, a),
        Command::Transfer(a) => cmd_transfer(&cli.common, a),
        Command::Infer(a) => cmd_infer(&cli.common, a),
        Command::Compare(a) => cmd_compare(&cli.common, a),
    }
}

/// Parse `args`, run the command and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::CONFIG } else { exit::OK };
        }
    };
    match dispatch(&cli) {
        Ok(msg) => {
            println!("{msg}");
            exit::OK
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

/// Model a run directory would hold after `cmd_train`, for callers that want
/// the in-memory result.
pub fn load_run_model(dir: &Path) -> Result<PinnModel, CliError> {
    let report = RunReport::load(dir)?;
    let name = report
        .final_checkpoint
        .ok_or_else(|| CliError::io(format!("{}: report names no checkpoint", dir.display())))?;
    Ok(load_checkpoint(&dir.join(name))?.to_model()?)
}
