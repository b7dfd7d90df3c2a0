//! Hybrid (classical trunk + variational circuit + dense head) training.
//!
//! cargo run --release --example train_hybrid -- [pretrained.json] [config.toml] [out_dir]
//!
//! Without a checkpoint the trunk starts from a fresh classical
//! initialization.

use qpinn::network::{Checkpoint, PinnModel, Variant};
use qpinn::trainer::{train_hybrid, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let mut args = std::env::args().skip(1);
    let pretrained = args.next().filter(|a| !a.is_empty());
    let config = args.next().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/hybrid.toml").to_string());
    let out = args.next().unwrap_or_else(|| "runs/hybrid".to_string());

    let cfg = TrainConfig::from_toml(&std::fs::read_to_string(&config)?)?;
    let trunk = match &pretrained {
        Some(path) => Checkpoint::load(path)?.to_model()?,
        None => PinnModel::init(cfg.seed, Variant::Classical),
    };
    let cloud = cfg.cloud()?;
    println!("{} points, {} parameters", cloud.len(), PinnModel::hybrid_from_classical(&trunk, cfg.seed)?.num_params());

    let run = train_hybrid(&cfg, &cloud, &trunk)?;
    let r = &run.report;
    println!(
        "loss {:.4e} -> {:.4e} ({:.2}x) after {} epochs in {:.1}s",
        r.initial.total,
        r.final_loss.total,
        r.initial.total / r.final_loss.total,
        r.epochs(),
        r.duration_secs
    );
    run.write_dir(&out)?;
    println!("run directory: {out}");
    Ok(())
}
