//! Start from a checkpoint at one branch angle and follow the angle upward,
//! a few L-BFGS epochs per degree.
//!
//! cargo run --release --example transfer_learning -- <checkpoint.json> [config.toml] [out_dir]
//!
//! Without a checkpoint, a short classical run at the configured angle
//! provides the base.

use qpinn::network::Checkpoint;
use qpinn::trainer::{train_classical, transfer_learn, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let mut args = std::env::args().skip(1);
    let base = args.next().filter(|a| !a.is_empty());
    let config = args.next().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/desk.toml").to_string());
    let out = args.next().unwrap_or_else(|| "runs/transfer".to_string());
    let cfg = TrainConfig::from_toml(&std::fs::read_to_string(&config)?)?;

    let base = match base {
        Some(path) => Checkpoint::load(path)?,
        None => {
            let quick = TrainConfig {
                adam_epochs: 100,
                lbfgs_epochs: 10,
                ..cfg.clone()
            };
            println!("training a base model at alpha = {}", quick.geometry.alpha);
            train_classical(&quick, &quick.cloud()?)?.final_checkpoint().clone()
        }
    };

    let runs = transfer_learn(&base, &cfg.transfer.alphas, cfg.transfer.epochs, &cfg)?;
    for run in &runs {
        let r = &run.report;
        let alpha = r.alpha_deg.unwrap_or(f64::NAN);
        println!("alpha {alpha:>5}: {} points, loss {:.4e} -> {:.4e}", r.points, r.initial.total, r.final_loss.total);
        run.write_dir(format!("{out}/alpha_{alpha}"))?;
    }
    Ok(())
}
