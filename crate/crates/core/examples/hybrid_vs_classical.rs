//! Hybrid against classical with identical mini-batch Adam settings, both
//! starting from the same pretrained classical trunk.
//!
//! cargo run --release --example hybrid_vs_classical -- [pretrained.json] [out_dir]
//!
//! Without a checkpoint the trunk is pretrained here with the desk config.

use qpinn::network::{Checkpoint, Variant};
use qpinn::trainer::{compare, train_classical, train_hybrid, train_model, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let mut args = std::env::args().skip(1);
    let pretrained = args.next().filter(|a| !a.is_empty());
    let out = args.next().unwrap_or_else(|| "runs/comparison".to_string());
    let dir = env!("CARGO_MANIFEST_DIR");

    let base = match pretrained {
        Some(path) => Checkpoint::load(path)?.to_model()?,
        None => {
            let desk = TrainConfig::from_toml(&std::fs::read_to_string(format!("{dir}/configs/desk.toml"))?)?;
            println!("pretraining the trunk ({} + {} epochs)", desk.adam_epochs, desk.lbfgs_epochs);
            train_classical(&desk, &desk.cloud()?)?.model
        }
    };

    let hybrid_cfg = TrainConfig::from_toml(&std::fs::read_to_string(format!("{dir}/configs/hybrid.toml"))?)?;
    let classical_cfg = TrainConfig {
        variant: Variant::Classical,
        ..hybrid_cfg.clone()
    };
    let cloud = hybrid_cfg.cloud()?;
    let classical = train_model(base.clone(), &cloud, &classical_cfg, classical_cfg.alpha(), "classical")?;
    let hybrid = train_hybrid(&hybrid_cfg, &cloud, &base)?;

    let cmp = compare(&classical.report, &hybrid.report);
    print!("{}", cmp.summary());
    classical.write_dir(format!("{out}/classical"))?;
    hybrid.write_dir(format!("{out}/hybrid"))?;
    Ok(())
}
