//! Classical PINN training on the mixer, written to a run directory.
//!
//! cargo run --release --example train_classical -- [config.toml] [out_dir]

use qpinn::trainer::{train_classical, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let mut args = std::env::args().skip(1);
    let config = args.next().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/desk.toml").to_string());
    let out = args.next().unwrap_or_else(|| "runs/classical".to_string());

    let cfg = TrainConfig::from_toml(&std::fs::read_to_string(&config)?)?;
    let cloud = cfg.cloud()?;
    println!("{} points, {} Adam + {} L-BFGS epochs", cloud.len(), cfg.adam_epochs, cfg.lbfgs_epochs);

    let run = train_classical(&cfg, &cloud)?;
    let r = &run.report;
    println!("initial loss {:.4e}", r.initial.total);
    println!("final loss   {:.4e} after {} epochs in {:.1}s", r.final_loss.total, r.epochs(), r.duration_secs);
    for (name, a, b) in [
        ("wall", r.initial.bc_wall, r.final_loss.bc_wall),
        ("inlet", r.initial.bc_inlet, r.final_loss.bc_inlet),
        ("outlet", r.initial.bc_outlet, r.final_loss.bc_outlet),
        ("continuity", r.initial.continuity, r.final_loss.continuity),
    ] {
        println!("  {name:<10} {a:.3e} -> {b:.3e}");
    }
    run.write_dir(&out)?;
    println!("run directory: {out}");
    Ok(())
}
