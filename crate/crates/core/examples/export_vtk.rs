//! Predict velocity and pressure on the mixer and write a VTK file for
//! ParaView.
//!
//! cargo run --release --example export_vtk -- [checkpoint.json] [out.vtk]
//!
//! Without a checkpoint an untrained classical model is used.

use qpinn::export::{infer, write_vtk};
use qpinn::geometry::{generate_mixer, MixerSpec};
use qpinn::network::{Checkpoint, PinnModel, Variant};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let ckpt = match args.next().filter(|a| !a.is_empty()) {
        Some(path) => Checkpoint::load(path)?,
        None => Checkpoint::from_model(&PinnModel::init(0, Variant::Classical), 0, Some(30.0)),
    };
    let out = args.next().unwrap_or_else(|| "field.vtk".to_string());

    let spec = MixerSpec::default().with_alpha(ckpt.alpha_deg.unwrap_or(30.0));
    let cloud = generate_mixer(&spec)?;
    let snapshot = infer(&ckpt, &cloud)?;
    let speed_max = snapshot
        .velocity
        .iter()
        .map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt())
        .fold(0.0, f64::max);
    let (p_min, p_max) = snapshot
        .pressure
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| (lo.min(p), hi.max(p)));
    write_vtk(&snapshot, &out)?;
    println!("{} points -> {out}; max |v| {speed_max:.4}, p in [{p_min:.4}, {p_max:.4}]", snapshot.len());
    Ok(())
}
