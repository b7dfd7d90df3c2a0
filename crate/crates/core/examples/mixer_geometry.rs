//! Sample the Y-mixer at a few branch angles and save one cloud as CSV.
//!
//! cargo run --example mixer_geometry -- [grid_step] [out.csv]

use qpinn::geometry::{generate_mixer, save_csv, MixerSpec, Region};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let step: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.15);
    let out = args.next();

    for alpha in [30.0, 31.0, 35.0, 45.0] {
        let spec = MixerSpec::default().with_alpha(alpha).with_grid_step(step);
        let cloud = generate_mixer(&spec)?;
        let counts: Vec<String> = Region::ALL
            .iter()
            .map(|&r| format!("{r}={}", cloud.count(r)))
            .collect();
        println!("alpha {alpha:>4}: {} points ({})", cloud.len(), counts.join(", "));
    }

    if let Some(path) = out {
        let cloud = generate_mixer(&MixerSpec::default().with_grid_step(step))?;
        save_csv(&cloud, &path)?;
        println!("wrote {path}");
    }
    Ok(())
}
