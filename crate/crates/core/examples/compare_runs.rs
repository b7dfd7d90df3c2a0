//! Compare the loss curves of two run directories.
//!
//! cargo run --release --example compare_runs -- <run_a> <run_b> [curves.csv]

use qpinn::trainer::{compare, RunReport};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.len() < 2 {
        eprintln!("usage: compare_runs <run_a> <run_b> [curves.csv]");
        std::process::exit(2);
    }
    let a = RunReport::load(&args[0])?;
    let b = RunReport::load(&args[1])?;
    let cmp = compare(&a, &b);
    print!("{}", cmp.summary());
    if let Some(path) = args.get(2) {
        cmp.write_curves_csv(std::fs::File::create(path)?)?;
        println!("curves written to {path}");
    }
    Ok(())
}
