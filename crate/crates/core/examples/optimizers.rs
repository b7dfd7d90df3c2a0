//! L-BFGS on the Rosenbrock function, and Adam on the same problem for
//! comparison.
//!
//! cargo run --release --example optimizers

use std::convert::Infallible;

use qpinn::optim::{AdamConfig, AdamState, Evaluation, LbfgsConfig, LbfgsState, StepStatus};

fn rosenbrock(x: &[f64]) -> (f64, Vec<f64>) {
    let (a, b) = (x[0], x[1]);
    let loss = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
    (loss, vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)])
}

fn main() {
    let mut lbfgs = LbfgsState::new(LbfgsConfig::default());
    let mut x = vec![-1.2, 1.0];
    let mut evals = 0;
    for it in 1..=200 {
        let out = lbfgs
            .step(&mut x, |p| -> Result<_, Infallible> {
                let (loss, grad) = rosenbrock(p);
                Ok(Evaluation { loss, grad, aux: () })
            })
            .unwrap();
        evals += out.evaluations;
        if it % 10 == 0 || out.status == StepStatus::Stationary {
            println!("L-BFGS it {it:>3}: f = {:.3e}, step {:.3}", out.current.loss, out.step_length);
        }
        if out.status == StepStatus::Stationary || out.current.loss < 1e-20 {
            break;
        }
    }
    println!("L-BFGS: x = {x:.8?} after {evals} evaluations");

    let mut adam = AdamState::new(2, AdamConfig { lr: 1e-2, ..AdamConfig::default() });
    let mut y = vec![-1.2, 1.0];
    for _ in 0..5000 {
        let (_, g) = rosenbrock(&y);
        adam.step(&mut y, &g).unwrap();
    }
    println!("Adam, 5000 steps at lr 1e-2: x = {y:.6?}, f = {:.3e}", rosenbrock(&y).0);
}
