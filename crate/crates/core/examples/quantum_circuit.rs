//! The hybrid model's 4-qubit data-reuploading circuit: readouts and the
//! three gradient methods side by side.
//!
//! cargo run --release --example quantum_circuit

use qpinn::quantum::{adjoint_gradient, encode_feature, parameter_shift_gradient, run_circuit, CircuitSpec};

fn main() {
    let spec = CircuitSpec::hybrid_default();
    println!("{} qubits, {} features, {} angles, {} gates", spec.n_qubits, spec.n_features, spec.n_params, spec.gates().len());

    let features: Vec<f64> = (0..spec.n_features).map(|i| encode_feature((i as f64 * 0.37).sin())).collect();
    let params: Vec<f64> = (0..spec.n_params).map(|j| 0.1 * (j as f64 - 7.5) / 7.5).collect();
    let z = run_circuit(&spec, &features, &params).unwrap();
    println!("<Z> = {z:.6?}");

    let adj = adjoint_gradient(&spec, &features, &params).unwrap();
    let shift = parameter_shift_gradient(&spec, &features, &params).unwrap();
    let h = 1e-6;
    let mut worst = (0.0f64, 0.0f64);
    for j in 0..spec.n_params {
        let mut p = params.clone();
        p[j] += h;
        let plus = run_circuit(&spec, &features, &p).unwrap();
        p[j] -= 2.0 * h;
        let minus = run_circuit(&spec, &features, &p).unwrap();
        for q in 0..z.len() {
            let fd = (plus[q] - minus[q]) / (2.0 * h);
            worst.0 = worst.0.max((adj[q][j] - shift[q][j]).abs());
            worst.1 = worst.1.max((adj[q][j] - fd).abs());
        }
    }
    println!("d<Z0>/dθ (adjoint) = {:.6?}", adj[0]);
    println!("max |adjoint - shift| = {:.1e}, max |adjoint - FD| = {:.1e}", worst.0, worst.1);
}
