//! Gradients of readout expectations with respect to the variational angles.

use std::f64::consts::FRAC_PI_2;

use super::circuit::{prepare_state, AngleSource, CircuitSpec, Gate};
use super::{QuantumError, StateVector};

fn ry_matrix(theta: f64) -> [[f64; 2]; 2] {
    let (s, c) = (0.5 * theta).sin_cos();
    [[c, -s], [s, c]]
}

fn ry_derivative(theta: f64) -> [[f64; 2]; 2] {
    let (s, c) = (0.5 * theta).sin_cos();
    [[-0.5 * s, -0.5 * c], [0.5 * c, -0.5 * s]]
}

fn undo(state: &mut StateVector<f64>, gate: Gate, theta: f64) -> Result<(), QuantumError> {
    match gate {
        Gate::Ry { qubit, .. } => state.apply_real_single(qubit, ry_matrix(-theta)),
        Gate::Cnot { control, target } => state.apply_cnot(control, target),
    }
}

/// `∂⟨Z_k⟩/∂θ_j` for every readout `k` (rows) and variational angle `j`
/// (columns), from one forward simulation and one backward sweep that
/// un-applies the gates.
///
/// With `|ψ⟩ = U_G … U_1 |0⟩`, the sweep keeps `|φ⟩ = U_g … U_1|0⟩` and
/// `|λ_k⟩ = U_{g+1}† … U_G† Z_k |ψ⟩`, and a parametrized gate contributes
/// `2 Re ⟨λ_k| ∂U_g |φ_{g−1}⟩`.
pub fn adjoint_gradient(spec: &CircuitSpec, features: &[f64], params: &[f64]) -> Result<Vec<Vec<f64>>, QuantumError> {
    let psi = prepare_state(spec, features, params)?;
    let mut phi = psi.clone();
    let mut lambdas = spec
        .readout
        .iter()
        .map(|&q| {
            let mut l = psi.clone();
            l.apply_z(q)?;
            Ok(l)
        })
        .collect::<Result<Vec<_>, QuantumError>>()?;
    let mut grad = vec![vec![0.0; spec.n_params]; spec.readout.len()];

    for gate in spec.gates().into_iter().rev() {
        let theta = match gate {
            Gate::Ry { angle: AngleSource::Feature(i), .. } => features[i],
            Gate::Ry { angle: AngleSource::Param(j), .. } => params[j],
            Gate::Cnot { .. } => 0.0,
        };
        undo(&mut phi, gate, theta)?;
        if let Gate::Ry { qubit, angle: AngleSource::Param(j) } = gate {
            let mut mu = phi.clone();
            mu.apply_real_single(qubit, ry_derivative(theta))?;
            for (k, lambda) in lambdas.iter().enumerate() {
                grad[k][j] += 2.0 * lambda.inner(&mu).re;
            }
        }
        for lambda in &mut lambdas {
            undo(lambda, gate, theta)?;
        }
    }
    Ok(grad)
}

/// Same layout as [`adjoint_gradient`], by the two-term shift rule
/// `(E(θ + π/2) − E(θ − π/2)) / 2`.
pub fn parameter_shift_gradient(
    spec: &CircuitSpec,
    features: &[f64],
    params: &[f64],
) -> Result<Vec<Vec<f64>>, QuantumError> {
    spec.check_sizes(features.len(), params.len())?;
    let mut grad = vec![vec![0.0; spec.n_params]; spec.readout.len()];
    let mut shifted = params.to_vec();
    for j in 0..spec.n_params {
        shifted[j] = params[j] + FRAC_PI_2;
        let plus = super::run_circuit(spec, features, &shifted)?;
        shifted[j] = params[j] - FRAC_PI_2;
        let minus = super::run_circuit(spec, features, &shifted)?;
        shifted[j] = params[j];
        for k in 0..spec.readout.len() {
            grad[k][j] = 0.5 * (plus[k] - minus[k]);
        }
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::circuit::{Block, Rotation};

    #[test]
    fn single_rotation_gradient_is_minus_sine() {
        let spec = CircuitSpec {
            n_qubits: 1,
            n_features: 0,
            n_params: 1,
            blocks: vec![Block {
                encoding: vec![],
                variational: vec![Rotation { qubit: 0, index: 0 }],
                entanglers: vec![],
            }],
            readout: vec![0],
        };
        for theta in [-2.5, -0.1, 0.0, 0.7, 3.0] {
            let g = adjoint_gradient(&spec, &[], &[theta]).unwrap();
            assert!((g[0][0] + theta.sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn parameter_outside_lightcone_has_zero_gradient() {
        // No entanglers: the angle on qubit 1 cannot affect ⟨Z_0⟩.
        let spec = CircuitSpec {
            n_qubits: 2,
            n_features: 0,
            n_params: 2,
            blocks: vec![Block {
                encoding: vec![],
                variational: vec![Rotation { qubit: 0, index: 0 }, Rotation { qubit: 1, index: 1 }],
                entanglers: vec![],
            }],
            readout: vec![0],
        };
        let g = adjoint_gradient(&spec, &[], &[0.4, 1.2]).unwrap();
        assert!(g[0][1].abs() < 1e-15);
        assert!((g[0][0] + 0.4f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn matches_parameter_shift_on_default_circuit() {
        let spec = CircuitSpec::hybrid_default();
        let features: Vec<f64> = (0..16).map(|i| 0.3 * i as f64 - 2.0).collect();
        let params: Vec<f64> = (0..16).map(|i| (i as f64 * 0.77).sin()).collect();
        let a = adjoint_gradient(&spec, &features, &params).unwrap();
        let p = parameter_shift_gradient(&spec, &features, &params).unwrap();
        for (ra, rp) in a.iter().zip(&p) {
            for (x, y) in ra.iter().zip(rp) {
                assert!((x - y).abs() <= 1e-10, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn size_mismatch() {
        let spec = CircuitSpec::hybrid_default();
        assert!(adjoint_gradient(&spec, &[0.0; 16], &[0.0; 2]).is_err());
        assert!(parameter_shift_gradient(&spec, &[0.0; 3], &[0.0; 16]).is_err());
    }
}
