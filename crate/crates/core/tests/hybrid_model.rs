mod common;

use qpinn::autodiff::{seed_spatial, DiffScalar, Real};
use qpinn::network::{PinnModel, Variant};
use qpinn::physics::{total_loss, FluidParams, LossWeights};
use qpinn::quantum::{run_circuit, Block, CircuitSpec};
use qpinn::trainer::{Execution, Objective};

use common::{fd4, random_cloud, rel_err};

fn zero_angle_identity_head(seed: u64) -> PinnModel {
    let model = PinnModel::init(seed, Variant::Hybrid);
    let trunk_len = model.trunk().len();
    let mut flat = model.flat_params();
    for a in &mut flat[trunk_len..trunk_len + 16] {
        *a = 0.0;
    }
    // Dense 4 → 4: weights row-major, then biases.
    let dense = &mut flat[trunk_len + 16..];
    for (k, w) in dense.iter_mut().enumerate() {
        *w = if k < 16 && k / 4 == k % 4 { 1.0 } else { 0.0 };
    }
    model.with_flat_params(&flat).unwrap()
}

#[test]
fn zero_angles_and_identity_head_reduce_to_trunk_plus_fixed_transform() {
    let model = zero_angle_identity_head(5);
    // The same reuploading circuit with the variational rotations removed.
    let mut fixed = CircuitSpec::hybrid_default();
    fixed.n_params = 0;
    fixed.blocks = fixed
        .blocks
        .into_iter()
        .map(|b| Block { variational: Vec::new(), ..b })
        .collect();
    fixed.validate().unwrap();

    let trunk = model.trunk().clone();
    let reference = |p: [f64; 3]| -> [DiffScalar; 4] {
        let features = trunk.forward(&seed_spatial(p).unwrap()).unwrap();
        let encoded: Vec<DiffScalar> = features.iter().map(|f| f.tanh() * DiffScalar::constant(std::f64::consts::PI)).collect();
        let z = run_circuit(&fixed, &encoded, &[]).unwrap();
        [z[0], z[1], z[2], z[3]]
    };

    let cloud = random_cloud(40, 9);
    let fluid = FluidParams { nu: 0.4, rho: 1.3 };
    let weights = LossWeights::default();
    let expected = total_loss(&cloud, &reference, &fluid, &weights);
    let got = Objective::new(&cloud, fluid, &weights, Execution::Deterministic).evaluate(&model).unwrap();
    for (a, b) in got.terms().iter().zip(expected.terms()) {
        assert!(rel_err(*a, b, 1e-300) <= 1e-12, "{a} vs {b}");
    }
}

#[test]
fn hybrid_spatial_derivatives_match_finite_differences() {
    let model = PinnModel::init(3, Variant::Hybrid);
    for p in [[0.1, -0.3, 0.7], [-0.8, 0.2, 0.05], [0.0, 0.0, 0.0]] {
        let out = model.forward_point(&seed_spatial(p).unwrap()).unwrap();
        for (k, o) in out.iter().enumerate() {
            let mut f = |q: &[f64]| model.predict(&[[q[0], q[1], q[2]]]).unwrap()[0][k];
            for i in 0..3 {
                let d1 = fd4(&mut f, &p, i, 1e-3);
                let d2 = {
                    let h = 1e-3;
                    let mut q = p;
                    q[i] += h;
                    let plus = f(&q);
                    q[i] = p[i] - h;
                    let minus = f(&q);
                    (plus - 2.0 * f(&p) + minus) / (h * h)
                };
                assert!(rel_err(o.grad[i], d1, 1e-6) <= 1e-5, "output {k} d/dx{i}: {} vs {d1}", o.grad[i]);
                assert!(rel_err(o.hess_diag[i], d2, 1e-4) <= 1e-3, "output {k} d2/dx{i}2: {} vs {d2}", o.hess_diag[i]);
            }
        }
    }
}

#[test]
fn full_size_network_laplacian_matches_finite_differences() {
    let model = PinnModel::init(21, Variant::Classical);
    let p = [0.3, -0.45, 0.6];
    let out = model.forward_point(&seed_spatial(p).unwrap()).unwrap();
    let h = 1e-3;
    for (k, o) in out.iter().enumerate() {
        let f = |q: [f64; 3]| model.predict(&[q]).unwrap()[0][k];
        let mut lap = 0.0;
        for i in 0..3 {
            let (mut a, mut b) = (p, p);
            a[i] += h;
            b[i] -= h;
            lap += (f(a) - 2.0 * f(p) + f(b)) / (h * h);
        }
        assert!(rel_err(o.laplacian(), lap, 1e-5) <= 1e-3, "output {k}: {} vs {lap}", o.laplacian());
    }
}

#[test]
fn hybrid_batched_and_pointwise_losses_agree() {
    let model = PinnModel::init(8, Variant::Hybrid);
    let cloud = random_cloud(300, 4);
    let fluid = FluidParams::default();
    let weights = LossWeights::default();
    let pointwise = |p: [f64; 3]| model.forward_point(&seed_spatial(p).unwrap()).unwrap();
    let a = total_loss(&cloud, &pointwise, &fluid, &weights);
    let b = Objective::new(&cloud, fluid, &weights, Execution::Parallel).evaluate(&model).unwrap();
    for (x, y) in a.terms().iter().zip(b.terms()) {
        assert!(rel_err(*x, y, 1e-300) <= 1e-12, "{x} vs {y}");
    }
}
