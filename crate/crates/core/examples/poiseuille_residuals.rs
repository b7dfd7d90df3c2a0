//! Pipe flow with a parabolic profile and a linear pressure drop satisfies
//! the steady Navier-Stokes equations exactly. Feed it through the loss and
//! watch the residual appear when the pressure gradient is off.
//!
//! cargo run --release --example poiseuille_residuals

use qpinn::autodiff::{seed_spatial, DiffScalar};
use qpinn::geometry::{PointCloud, Tag};
use qpinn::physics::{total_loss, FluidParams, LossWeights};

fn main() {
    let (radius, v_c) = (0.5, 1.0);
    let fluid = FluidParams { nu: 0.1, rho: 1.0 };
    let g_exact = 4.0 * fluid.nu * v_c / (radius * radius);

    let mut cloud = PointCloud::new();
    for i in 0..20 {
        for j in 0..20 {
            for k in 0..20 {
                let p = [0.1 * i as f64, -radius + 0.05 * j as f64, -radius + 0.05 * k as f64];
                if p[1] * p[1] + p[2] * p[2] < radius * radius {
                    cloud.push(p, Tag::Fluid);
                }
            }
        }
    }
    println!("{} interior points, G = {g_exact}", cloud.len());

    for factor in [1.0, 1.01, 1.1, 0.5] {
        let g = factor * g_exact;
        let field = |p: [f64; 3]| -> [DiffScalar; 4] {
            let [x, y, z] = seed_spatial(p).unwrap();
            let c = DiffScalar::constant;
            let vx = c(v_c) * (c(1.0) - (y * y + z * z) / c(radius * radius));
            [vx, c(0.0), c(0.0), c(0.0) - c(g) * x]
        };
        let loss = total_loss(&cloud, &field, &fluid, &LossWeights::default());
        println!(
            "G x {factor:<4}: momentum MSE {:.3e} {:.3e} {:.3e}, continuity {:.3e}",
            loss.momentum[0], loss.momentum[1], loss.momentum[2], loss.continuity
        );
    }
}
