//! Spatial derivatives with `DiffScalar`, and parameter gradients of a
//! spatial derivative by running the same code on tape variables.
//!
//! cargo run --release --example autodiff_derivatives

use qpinn::autodiff::{seed_spatial, silu, DiffScalar, ParamTape, Real};

/// `silu(a·x + b·y²) · z`
fn f<T: Real>(a: T, b: T, p: [DiffScalar<T>; 3]) -> DiffScalar<T> {
    let [x, y, z] = p;
    silu(DiffScalar::constant(a) * x + DiffScalar::constant(b) * y * y) * z
}

fn main() {
    let (a, b) = (0.7, -1.2);
    let point = [0.3, -0.5, 2.0];
    let v = f(a, b, seed_spatial(point).unwrap());
    println!("f         = {:.6}", v.value);
    println!("grad f    = {:.6?}", v.grad);
    println!("diag hess = {:.6?}", v.hess_diag);
    println!("laplacian = {:.6}", v.laplacian());

    // d(Δf)/da and d(Δf)/db in one reverse sweep.
    let tape = ParamTape::new();
    let (pa, pb) = (tape.param(a), tape.param(b));
    let seeded = seed_spatial(point).unwrap().map(|s| s.map_components(ParamTape::constant));
    let lap = f(pa, pb, seeded).laplacian();
    let adj = tape.backward(lap).unwrap();
    let h = 1e-5;
    let lap_at = |a: f64, b: f64| f(a, b, seed_spatial(point).unwrap()).laplacian();
    println!(
        "d(lap)/da = {:.8} (central difference {:.8})",
        adj.wrt(&pa),
        (lap_at(a + h, b) - lap_at(a - h, b)) / (2.0 * h)
    );
    println!(
        "d(lap)/db = {:.8} (central difference {:.8})",
        adj.wrt(&pb),
        (lap_at(a, b + h) - lap_at(a, b - h)) / (2.0 * h)
    );
}
