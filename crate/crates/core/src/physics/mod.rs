//! Steady incompressible Navier-Stokes residuals and the composite PINN loss.
//!
//! The loss is the sum of seven mean-squared terms: three momentum
//! components and continuity averaged over fluid points, and one Dirichlet
//! mismatch per boundary group averaged over that group.

mod log_csv;

pub use log_csv::{read_loss_csv, write_loss_csv, LOSS_CSV_HEADER};

use serde::{Deserialize, Serialize};

use crate::autodiff::{DiffScalar, Real};
use crate::geometry::{PointCloud, Region, Tag};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FluidParams {
    /// Kinematic viscosity.
    pub nu: f64,
    /// Density.
    pub rho: f64,
}

impl Default for FluidParams {
    fn default() -> Self {
        Self { nu: 1.0, rho: 1.0 }
    }
}

impl FluidParams {
    pub fn validate(&self) -> Result<(), PhysicsError> {
        if !(self.nu > 0.0 && self.nu.is_finite()) || !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(PhysicsError::InvalidFluid { nu: self.nu, rho: self.rho });
        }
        Ok(())
    }
}

/// Multipliers of the seven loss terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LossWeights {
    pub momentum_x: f64,
    pub momentum_y: f64,
    pub momentum_z: f64,
    pub continuity: f64,
    pub bc_wall: f64,
    pub bc_inlet: f64,
    pub bc_outlet: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self::uniform(1.0)
    }
}

impl LossWeights {
    pub fn uniform(w: f64) -> Self {
        Self {
            momentum_x: w,
            momentum_y: w,
            momentum_z: w,
            continuity: w,
            bc_wall: w,
            bc_inlet: w,
            bc_outlet: w,
        }
    }

    pub fn as_array(&self) -> [f64; 7] {
        [
            self.momentum_x,
            self.momentum_y,
            self.momentum_z,
            self.continuity,
            self.bc_wall,
            self.bc_inlet,
            self.bc_outlet,
        ]
    }
}

/// Weighted loss terms. `total` is the sum of the seven terms.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub momentum: [f64; 3],
    pub continuity: f64,
    pub bc_wall: f64,
    pub bc_inlet: f64,
    pub bc_outlet: f64,
    pub total: f64,
}

impl LossBreakdown {
    pub fn from_terms(terms: [f64; 7]) -> Self {
        Self {
            momentum: [terms[0], terms[1], terms[2]],
            continuity: terms[3],
            bc_wall: terms[4],
            bc_inlet: terms[5],
            bc_outlet: terms[6],
            total: terms.iter().sum(),
        }
    }

    pub fn terms(&self) -> [f64; 7] {
        [
            self.momentum[0],
            self.momentum[1],
            self.momentum[2],
            self.continuity,
            self.bc_wall,
            self.bc_inlet,
            self.bc_outlet,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.total.is_finite() && self.terms().iter().all(|t| t.is_finite())
    }

    /// Name of the first non-finite term, if any.
    pub fn first_non_finite(&self) -> Option<&'static str> {
        const NAMES: [&str; 7] = [
            "momentum_x",
            "momentum_y",
            "momentum_z",
            "continuity",
            "bc_wall",
            "bc_inlet",
            "bc_outlet",
        ];
        self.terms()
            .iter()
            .position(|t| !t.is_finite())
            .map(|i| NAMES[i])
            .or(if self.total.is_finite() { None } else { Some("total") })
    }
}

/// Velocity and pressure at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldPrediction<T = f64> {
    pub v: [T; 3],
    pub p: T,
}

impl<T: Copy> FieldPrediction<T> {
    /// From the network's `(v_x, v_y, v_z, p)` output.
    pub fn from_outputs(out: &[T; 4]) -> Self {
        Self {
            v: [out[0], out[1], out[2]],
            p: out[3],
        }
    }
}

/// Momentum residual
/// `r_i = −Σ_j v_j ∂_j v_i + ν Σ_j ∂²_j v_i − (1/ρ) ∂_i p`.
pub fn ns_residual<T: Real>(v: &[DiffScalar<T>; 3], p: &DiffScalar<T>, fluid: &FluidParams) -> [T; 3] {
    std::array::from_fn(|i| {
        let convective = v[0].value * v[i].grad[0] + v[1].value * v[i].grad[1] + v[2].value * v[i].grad[2];
        -convective + v[i].laplacian().scale(fluid.nu) - p.grad[i].scale(1.0 / fluid.rho)
    })
}

/// `∇·v`
pub fn continuity_residual<T: Real>(v: &[DiffScalar<T>; 3]) -> T {
    v[0].grad[0] + v[1].grad[1] + v[2].grad[2]
}

/// Squared mismatch of one point against its constraint, placed in the slot
/// of the loss term it feeds.
pub fn point_squares<T: Real>(tag: &Tag, out: &[DiffScalar<T>; 4], fluid: &FluidParams) -> [Option<T>; 7] {
    let mut sq = [None; 7];
    match tag {
        Tag::Fluid => {
            let v = [out[0], out[1], out[2]];
            let r = ns_residual(&v, &out[3], fluid);
            for i in 0..3 {
                sq[i] = Some(r[i].square());
            }
            sq[3] = Some(continuity_residual(&v).square());
        }
        Tag::Wall => {
            sq[4] = Some(out[0].value.square() + out[1].value.square() + out[2].value.square());
        }
        Tag::Inlet { velocity } => {
            let d = |k: usize| out[k].value - T::from_f64(velocity[k]);
            sq[5] = Some(d(0).square() + d(1).square() + d(2).square());
        }
        Tag::Outlet { pressure } => {
            sq[6] = Some((out[3].value - T::from_f64(*pressure)).square());
        }
    }
    sq
}

/// Number of points feeding each of the seven terms.
pub fn term_counts(cloud: &PointCloud) -> [usize; 7] {
    let fluid = cloud.count(Region::Fluid);
    [
        fluid,
        fluid,
        fluid,
        fluid,
        cloud.count(Region::Wall),
        cloud.count(Region::Inlet),
        cloud.count(Region::Outlet),
    ]
}

/// Per-term factor turning a sum of squares into a weighted mean.
/// Empty groups contribute nothing.
pub fn term_scales(counts: &[usize; 7], weights: &LossWeights) -> [f64; 7] {
    let w = weights.as_array();
    std::array::from_fn(|k| if counts[k] == 0 { 0.0 } else { w[k] / counts[k] as f64 })
}

pub(crate) fn warn_empty_groups(cloud: &PointCloud) {
    for region in Region::ALL {
        if cloud.count(region) == 0 {
            log::warn!("no {region} points: the corresponding loss term is 0");
        }
    }
}

/// Dirichlet mismatches `(wall, inlet, outlet)`, each the mean over its own
/// group: `⟨|v|²⟩_wall`, `⟨|v − v_0|²⟩_inlet`, `⟨(p − p_0)²⟩_outlet`.
pub fn bc_loss(preds: &[FieldPrediction], tags: &[Tag]) -> Result<(f64, f64, f64), PhysicsError> {
    if preds.len() != tags.len() {
        return Err(PhysicsError::Misaligned {
            predictions: preds.len(),
            points: tags.len(),
        });
    }
    let mut sums = [0.0; 3];
    let mut counts = [0usize; 3];
    for (pred, tag) in preds.iter().zip(tags) {
        let (slot, sq) = match tag {
            Tag::Fluid => continue,
            Tag::Wall => (0, pred.v.iter().map(|v| v * v).sum()),
            Tag::Inlet { velocity } => (1, pred.v.iter().zip(velocity).map(|(v, v0)| (v - v0).powi(2)).sum()),
            Tag::Outlet { pressure } => (2, (pred.p - pressure).powi(2)),
        };
        sums[slot] += sq;
        counts[slot] += 1;
    }
    let mean = |k: usize| {
        if counts[k] == 0 {
            log::warn!("empty boundary group {}: term contributes 0", ["wall", "inlet", "outlet"][k]);
            0.0
        } else {
            sums[k] / counts[k] as f64
        }
    };
    Ok((mean(0), mean(1), mean(2)))
}

/// Anything that yields `(v, p)` with spatial derivative payloads.
pub trait FieldModel {
    fn fields(&self, points: &[[f64; 3]]) -> Vec<[DiffScalar<f64>; 4]>;
}

impl<F> FieldModel for F
where
    F: Fn([f64; 3]) -> [DiffScalar<f64>; 4],
{
    fn fields(&self, points: &[[f64; 3]]) -> Vec<[DiffScalar<f64>; 4]> {
        points.iter().map(|&p| self(p)).collect()
    }
}

/// Evaluate every loss term of `model` on `cloud`.
pub fn total_loss(cloud: &PointCloud, model: &impl FieldModel, fluid: &FluidParams, weights: &LossWeights) -> LossBreakdown {
    warn_empty_groups(cloud);
    let outputs = model.fields(cloud.points());
    accumulate(cloud.tags(), &outputs, &term_scales(&term_counts(cloud), weights), fluid)
}

/// Sum the scaled squares of `outputs` in point order.
pub(crate) fn accumulate(tags: &[Tag], outputs: &[[DiffScalar<f64>; 4]], scales: &[f64; 7], fluid: &FluidParams) -> LossBreakdown {
    let mut terms = [0.0; 7];
    for (tag, out) in tags.iter().zip(outputs) {
        for (k, sq) in point_squares(tag, out, fluid).into_iter().enumerate() {
            if let Some(sq) = sq {
                terms[k] += scales[k] * sq;
            }
        }
    }
    LossBreakdown::from_terms(terms)
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PhysicsError {
    #[error("fluid parameters must be positive and finite (nu = {nu}, rho = {rho})")]
    InvalidFluid { nu: f64, rho: f64 },
    #[error("{predictions} predictions for {points} points")]
    Misaligned { predictions: usize, points: usize },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::seed_spatial;

    fn fluid() -> FluidParams {
        FluidParams::default()
    }

    #[test]
    fn quiescent_field_has_no_residual() {
        let zero = DiffScalar::constant(0.0);
        let p = DiffScalar::constant(3.5);
        assert_eq!(ns_residual(&[zero; 3], &p, &fluid()), [0.0; 3]);
        assert_eq!(continuity_residual(&[zero; 3]), 0.0);
    }

    /// `v = (v_c(1 − (y²+z²)/R²), 0, 0)`, `p = −G x`, `G = 4 ν v_c / R²`.
    #[test]
    fn poiseuille_flow_is_an_exact_solution() {
        let fluid = FluidParams { nu: 0.7, rho: 1.3 };
        let (vc, r) = (1.8, 0.6);
        // Pressure gradient balances ρ ν Δv for general ρ.
        let g = 4.0 * fluid.nu * fluid.rho * vc / (r * r);
        for pt in [[0.1, 0.2, -0.1], [1.5, -0.3, 0.4], [-2.0, 0.0, 0.0]] {
            let [x, y, z] = seed_spatial(pt).unwrap();
            let c = |v: f64| DiffScalar::constant(v);
            let vx = c(vc) * (c(1.0) - (y * y + z * z).scale(1.0 / (r * r)));
            let p = x.scale(-g);
            let v = [vx, c(0.0), c(0.0)];
            let res = ns_residual(&v, &p, &fluid);
            assert!(res.iter().all(|r| r.abs() < 1e-10), "{res:?}");
            assert!(continuity_residual(&v).abs() < 1e-15);
        }
    }

    #[test]
    fn shear_flow_is_an_exact_solution() {
        let [_, y, _] = seed_spatial([0.3, 0.9, -0.2]).unwrap();
        let c = DiffScalar::constant(0.0);
        assert_eq!(ns_residual(&[y, c, c], &c, &fluid()), [0.0; 3]);
    }

    #[test]
    fn continuity_examples() {
        let [x, y, z] = seed_spatial([0.4, -1.0, 2.0]).unwrap();
        let c = DiffScalar::constant(1.0);
        assert_eq!(continuity_residual(&[c, c, c]), 0.0);
        assert_eq!(continuity_residual(&[x, y, z.scale(-2.0)]), 0.0);
        assert_eq!(continuity_residual(&[x, c.scale(0.0), c.scale(0.0)]), 1.0);
    }

    #[test]
    fn residual_terms_by_hand() {
        // v = (x², xy, 0), p = z: convective_x = x²·2x + xy·0 = 2x³,
        // Δv_x = 2, ∂_x p = 0.
        let [x, y, z] = seed_spatial([1.5, 2.0, 0.3]).unwrap();
        let zero = DiffScalar::constant(0.0);
        let v = [x * x, x * y, zero];
        let r = ns_residual(&v, &z, &fluid());
        assert!((r[0] - (-2.0 * 1.5f64.powi(3) + 2.0)).abs() < 1e-12);
        // convective_y = x²·y + xy·x = 2x²y, Δ(xy) = 0
        assert!((r[1] + 2.0 * 1.5 * 1.5 * 2.0).abs() < 1e-12);
        assert!((r[2] + 1.0).abs() < 1e-12);
        assert!((continuity_residual(&v) - (2.0 * 1.5 + 1.5)).abs() < 1e-12);
    }

    #[test]
    fn bc_examples() {
        let tags = [Tag::Wall, Tag::Inlet { velocity: [0.0, 0.0, -1.0] }, Tag::Outlet { pressure: 0.0 }, Tag::Fluid];
        let exact = [
            FieldPrediction { v: [0.0; 3], p: 9.0 },
            FieldPrediction { v: [0.0, 0.0, -1.0], p: -4.0 },
            FieldPrediction { v: [5.0, 1.0, 0.0], p: 0.0 },
            FieldPrediction { v: [1.0; 3], p: 1.0 },
        ];
        assert_eq!(bc_loss(&exact, &tags).unwrap(), (0.0, 0.0, 0.0));

        let wall = bc_loss(&[FieldPrediction { v: [1.0, 0.0, 0.0], p: 0.0 }], &[Tag::Wall]).unwrap();
        assert_eq!(wall, (1.0, 0.0, 0.0));
        let outlet = bc_loss(&[FieldPrediction { v: [0.0; 3], p: 2.0 }], &[Tag::Outlet { pressure: 0.0 }]).unwrap();
        assert_eq!(outlet, (0.0, 0.0, 4.0));
        assert!(bc_loss(&exact[..2], &tags).is_err());
    }

    fn small_cloud() -> PointCloud {
        let mut c = PointCloud::new();
        c.push([0.0, 0.0, 0.0], Tag::Fluid);
        c.push([0.1, 0.0, 0.2], Tag::Fluid);
        c.push([0.5, 0.0, 0.0], Tag::Wall);
        c.push([0.0, 0.0, 1.0], Tag::Inlet { velocity: [0.0, 0.0, -1.0] });
        c.push([0.1, 0.0, 1.0], Tag::Inlet { velocity: [0.0, 0.0, -0.5] });
        c.push([0.0, 0.0, -1.0], Tag::Outlet { pressure: 0.0 });
        c
    }

    #[test]
    fn zero_model_leaves_only_inlet_mismatch() {
        let cloud = small_cloud();
        let zero = |_: [f64; 3]| [DiffScalar::constant(0.0); 4];
        let loss = total_loss(&cloud, &zero, &fluid(), &LossWeights::default());
        assert_eq!(loss.momentum, [0.0; 3]);
        assert_eq!(loss.continuity, 0.0);
        assert_eq!(loss.bc_wall, 0.0);
        assert_eq!(loss.bc_outlet, 0.0);
        assert!((loss.bc_inlet - (1.0 + 0.25) / 2.0).abs() < 1e-15);
        assert_eq!(loss.total, loss.bc_inlet);
    }

    fn wavy(p: [f64; 3]) -> [DiffScalar<f64>; 4] {
        let [x, y, z] = seed_spatial(p).unwrap();
        [(x * y).sin(), z.exp(), (x + z).cos(), y * y]
    }

    #[test]
    fn total_is_sum_of_terms() {
        let cloud = small_cloud();
        let loss = total_loss(&cloud, &wavy, &fluid(), &LossWeights::default());
        let sum: f64 = loss.terms().iter().sum();
        assert!((loss.total - sum).abs() <= 1e-15 * sum.abs().max(1.0));
        assert!(loss.terms().iter().all(|&t| t >= 0.0));
    }

    #[test]
    fn duplicated_fluid_points_leave_pde_terms_unchanged() {
        let cloud = small_cloud();
        let mut doubled = cloud.clone();
        for (p, tag) in cloud.iter() {
            if tag == Tag::Fluid {
                doubled.push(p, tag);
            }
        }
        let a = total_loss(&cloud, &wavy, &fluid(), &LossWeights::default());
        let b = total_loss(&doubled, &wavy, &fluid(), &LossWeights::default());
        for i in 0..3 {
            assert!((a.momentum[i] - b.momentum[i]).abs() < 1e-14);
        }
        assert!((a.continuity - b.continuity).abs() < 1e-14);
    }

    #[test]
    fn permutation_invariance() {
        let cloud = small_cloud();
        let order = [5, 3, 1, 0, 4, 2];
        let shuffled = cloud.subset(&order);
        let a = total_loss(&cloud, &wavy, &fluid(), &LossWeights::default());
        let b = total_loss(&shuffled, &wavy, &fluid(), &LossWeights::default());
        for (x, y) in a.terms().iter().zip(b.terms()) {
            assert!((x - y).abs() <= 1e-14 * x.abs().max(1.0));
        }
    }

    #[test]
    fn weights_scale_terms() {
        let cloud = small_cloud();
        let base = total_loss(&cloud, &wavy, &fluid(), &LossWeights::default());
        let mut w = LossWeights::default();
        w.bc_inlet = 3.0;
        w.momentum_y = 0.5;
        let scaled = total_loss(&cloud, &wavy, &fluid(), &w);
        assert!((scaled.bc_inlet - 3.0 * base.bc_inlet).abs() < 1e-14);
        assert!((scaled.momentum[1] - 0.5 * base.momentum[1]).abs() < 1e-14);
        let sum: f64 = scaled.terms().iter().sum();
        assert!((scaled.total - sum).abs() < 1e-14);
    }

    #[test]
    fn empty_groups_contribute_zero() {
        let mut cloud = PointCloud::new();
        cloud.push([0.0; 3], Tag::Fluid);
        let loss = total_loss(&cloud, &wavy, &fluid(), &LossWeights::default());
        assert_eq!((loss.bc_wall, loss.bc_inlet, loss.bc_outlet), (0.0, 0.0, 0.0));
        assert!(loss.total > 0.0);
    }

    #[test]
    fn fluid_validation() {
        assert!(FluidParams { nu: 0.0, rho: 1.0 }.validate().is_err());
        assert!(FluidParams { nu: 1.0, rho: -1.0 }.validate().is_err());
        FluidParams::default().validate().unwrap();
    }
}
