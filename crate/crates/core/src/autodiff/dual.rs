//! Forward-mode numbers carrying a value together with its spatial gradient
//! and the diagonal of its spatial Hessian.
//!
//! The Navier-Stokes momentum residual needs `∂_i u` and the Laplacian
//! `Σ_i ∂²_i u`, so only the pure second derivatives are propagated. For a
//! unary map `f` the payload transforms as
//!
//! ```text
//! value   f(v)
//! grad_i  f'(v) g_i
//! hess_i  f''(v) g_i² + f'(v) h_i
//! ```
//!
//! The component type `T` is itself a [`Real`], so the same code runs on
//! plain `f64` and on parameter-tape variables.

use std::ops::{Add, Div, Mul, Neg, Sub};

use super::scalar::Real;
use super::AutodiffError;

/// Number of spatial input coordinates tracked by the payload.
pub const SPATIAL_DIMS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffScalar<T = f64> {
    pub value: T,
    /// `∂/∂x, ∂/∂y, ∂/∂z`
    pub grad: [T; SPATIAL_DIMS],
    /// `∂²/∂x², ∂²/∂y², ∂²/∂z²`
    pub hess_diag: [T; SPATIAL_DIMS],
}

impl<T: Real> DiffScalar<T> {
    pub fn constant(value: T) -> Self {
        let z = T::zero();
        Self {
            value,
            grad: [z; SPATIAL_DIMS],
            hess_diag: [z; SPATIAL_DIMS],
        }
    }

    /// Independent variable along spatial `axis`.
    pub fn variable(value: T, axis: usize) -> Self {
        let mut s = Self::constant(value);
        s.grad[axis] = T::one();
        s
    }

    pub fn new(value: T, grad: [T; SPATIAL_DIMS], hess_diag: [T; SPATIAL_DIMS]) -> Self {
        Self {
            value,
            grad,
            hess_diag,
        }
    }

    /// Laplacian `Σ_i ∂²_i`.
    pub fn laplacian(&self) -> T {
        self.hess_diag[0] + self.hess_diag[1] + self.hess_diag[2]
    }

    /// Apply a unary map given its value and first two derivatives at
    /// `self.value`.
    #[inline]
    pub fn chain(self, f: T, df: T, d2f: T) -> Self {
        let mut out = Self::constant(f);
        for i in 0..SPATIAL_DIMS {
            let g = self.grad[i];
            out.grad[i] = df * g;
            out.hess_diag[i] = d2f * g * g + df * self.hess_diag[i];
        }
        out
    }

    /// Multiply every slot by a scalar of the component type.
    #[inline]
    pub fn mul_component(self, k: T) -> Self {
        Self {
            value: self.value * k,
            grad: self.grad.map(|g| g * k),
            hess_diag: self.hess_diag.map(|h| h * k),
        }
    }

    /// Add a scalar of the component type to the value only.
    #[inline]
    pub fn add_component(mut self, k: T) -> Self {
        self.value = self.value + k;
        self
    }

    pub fn recip(self) -> Self {
        let inv = T::one() / self.value;
        let inv2 = inv * inv;
        self.chain(inv, -inv2, (inv2 * inv).scale(2.0))
    }

    /// `x · σ(x)`, the sigmoid linear unit.
    pub fn silu(self) -> Self {
        let s = self.value.sigmoid();
        let one = T::one();
        let ds = s * (one - s);
        let f = self.value * s;
        let df = s + self.value * ds;
        let d2f = ds * (T::from_f64(2.0) + self.value * (one - s.scale(2.0)));
        self.chain(f, df, d2f)
    }

    pub fn map_components<U: Real>(&self, f: impl Fn(T) -> U) -> DiffScalar<U> {
        DiffScalar {
            value: f(self.value),
            grad: self.grad.map(&f),
            hess_diag: self.hess_diag.map(&f),
        }
    }
}

/// Seed the three spatial coordinates of a point as independent variables.
pub fn seed_spatial(point: [f64; SPATIAL_DIMS]) -> Result<[DiffScalar<f64>; SPATIAL_DIMS], AutodiffError> {
    if let Some(axis) = point.iter().position(|c| !c.is_finite()) {
        return Err(AutodiffError::NonFiniteInput { axis });
    }
    Ok(std::array::from_fn(|i| DiffScalar::variable(point[i], i)))
}

pub fn silu<T: Real>(x: DiffScalar<T>) -> DiffScalar<T> {
    x.silu()
}

impl<T: Real> Add for DiffScalar<T> {
    type Output = Self;

    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self {
            value: self.value + rhs.value,
            grad: std::array::from_fn(|i| self.grad[i] + rhs.grad[i]),
            hess_diag: std::array::from_fn(|i| self.hess_diag[i] + rhs.hess_diag[i]),
        }
    }
}

impl<T: Real> Sub for DiffScalar<T> {
    type Output = Self;

    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self {
            value: self.value - rhs.value,
            grad: std::array::from_fn(|i| self.grad[i] - rhs.grad[i]),
            hess_diag: std::array::from_fn(|i| self.hess_diag[i] - rhs.hess_diag[i]),
        }
    }
}

impl<T: Real> Mul for DiffScalar<T> {
    type Output = Self;

    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (self.value, rhs.value);
        Self {
            value: a * b,
            grad: std::array::from_fn(|i| self.grad[i] * b + a * rhs.grad[i]),
            hess_diag: std::array::from_fn(|i| {
                self.hess_diag[i] * b
                    + (self.grad[i] * rhs.grad[i]).scale(2.0)
                    + a * rhs.hess_diag[i]
            }),
        }
    }
}

impl<T: Real> Div for DiffScalar<T> {
    type Output = Self;

    #[inline]
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl<T: Real> Neg for DiffScalar<T> {
    type Output = Self;

    #[inline]
    fn neg(self) -> Self {
        Self {
            value: -self.value,
            grad: self.grad.map(|g| -g),
            hess_diag: self.hess_diag.map(|h| -h),
        }
    }
}

impl<T: Real> Real for DiffScalar<T> {
    fn from_f64(v: f64) -> Self {
        Self::constant(T::from_f64(v))
    }

    fn value(&self) -> f64 {
        self.value.value()
    }

    fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    fn sin(self) -> Self {
        let (s, c) = (self.value.sin(), self.value.cos());
        self.chain(s, c, -s)
    }

    fn cos(self) -> Self {
        let (s, c) = (self.value.sin(), self.value.cos());
        self.chain(c, -s, -c)
    }

    fn sigmoid(self) -> Self {
        let s = self.value.sigmoid();
        let ds = s * (T::one() - s);
        self.chain(s, ds, ds * (T::one() - s.scale(2.0)))
    }

    fn tanh(self) -> Self {
        let t = self.value.tanh();
        let dt = T::one() - t * t;
        self.chain(t, dt, (t * dt).scale(-2.0))
    }

    fn scale(self, k: f64) -> Self {
        Self {
            value: self.value.scale(k),
            grad: self.grad.map(|g| g.scale(k)),
            hess_diag: self.hess_diag.map(|h| h.scale(k)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd1(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    fn fd2(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
    }

    #[test]
    fn seeding_sets_unit_gradients() {
        let [x, y, z] = seed_spatial([1.0, 2.0, 3.0]).unwrap();
        assert_eq!(x.value, 1.0);
        assert_eq!(x.grad, [1.0, 0.0, 0.0]);
        assert_eq!(x.hess_diag, [0.0; 3]);
        assert_eq!(y.grad, [0.0, 1.0, 0.0]);
        assert_eq!(z.grad, [0.0, 0.0, 1.0]);

        let origin = seed_spatial([0.0; 3]).unwrap();
        for (i, c) in origin.iter().enumerate() {
            assert_eq!(c.value, 0.0);
            assert_eq!(c.grad[i], 1.0);
        }
    }

    #[test]
    fn seeding_rejects_non_finite() {
        assert!(matches!(
            seed_spatial([0.0, f64::NAN, 0.0]),
            Err(AutodiffError::NonFiniteInput { axis: 1 })
        ));
        assert!(seed_spatial([f64::INFINITY, 0.0, 0.0]).is_err());
    }

    #[test]
    fn product_of_seeded_coordinates() {
        let [x, y, _] = seed_spatial([2.0, 3.0, 0.0]).unwrap();
        let p = x * y;
        assert_eq!(p.value, 6.0);
        assert_eq!(p.grad, [3.0, 2.0, 0.0]);
        assert_eq!(p.hess_diag, [0.0; 3]);
    }

    #[test]
    fn constants_have_no_payload() {
        let c = DiffScalar::<f64>::from_f64(4.2);
        assert_eq!(c.grad, [0.0; 3]);
        assert_eq!(c.hess_diag, [0.0; 3]);
        let e = c.exp().sin();
        assert_eq!(e.grad, [0.0; 3]);
        assert_eq!(e.hess_diag, [0.0; 3]);
    }

    #[test]
    fn silu_at_zero() {
        let x = DiffScalar::variable(0.0, 0);
        let s = silu(x);
        assert_eq!(s.value, 0.0);
        assert!((s.grad[0] - 0.5).abs() < 1e-15);
        // σ'(0)·2 = 0.5
        assert!((s.hess_diag[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn silu_matches_finite_differences_at_three() {
        let f = |x: f64| x * crate::autodiff::scalar::logistic(x);
        let s = silu(DiffScalar::variable(3.0, 0));
        assert!(rel(s.grad[0], fd1(f, 3.0, 1e-5)) < 1e-6);
        assert!(rel(s.hess_diag[0], fd2(f, 3.0, 1e-4)) < 1e-4);
    }

    #[test]
    fn primitives_match_finite_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        type Op = (&'static str, fn(DiffScalar) -> DiffScalar, fn(f64) -> f64);
        let ops: [Op; 9] = [
            ("add", |x| x + x.scale(0.7) + DiffScalar::from_f64(1.5), |x| x + 0.7 * x + 1.5),
            ("mul", |x| x * x.sin(), |x| x * x.sin()),
            ("div", |x| x.sin() / (x * x + DiffScalar::from_f64(1.0)), |x| x.sin() / (x * x + 1.0)),
            ("exp", |x| x.scale(0.5).exp(), |x| (0.5 * x).exp()),
            ("sigmoid", |x| x.sigmoid(), crate::autodiff::scalar::logistic),
            ("sin", |x| x.sin(), f64::sin),
            ("cos", |x| x.cos(), f64::cos),
            ("tanh", |x| x.tanh(), f64::tanh),
            ("affine", |x| x.scale(-1.3).add_component(0.4), |x| -1.3 * x + 0.4),
        ];
        for (name, op, f) in ops {
            for _ in 0..100 {
                let x0: f64 = rng.random_range(-5.0..5.0);
                let d = op(DiffScalar::variable(x0, 1));
                assert!((d.value - f(x0)).abs() < 1e-12, "{name} value");
                let g = fd1(f, x0, 1e-5);
                let h = fd2(f, x0, 1e-4);
                let eg = (d.grad[1] - g).abs() / g.abs().max(1e-3);
                let eh = (d.hess_diag[1] - h).abs() / h.abs().max(1e-2);
                assert!(eg <= 1e-6, "{name} first derivative at {x0}: {} vs {g}", d.grad[1]);
                assert!(eh <= 1e-4, "{name} second derivative at {x0}: {} vs {h}", d.hess_diag[1]);
            }
        }
    }

    #[test]
    fn derivative_is_linear() {
        let x = DiffScalar::variable(0.8, 2);
        let f = x.sin();
        let g = x.exp();
        let combo = f.scale(2.0) + g.scale(-3.0);
        for i in 0..3 {
            assert_eq!(combo.grad[i], 2.0 * f.grad[i] + -3.0 * g.grad[i]);
            assert_eq!(combo.hess_diag[i], 2.0 * f.hess_diag[i] + -3.0 * g.hess_diag[i]);
        }
    }
}
