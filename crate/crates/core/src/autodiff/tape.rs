//! Reverse-mode tape over scalar parameters.
//!
//! Each recorded node stores at most two parent indices with the local
//! partial derivatives, so the backward sweep is a single reverse pass over
//! a flat vector. Constants never touch the tape, and multiplying by an exact
//! constant zero folds to a constant, which keeps circuits with identically
//! zero imaginary parts cheap.

use std::cell::RefCell;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::scalar::{logistic, Real};
use super::AutodiffError;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct Node {
    parents: [u32; 2],
    partials: [f64; 2],
}

#[derive(Debug, Default)]
pub struct ParamTape {
    nodes: RefCell<Vec<Node>>,
    params: RefCell<Vec<u32>>,
}

/// A scalar either recorded on a [`ParamTape`] or a free constant.
#[derive(Clone, Copy)]
pub struct Var<'t> {
    val: f64,
    slot: Option<(&'t ParamTape, u32)>,
}

impl fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.slot {
            Some((_, idx)) => write!(f, "Var({} @ {idx})", self.val),
            None => write!(f, "Const({})", self.val),
        }
    }
}

impl ParamTape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(nodes: usize) -> Self {
        Self {
            nodes: RefCell::new(Vec::with_capacity(nodes)),
            params: RefCell::new(Vec::new()),
        }
    }

    /// Register a trainable parameter. Its gradient is reported by
    /// [`Adjoints::parameters`] in registration order.
    pub fn param(&self, value: f64) -> Var<'_> {
        let v = self.leaf(value);
        if let Some((_, idx)) = v.slot {
            self.params.borrow_mut().push(idx);
        }
        v
    }

    /// Unregistered input whose adjoint is available via [`Adjoints::wrt`].
    pub fn leaf(&self, value: f64) -> Var<'_> {
        self.push([NONE, NONE], [0.0, 0.0], value)
    }

    pub fn constant(value: f64) -> Var<'static> {
        Var { val: value, slot: None }
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_params(&self) -> usize {
        self.params.borrow().len()
    }

    /// Drop all records so the allocation can be reused.
    pub fn reset(&mut self) {
        self.nodes.get_mut().clear();
        self.params.get_mut().clear();
    }

    fn push(&self, parents: [u32; 2], partials: [f64; 2], val: f64) -> Var<'_> {
        let mut nodes = self.nodes.borrow_mut();
        let idx = nodes.len() as u32;
        nodes.push(Node { parents, partials });
        Var {
            val,
            slot: Some((self, idx)),
        }
    }

    /// Propagate adjoints from `loss` back to every node on the tape.
    pub fn backward(&self, loss: Var<'_>) -> Result<Adjoints, AutodiffError> {
        let (tape, root) = loss.slot.ok_or(AutodiffError::NotOnTape)?;
        if !std::ptr::eq(tape, self) {
            return Err(AutodiffError::NotOnTape);
        }
        let nodes = self.nodes.borrow();
        if root as usize >= nodes.len() {
            return Err(AutodiffError::NotOnTape);
        }
        let mut adj = vec![0.0; root as usize + 1];
        adj[root as usize] = 1.0;
        for i in (0..=root as usize).rev() {
            let a = adj[i];
            if a == 0.0 {
                continue;
            }
            let node = nodes[i];
            for k in 0..2 {
                let p = node.parents[k];
                if p != NONE {
                    adj[p as usize] += a * node.partials[k];
                }
            }
        }
        Ok(Adjoints {
            adj,
            params: self.params.borrow().clone(),
        })
    }
}

/// Result of a backward sweep.
#[derive(Debug, Clone)]
pub struct Adjoints {
    adj: Vec<f64>,
    params: Vec<u32>,
}

impl Adjoints {
    /// `∂loss/∂v`; zero for constants and for nodes recorded after the loss.
    pub fn wrt(&self, v: &Var<'_>) -> f64 {
        match v.slot {
            Some((_, idx)) => self.adj.get(idx as usize).copied().unwrap_or(0.0),
            None => 0.0,
        }
    }

    /// Gradient with respect to every registered parameter.
    pub fn parameters(&self) -> Vec<f64> {
        self.params
            .iter()
            .map(|&i| self.adj.get(i as usize).copied().unwrap_or(0.0))
            .collect()
    }
}

impl<'t> Var<'t> {
    pub fn is_constant(&self) -> bool {
        self.slot.is_none()
    }

    #[inline]
    fn unary(self, val: f64, partial: f64) -> Self {
        match self.slot {
            Some((tape, idx)) => tape.push([idx, NONE], [partial, 0.0], val),
            None => Var { val, slot: None },
        }
    }

    #[inline]
    fn binary(self, rhs: Self, val: f64, da: f64, db: f64) -> Self {
        match (self.slot, rhs.slot) {
            (Some((tape, a)), Some((_, b))) => tape.push([a, b], [da, db], val),
            (Some(_), None) => self.unary(val, da),
            (None, Some(_)) => rhs.unary(val, db),
            (None, None) => Var { val, slot: None },
        }
    }

    #[inline]
    fn is_const_zero(&self) -> bool {
        self.slot.is_none() && self.val == 0.0
    }
}

impl<'t> Add for Var<'t> {
    type Output = Self;

    #[inline]
    fn add(self, rhs: Self) -> Self {
        if rhs.is_const_zero() {
            return self;
        }
        if self.is_const_zero() {
            return rhs;
        }
        self.binary(rhs, self.val + rhs.val, 1.0, 1.0)
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Self;

    #[inline]
    fn sub(self, rhs: Self) -> Self {
        if rhs.is_const_zero() {
            return self;
        }
        self.binary(rhs, self.val - rhs.val, 1.0, -1.0)
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Self;

    #[inline]
    fn mul(self, rhs: Self) -> Self {
        if self.is_const_zero() || rhs.is_const_zero() {
            return Var { val: 0.0, slot: None };
        }
        self.binary(rhs, self.val * rhs.val, rhs.val, self.val)
    }
}

impl<'t> Div for Var<'t> {
    type Output = Self;

    #[inline]
    fn div(self, rhs: Self) -> Self {
        if self.is_const_zero() {
            return Var { val: 0.0, slot: None };
        }
        let inv = 1.0 / rhs.val;
        let q = self.val * inv;
        self.binary(rhs, q, inv, -q * inv)
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Self;

    #[inline]
    fn neg(self) -> Self {
        self.unary(-self.val, -1.0)
    }
}

impl<'t> Real for Var<'t> {
    fn from_f64(v: f64) -> Self {
        Var { val: v, slot: None }
    }

    fn value(&self) -> f64 {
        self.val
    }

    fn exp(self) -> Self {
        let e = self.val.exp();
        self.unary(e, e)
    }

    fn sin(self) -> Self {
        self.unary(self.val.sin(), self.val.cos())
    }

    fn cos(self) -> Self {
        self.unary(self.val.cos(), -self.val.sin())
    }

    fn sigmoid(self) -> Self {
        let s = logistic(self.val);
        self.unary(s, s * (1.0 - s))
    }

    fn tanh(self) -> Self {
        let t = self.val.tanh();
        self.unary(t, 1.0 - t * t)
    }

    fn square(self) -> Self {
        self.unary(self.val * self.val, 2.0 * self.val)
    }

    fn scale(self, k: f64) -> Self {
        if k == 0.0 {
            return Var { val: 0.0, slot: None };
        }
        self.unary(self.val * k, k)
    }
}
