use std::ops::{Add, Mul, Sub};

use super::QuantumError;
use crate::autodiff::Real;

/// Complex number over any [`Real`] component type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complex<S> {
    pub re: S,
    pub im: S,
}

impl<S: Real> Complex<S> {
    pub fn new(re: S, im: S) -> Self {
        Self { re, im }
    }

    pub fn zero() -> Self {
        Self::new(S::zero(), S::zero())
    }

    pub fn one() -> Self {
        Self::new(S::one(), S::zero())
    }

    pub fn conj(self) -> Self {
        Self::new(self.re, -self.im)
    }

    pub fn norm_sqr(self) -> S {
        self.re * self.re + self.im * self.im
    }

    #[inline]
    pub fn scale(self, k: S) -> Self {
        Self::new(self.re * k, self.im * k)
    }
}

impl<S: Real> Add for Complex<S> {
    type Output = Self;

    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl<S: Real> Sub for Complex<S> {
    type Output = Self;

    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl<S: Real> Mul for Complex<S> {
    type Output = Self;

    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.re * rhs.re - self.im * rhs.im,
            self.re * rhs.im + self.im * rhs.re,
        )
    }
}

/// Amplitudes of an `n`-qubit register. Qubit `k` is bit `k` of the basis
/// index, so `|q_0 q_1 …⟩` with `q_0 = 1, q_1 = 0` is index 1.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<S> {
    n_qubits: usize,
    amps: Vec<Complex<S>>,
}

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 24;

impl<S: Real> StateVector<S> {
    /// `|0…0⟩`
    pub fn zero_state(n_qubits: usize) -> Result<Self, QuantumError> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(QuantumError::RegisterSize(n_qubits));
        }
        let mut amps = vec![Complex::zero(); 1 << n_qubits];
        amps[0] = Complex::one();
        Ok(Self { n_qubits, amps })
    }

    /// Computational basis state with the given index.
    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self, QuantumError> {
        let mut s = Self::zero_state(n_qubits)?;
        if index >= s.amps.len() {
            return Err(QuantumError::QubitOutOfRange { qubit: index, n_qubits });
        }
        s.amps[0] = Complex::zero();
        s.amps[index] = Complex::one();
        Ok(s)
    }

    pub fn from_amplitudes(amps: Vec<Complex<S>>) -> Result<Self, QuantumError> {
        let len = amps.len();
        if !len.is_power_of_two() || len < 2 {
            return Err(QuantumError::RegisterSize(len));
        }
        Ok(Self {
            n_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex<S>] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> S {
        self.amps
            .iter()
            .fold(S::zero(), |acc, a| acc + a.norm_sqr())
    }

    fn check_qubit(&self, qubit: usize) -> Result<(), QuantumError> {
        if qubit >= self.n_qubits {
            Err(QuantumError::QubitOutOfRange {
                qubit,
                n_qubits: self.n_qubits,
            })
        } else {
            Ok(())
        }
    }

    /// Apply a real 2×2 matrix `m` on `qubit`.
    pub fn apply_real_single(&mut self, qubit: usize, m: [[S; 2]; 2]) -> Result<(), QuantumError> {
        self.check_qubit(qubit)?;
        let bit = 1usize << qubit;
        for i0 in 0..self.amps.len() {
            if i0 & bit != 0 {
                continue;
            }
            let i1 = i0 | bit;
            let (a0, a1) = (self.amps[i0], self.amps[i1]);
            self.amps[i0] = a0.scale(m[0][0]) + a1.scale(m[0][1]);
            self.amps[i1] = a0.scale(m[1][0]) + a1.scale(m[1][1]);
        }
        Ok(())
    }

    /// `R_y(θ) = [[cos θ/2, −sin θ/2], [sin θ/2, cos θ/2]]`
    pub fn apply_ry(&mut self, qubit: usize, angle: S) -> Result<(), QuantumError> {
        let half = angle.scale(0.5);
        let (c, s) = (half.cos(), half.sin());
        self.apply_real_single(qubit, [[c, -s], [s, c]])
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<(), QuantumError> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(QuantumError::SameQubit(control));
        }
        let (cbit, tbit) = (1usize << control, 1usize << target);
        for i in 0..self.amps.len() {
            if i & cbit != 0 && i & tbit == 0 {
                self.amps.swap(i, i | tbit);
            }
        }
        Ok(())
    }

    /// `⟨ψ|Z_q|ψ⟩ = Σ_b (±1)|a_b|²`, `+` where bit `q` of `b` is 0.
    pub fn expectation_z(&self, qubit: usize) -> Result<S, QuantumError> {
        self.check_qubit(qubit)?;
        let bit = 1usize << qubit;
        let (mut plus, mut minus) = (S::zero(), S::zero());
        for (i, a) in self.amps.iter().enumerate() {
            if i & bit == 0 {
                plus = plus + a.norm_sqr();
            } else {
                minus = minus + a.norm_sqr();
            }
        }
        Ok(plus - minus)
    }

    /// Multiply by `Z_q` in place (flip the sign of amplitudes with bit `q` set).
    pub fn apply_z(&mut self, qubit: usize) -> Result<(), QuantumError> {
        self.check_qubit(qubit)?;
        let bit = 1usize << qubit;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & bit != 0 {
                *a = Complex::new(-a.re, -a.im);
            }
        }
        Ok(())
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Self) -> Complex<S> {
        self.amps
            .iter()
            .zip(&other.amps)
            .fold(Complex::zero(), |acc, (a, b)| acc + a.conj() * *b)
    }
}
