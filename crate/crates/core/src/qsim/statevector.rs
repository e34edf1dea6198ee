use num_complex::Complex;

use super::kernels::{apply_1q, apply_cx};
use super::{bit_of, check_register, Gate, PauliSum, SimError};
use crate::scalar::Real;

/// Pure state of an `n`-qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T> {
    n_qubits: usize,
    amps: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    /// `|0...0>`.
    pub fn zero_state(n_qubits: usize) -> Result<Self, SimError> {
        check_register(n_qubits)?;
        let mut amps = vec![Complex::new(T::zero(), T::zero()); 1 << n_qubits];
        amps[0] = Complex::new(T::one(), T::zero());
        Ok(Self { n_qubits, amps })
    }

    /// Wraps amplitudes, requiring length `2^n` and unit norm (within 1e-8).
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex<T>>) -> Result<Self, SimError> {
        check_register(n_qubits)?;
        if amps.len() != 1 << n_qubits {
            return Err(SimError::DimensionMismatch { expected: 1 << n_qubits, got: amps.len() });
        }
        let s = Self { n_qubits, amps };
        let norm = s.norm();
        if (norm - T::one()).abs() > T::lit(1e-8) {
            return Err(SimError::NotNormalized(norm.to_f64_lossy()));
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn norm(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn apply(&mut self, gate: &Gate<T>) -> Result<(), SimError> {
        gate.check_range(self.n_qubits)?;
        let n = self.n_qubits;
        match gate.single_qubit_matrix() {
            Some(m) => apply_1q(&mut self.amps, bit_of(gate.qubits()[0], n), &m),
            None => {
                let q = gate.qubits();
                apply_cx(&mut self.amps, bit_of(q[0], n), bit_of(q[1], n));
            }
        }
        Ok(())
    }

    pub fn apply_all<'a, I>(&mut self, gates: I) -> Result<(), SimError>
    where
        I: IntoIterator<Item = &'a Gate<T>>,
    {
        for g in gates {
            self.apply(g)?;
        }
        Ok(())
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>, SimError> {
        if self.dim() != other.dim() {
            return Err(SimError::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(self.amps.iter().zip(&other.amps).fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b))
    }

    /// `|<target|self>|^2`.
    pub fn fidelity(&self, target: &Self) -> Result<T, SimError> {
        Ok(target.inner(self)?.norm_sqr().min(T::one()))
    }

    /// `<psi|H|psi>`.
    pub fn expectation(&self, h: &PauliSum<T>) -> Result<T, SimError> {
        if h.n_qubits() != self.n_qubits {
            return Err(SimError::DimensionMismatch { expected: self.n_qubits, got: h.n_qubits() });
        }
        let mut acc = Complex::new(T::zero(), T::zero());
        for (x, diag) in h.groups() {
            for (j, d) in diag.iter().enumerate() {
                acc += self.amps[j ^ x].conj() * *d * self.amps[j];
            }
        }
        h.real_part(acc)
    }
}
