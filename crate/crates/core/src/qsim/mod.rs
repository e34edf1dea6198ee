//! Exact small-circuit simulation: pure states, density matrices with
//! depolarizing channels, and Pauli-sum observables.
//!
//! Basis ordering: qubit 0 is the most significant bit of a computational
//! basis index, so on three qubits `|100>` is index 4.

mod density;
mod gate;
mod kernels;
mod noise;
mod pauli;
mod statevector;

pub use density::DensityMatrix;
pub use gate::{Gate, GateKind};
pub use noise::NoiseConfig;
pub use pauli::{Pauli, PauliString, PauliSum};
pub use statevector::StateVector;

use thiserror::Error;

/// Largest register the simulators accept.
pub const MAX_QUBITS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("qubit index {qubit} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("{kind} expects a different number of qubits (got {got})")]
    Arity { kind: GateKind, got: usize },
    #[error("two-qubit gate applied twice to qubit {0}")]
    DuplicateQubits(usize),
    #[error("{0} angle present/absent mismatch")]
    AngleMismatch(GateKind),
    #[error("rotation angle is not finite")]
    NonFiniteAngle,
    #[error("register size {0} outside supported range 1..={MAX_QUBITS}")]
    RegisterSize(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("invalid Pauli string {0:?}")]
    InvalidPauli(String),
    #[error("expectation value has imaginary residue {0:e}")]
    ComplexExpectation(f64),
    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),
}

pub(crate) fn check_register(n_qubits: usize) -> Result<(), SimError> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        Err(SimError::RegisterSize(n_qubits))
    } else {
        Ok(())
    }
}

/// Bit position of `qubit` inside an `n_qubits`-wide basis index.
#[inline]
pub(crate) fn bit_of(qubit: usize, n_qubits: usize) -> usize {
    n_qubits - 1 - qubit
}
