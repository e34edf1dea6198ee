//! Reinforcement-learning search for quantum circuit architectures.
//!
//! The simulators and networks are generic over [`scalar::Real`]; the aliases
//! below fix the precisions used by the rest of the crate.

pub mod agents;
pub mod bench;
pub mod env;
pub mod optimize;
pub mod problems;
pub mod qsim;
pub mod scalar;

pub use scalar::Real;

pub type StateVector = qsim::StateVector<f64>;
pub type DensityMatrix = qsim::DensityMatrix<f64>;
pub type Gate = qsim::Gate<f64>;
pub type PauliSum = qsim::PauliSum<f64>;
