use serde::{Deserialize, Serialize};

use super::{Gate, SimError};
use crate::scalar::Real;

/// Depolarizing strengths applied after every gate when `enabled`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Single-qubit depolarizing probability.
    pub p1: f64,
    /// Two-qubit depolarizing probability.
    pub p2: f64,
    pub enabled: bool,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self::noiseless()
    }
}

impl NoiseConfig {
    pub fn noiseless() -> Self {
        Self { p1: 0.0, p2: 0.0, enabled: false }
    }

    /// 0.1% single-qubit and 0.01% two-qubit depolarizing noise.
    pub fn hardware_preset() -> Self {
        Self { p1: 1e-3, p2: 1e-4, enabled: true }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        for p in [self.p1, self.p2] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SimError::InvalidProbability(p));
            }
        }
        Ok(())
    }

    /// Channel strength that follows `gate`, if any.
    pub fn strength_after<T: Real>(&self, gate: &Gate<T>) -> Option<f64> {
        if !self.enabled {
            return None;
        }
        Some(if gate.qubits().len() == 2 { self.p2 } else { self.p1 })
    }
}
