//! Step rewards.

use crate::qsim::{SimError, StateVector};

pub const SUCCESS_REWARD: f64 = 5.0;
pub const TIMEOUT_PENALTY: f64 = -5.0;
/// Bonus for reaching the fidelity threshold in state preparation.
pub const R_BIG: f64 = 5.0;
/// Lower clamp on the improvement denominator `C_{t-1} - E_min`.
pub const DENOM_FLOOR: f64 = 1e-12;

/// Reward for the cost-driven tasks and whether the episode ends.
///
/// Success (`c_t - e_min <= zeta`) takes precedence over the step limit.
pub fn cost_reward(c_prev: f64, c_t: f64, e_min: f64, zeta: f64, t: usize, d_max: usize) -> (f64, bool) {
    if c_t - e_min <= zeta {
        return (SUCCESS_REWARD, true);
    }
    if t >= d_max {
        return (TIMEOUT_PENALTY, true);
    }
    let denom = (c_prev - e_min).max(DENOM_FLOOR);
    (((c_prev - c_t) / denom).max(-1.0), false)
}

/// Reward from a fidelity: `R_BIG` at or above `threshold`, else the fidelity.
pub fn fidelity_reward(fidelity: f64, threshold: f64) -> (f64, bool) {
    if fidelity >= threshold {
        (R_BIG, true)
    } else {
        (fidelity, false)
    }
}

pub fn state_prep_reward(
    state: &StateVector<f64>,
    target: &StateVector<f64>,
    threshold: f64,
) -> Result<(f64, bool), SimError> {
    Ok(fidelity_reward(state.fidelity(target)?, threshold))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn improvement_branch() {
        let (r, done) = cost_reward(-1.0, -1.1, -1.5, 1.6e-3, 3, 40);
        assert!((r - 0.2).abs() < 1e-12);
        assert!(!done);
    }

    #[test]
    fn terminal_branches() {
        assert_eq!(cost_reward(0.0, -1.4995, -1.5, 1e-3, 40, 40), (5.0, true));
        assert_eq!(cost_reward(0.0, -1.0, -1.5, 1e-3, 40, 40), (-5.0, true));
        assert_eq!(cost_reward(-1.0, 10.0, -1.5, 1e-3, 2, 40), (-1.0, false));
    }

    #[test]
    fn floor_on_denominator() {
        // previous cost already below the minimum, as can happen under noise
        let (r, _) = cost_reward(-1.6, -1.4, -1.5, 1e-3, 1, 10);
        assert_eq!(r, -1.0);
    }

    #[test]
    fn fidelity_branches() {
        assert_eq!(fidelity_reward(1.0, 0.98), (R_BIG, true));
        assert_eq!(fidelity_reward(0.5, 0.98), (0.5, false));
        assert_eq!(fidelity_reward(0.98, 0.98), (R_BIG, true));
    }
}
