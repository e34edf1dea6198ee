use serde::{Deserialize, Serialize};

/// Success-driven tightening of the threshold `zeta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curriculum {
    pub zeta_initial: f64,
    pub zeta_final: f64,
    pub decay: f64,
    pub enabled: bool,
    current: f64,
}

impl Curriculum {
    pub fn new(zeta_initial: f64, zeta_final: f64, decay: f64) -> Self {
        Self { zeta_initial, zeta_final, decay, enabled: true, current: zeta_initial.max(zeta_final) }
    }

    /// Fixed threshold.
    pub fn disabled(zeta: f64) -> Self {
        Self { zeta_initial: zeta, zeta_final: zeta, decay: 1.0, enabled: false, current: zeta }
    }

    pub fn zeta(&self) -> f64 {
        self.current
    }

    /// Records an episode outcome and returns the threshold for the next one.
    pub fn update(&mut self, episode_success: bool) -> f64 {
        if self.enabled && episode_success {
            self.current = (self.current * self.decay).max(self.zeta_final);
        }
        self.current
    }
}
