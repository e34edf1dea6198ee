use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::replay::ReplayMode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Dqn,
    Ddqn,
    Dueling,
    DqnPer,
    DqnRank,
    A2c,
    A3c,
    Ppo,
    Tppo,
}

impl Algorithm {
    pub const ALL: [Algorithm; 9] = [
        Algorithm::Dqn,
        Algorithm::Ddqn,
        Algorithm::Dueling,
        Algorithm::DqnPer,
        Algorithm::DqnRank,
        Algorithm::A2c,
        Algorithm::A3c,
        Algorithm::Ppo,
        Algorithm::Tppo,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Algorithm::Dqn => "dqn",
            Algorithm::Ddqn => "ddqn",
            Algorithm::Dueling => "dueling",
            Algorithm::DqnPer => "dqn_per",
            Algorithm::DqnRank => "dqn_rank",
            Algorithm::A2c => "a2c",
            Algorithm::A3c => "a3c",
            Algorithm::Ppo => "ppo",
            Algorithm::Tppo => "tppo",
        }
    }

    pub fn is_value_based(self) -> bool {
        matches!(self, Algorithm::Dqn | Algorithm::Ddqn | Algorithm::Dueling | Algorithm::DqnPer | Algorithm::DqnRank)
    }

    pub fn replay_mode(self) -> ReplayMode {
        match self {
            Algorithm::DqnPer => ReplayMode::Proportional,
            Algorithm::DqnRank => ReplayMode::Rank,
            _ => ReplayMode::Uniform,
        }
    }

    /// Single-threaded agents reproduce bit for bit from a seed.
    pub fn is_deterministic(self) -> bool {
        self != Algorithm::A3c
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown agent '{0}'; valid agents: dqn, ddqn, dueling, dqn_per, dqn_rank, a2c, a3c, ppo, tppo")]
pub struct UnknownAgent(pub String);

impl FromStr for Algorithm {
    type Err = UnknownAgent;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase().replace('-', "_");
        Algorithm::ALL.into_iter().find(|a| a.id() == lower).ok_or_else(|| UnknownAgent(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub min: f64,
    /// Multiplicative decay per environment step.
    pub decay: f64,
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        Self { start: 1.0, min: 0.05, decay: 0.99995 }
    }
}

impl EpsilonSchedule {
    /// Exploration rate after `steps` environment steps.
    pub fn at(&self, steps: u64) -> f64 {
        (self.start * self.decay.powf(steps as f64)).max(self.min)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpoConfig {
    pub clip: f64,
    pub epochs: usize,
    pub gae_lambda: f64,
    pub entropy_coef: f64,
    pub value_coef: f64,
    /// Environment steps collected per update.
    pub rollout: usize,
    pub minibatch: usize,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            clip: 0.2,
            epochs: 4,
            gae_lambda: 0.95,
            entropy_coef: 0.01,
            value_coef: 0.5,
            rollout: 1000,
            minibatch: 1000,
        }
    }
}

/// Hyperparameters shared by all agents; unused fields are ignored by
/// algorithms that do not need them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub gamma: f64,
    pub lr: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    /// Learner steps between target-network copies.
    pub target_sync: u64,
    pub epsilon: EpsilonSchedule,
    pub per_alpha: f64,
    pub per_beta0: f64,
    /// Learner steps over which the importance exponent reaches 1.
    pub per_beta_steps: u64,
    pub ppo: PpoConfig,
    /// Slope of the out-of-band rollback in the truly proximal objective.
    pub tppo_rollback: f64,
    /// Steps between actor-critic updates (A2C/A3C); episodes also flush.
    pub ac_steps: usize,
    pub a3c_workers: usize,
    pub hidden_width: usize,
    /// Hidden layer count; `None` uses the task default.
    pub hidden_layers: Option<usize>,
    /// Global gradient-norm clip; 0 disables.
    pub max_grad_norm: f64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            gamma: 0.88,
            lr: 3e-4,
            batch_size: 1000,
            replay_capacity: 20_000,
            target_sync: 500,
            epsilon: EpsilonSchedule::default(),
            per_alpha: 0.6,
            per_beta0: 0.4,
            per_beta_steps: 100_000,
            ppo: PpoConfig::default(),
            tppo_rollback: 0.3,
            ac_steps: 20,
            a3c_workers: 3,
            hidden_width: 1000,
            hidden_layers: None,
            max_grad_norm: 10.0,
        }
    }
}

impl AgentConfig {
    /// Full-size settings: width 1000, batch 1000, 20000-transition replay.
    pub fn full() -> Self {
        Self::default()
    }

    /// Laptop-sized networks and batches; everything else as in `full`.
    pub fn desk() -> Self {
        Self {
            batch_size: 64,
            hidden_width: 128,
            hidden_layers: Some(2),
            ppo: PpoConfig { rollout: 256, minibatch: 64, ..PpoConfig::default() },
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(format!("{name} must lie in [0, 1], got {v}"))
            }
        };
        unit("gamma", self.gamma)?;
        unit("epsilon.start", self.epsilon.start)?;
        unit("epsilon.min", self.epsilon.min)?;
        unit("epsilon.decay", self.epsilon.decay)?;
        unit("ppo.gae_lambda", self.ppo.gae_lambda)?;
        unit("per_beta0", self.per_beta0)?;
        if self.lr.is_nan() || self.lr <= 0.0 {
            return Err("lr must be positive".into());
        }
        for (name, v) in [
            ("batch_size", self.batch_size),
            ("replay_capacity", self.replay_capacity),
            ("hidden_width", self.hidden_width),
            ("ppo.epochs", self.ppo.epochs),
            ("ppo.rollout", self.ppo.rollout),
            ("ppo.minibatch", self.ppo.minibatch),
            ("ac_steps", self.ac_steps),
            ("a3c_workers", self.a3c_workers),
        ] {
            if v == 0 {
                return Err(format!("{name} must be positive"));
            }
        }
        if self.target_sync == 0 {
            return Err("target_sync must be positive".into());
        }
        if self.hidden_layers == Some(0) {
            return Err("hidden_layers must be positive".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_defaults() {
        let c = AgentConfig::default();
        assert_eq!((c.gamma, c.lr, c.batch_size, c.replay_capacity), (0.88, 3e-4, 1000, 20_000));
        assert_eq!((c.target_sync, c.a3c_workers, c.hidden_width), (500, 3, 1000));
        assert_eq!((c.epsilon.start, c.epsilon.min, c.epsilon.decay), (1.0, 0.05, 0.99995));
        assert_eq!((c.ppo.clip, c.ppo.epochs, c.ppo.gae_lambda), (0.2, 4, 0.95));
        assert_eq!((c.ppo.entropy_coef, c.ppo.value_coef, c.ppo.rollout), (0.01, 0.5, 1000));
        assert_eq!((c.per_alpha, c.per_beta0, c.tppo_rollback), (0.6, 0.4, 0.3));
        c.validate().unwrap();
        AgentConfig::desk().validate().unwrap();
    }

    #[test]
    fn epsilon_law() {
        let e = EpsilonSchedule::default();
        assert_eq!(e.at(0), 1.0);
        assert!((e.at(1000) - 0.99995f64.powi(1000)).abs() < 1e-15);
        assert_eq!(e.at(10_000_000), 0.05);
    }

    #[test]
    fn ids_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.id().parse::<Algorithm>().unwrap(), a);
        }
        assert_eq!("DQN-PER".parse::<Algorithm>().unwrap(), Algorithm::DqnPer);
        assert!("sac".parse::<Algorithm>().is_err());
    }

    #[test]
    fn partial_json_fills_defaults() {
        let c: AgentConfig = serde_json::from_str(r#"{"gamma": 0.9, "ppo": {"clip": 0.1}}"#).unwrap();
        assert_eq!(c.gamma, 0.9);
        assert_eq!(c.ppo.clip, 0.1);
        assert_eq!(c.ppo.epochs, 4);
        assert!(serde_json::from_str::<AgentConfig>(r#"{"gama": 0.9}"#).is_err());
    }
}
