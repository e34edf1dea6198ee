use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::ranking::{Aggregation, RankingWeights};
use super::BenchError;
use crate::agents::{AgentConfig, TrainOptions};
use crate::env::Curriculum;
use crate::problems::TaskOptions;
use crate::qsim::NoiseConfig;

/// Harness settings. Every command-line flag has a field here; flags
/// override the file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub task: TaskSection,
    pub agent: AgentSection,
    pub noise: NoiseSection,
    pub ranking: RankingSection,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskSection {
    pub ids: Vec<String>,
    /// Per-task overrides (depth limit, threshold, budget, data seeds). Noise
    /// comes from the `noise` section.
    pub options: TaskOptions,
}

/// Starting point for agent hyperparameters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Full-size networks and batches.
    #[default]
    Full,
    /// Small networks for a laptop.
    Desk,
}

impl std::str::FromStr for Preset {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        match s {
            "full" => Ok(Preset::Full),
            "desk" => Ok(Preset::Desk),
            other => Err(BenchError::Config(format!("preset must be 'full' or 'desk', got '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentSection {
    /// Agent ids, or `"all"`.
    pub ids: Vec<String>,
    /// Number of seeds; seeds are `first_seed..first_seed + seeds`.
    pub seeds: u64,
    pub first_seed: u64,
    pub episodes: Option<usize>,
    pub stop_on_success: bool,
    pub curriculum: Option<Curriculum>,
    pub parallel: usize,
    pub preset: Preset,
    /// Partial hyperparameter object merged over the preset.
    pub hyper: Option<Value>,
}

impl Default for AgentSection {
    fn default() -> Self {
        Self {
            ids: Vec::new(),
            seeds: 1,
            first_seed: 0,
            episodes: None,
            stop_on_success: false,
            curriculum: None,
            parallel: 1,
            preset: Preset::Full,
            hyper: None,
        }
    }
}

/// Depolarizing noise; enabling it without strengths uses the hardware preset.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub enabled: bool,
    pub p1: Option<f64>,
    pub p2: Option<f64>,
}

impl NoiseSection {
    pub fn noise(&self) -> NoiseConfig {
        if !self.enabled {
            return NoiseConfig::noiseless();
        }
        let preset = NoiseConfig::hardware_preset();
        NoiseConfig { p1: self.p1.unwrap_or(preset.p1), p2: self.p2.unwrap_or(preset.p2), enabled: true }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RankingSection {
    /// Defaults to the noise-dependent preset.
    pub weights: Option<RankingWeights>,
    pub aggregate: Aggregation,
    /// Results directory written by `run`.
    pub out: Option<PathBuf>,
    /// Results directory read by `rank`.
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
}

impl BenchConfig {
    pub fn from_json_str(text: &str) -> Result<Self, BenchError> {
        serde_json::from_str(text).map_err(|e| BenchError::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, BenchError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))
    }

    pub fn noise_config(&self) -> NoiseConfig {
        self.noise.noise()
    }

    /// Explicit weights, else the noisy or noiseless preset.
    pub fn weights(&self) -> RankingWeights {
        self.ranking.weights.unwrap_or_else(|| {
            if self.noise.enabled {
                RankingWeights::noisy()
            } else {
                RankingWeights::noiseless()
            }
        })
    }

    pub fn task_options(&self) -> TaskOptions {
        TaskOptions { noise: Some(self.noise_config()), ..self.task.options.clone() }
    }

    /// Preset hyperparameters with `agent.hyper` merged on top.
    pub fn agent_config(&self) -> Result<AgentConfig, BenchError> {
        let base = match self.agent.preset {
            Preset::Full => AgentConfig::full(),
            Preset::Desk => AgentConfig::desk(),
        };
        let cfg = match &self.agent.hyper {
            None => base,
            Some(patch) => {
                let mut v = serde_json::to_value(&base).expect("agent config serializes");
                merge(&mut v, patch);
                serde_json::from_value(v).map_err(|e| BenchError::Config(format!("agent.hyper: {e}")))?
            }
        };
        cfg.validate().map_err(BenchError::Config)?;
        Ok(cfg)
    }

    pub fn train_options(&self) -> Result<TrainOptions, BenchError> {
        let episodes = self
            .agent
            .episodes
            .ok_or_else(|| BenchError::Config("an episode budget is required (5000 is a reasonable start)".into()))?;
        if episodes == 0 {
            return Err(BenchError::Config("episode budget must be positive".into()));
        }
        Ok(TrainOptions { episodes, stop_on_success: self.agent.stop_on_success, curriculum: self.agent.curriculum })
    }
}

/// Recursive object merge; non-object values in `patch` replace `base`.
fn merge(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (slot, v) => *slot = v.clone(),
    }
}
