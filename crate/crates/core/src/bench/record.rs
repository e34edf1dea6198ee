use serde::{Deserialize, Serialize};

use crate::agents::{AgentConfig, EpisodeStats};
use crate::env::CircuitProgram;
use crate::problems::TaskSummary;

/// Settings a run was produced with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub task: TaskSummary,
    pub agent: AgentConfig,
    pub episode_budget: usize,
    pub stop_on_success: bool,
    /// Seed actually handed to the agent (derived from task, agent and seed).
    pub stream_seed: u64,
}

/// Result of one (task, agent, seed) training run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub task: String,
    pub agent: String,
    pub seed: u64,
    pub episodes_run: usize,
    /// Some episode met the task threshold.
    pub success: bool,
    /// First successful episode.
    pub first_success: Option<usize>,
    /// Error of the best circuit.
    pub error: f64,
    pub gates: usize,
    pub depth: usize,
    /// Mean wall-clock seconds per episode.
    pub time_per_episode: f64,
    pub best_circuit: CircuitProgram,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_accuracy: Option<f64>,
    pub optimizer: String,
    pub config: RunConfig,
}

impl RunRecord {
    /// Summarizes a run; the best circuit is the lowest-error episode
    /// (successful episodes first, then fewer gates, then lower depth).
    pub fn from_episodes(
        task: &str,
        agent: &str,
        seed: u64,
        episodes: &[EpisodeStats],
        config: RunConfig,
    ) -> Option<Self> {
        let best = episodes.iter().min_by(|a, b| {
            b.success
                .cmp(&a.success)
                .then(a.error.total_cmp(&b.error))
                .then(a.gates.cmp(&b.gates))
                .then(a.depth.cmp(&b.depth))
        })?;
        let total: f64 = episodes.iter().map(|e| e.seconds).sum();
        Some(Self {
            task: task.to_string(),
            agent: agent.to_string(),
            seed,
            episodes_run: episodes.len(),
            success: episodes.iter().any(|e| e.success),
            first_success: episodes.iter().find(|e| e.success).map(|e| e.episode),
            error: best.error,
            gates: best.gates,
            depth: best.depth,
            time_per_episode: total / episodes.len() as f64,
            best_circuit: best.circuit.clone(),
            train_accuracy: best.train_accuracy,
            test_accuracy: best.test_accuracy,
            optimizer: crate::optimize::METHOD_NAME.to_string(),
            config,
        })
    }
}
