use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{AgentConfig, Algorithm};
use super::policy::ActorCriticAgent;
use super::replay::Transition;
use super::value::DqnAgent;
use super::{a3c, Agent, AgentError};
use crate::env::{CircuitProgram, Curriculum, QasEnv};
use crate::problems::TaskSpec;

/// Outcome of one episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeStats {
    pub episode: usize,
    pub steps: usize,
    pub total_reward: f64,
    pub success: bool,
    /// Final thresholded cost.
    pub cost: f64,
    /// Task error metric of the final circuit.
    pub error: f64,
    pub gates: usize,
    pub depth: usize,
    pub seconds: f64,
    pub optimizer_evals: usize,
    pub circuit: CircuitProgram,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_accuracy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainOptions {
    pub episodes: usize,
    /// End the run after the first successful episode.
    pub stop_on_success: bool,
    pub curriculum: Option<Curriculum>,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self { episodes: 5000, stop_on_success: false, curriculum: None }
    }
}

/// Runs `env` from reset to termination under `agent`.
pub fn train_episode(agent: &mut dyn Agent, env: &mut QasEnv, episode: usize) -> Result<EpisodeStats, AgentError> {
    let start = Instant::now();
    let mut obs = env.reset(episode as u64)?;
    let mut total_reward = 0.0;
    let mut evals = 0;
    let mut steps = 0;
    loop {
        let mask = env.legal_mask();
        let action = agent.select_action(&obs, &mask);
        let out = env.step(action)?;
        steps += 1;
        total_reward += out.reward;
        evals += out.info.optimizer_evals;
        let next_mask = if out.done { vec![true; mask.len()] } else { env.legal_mask() };
        agent.observe(Transition {
            obs,
            action,
            reward: out.reward,
            next_obs: out.observation.clone(),
            done: out.done,
            next_mask,
        })?;
        obs = out.observation;
        if out.done {
            break;
        }
    }
    let scores = env.vqc_scores()?;
    Ok(EpisodeStats {
        episode,
        steps,
        total_reward,
        success: env.succeeded(),
        cost: env.cost(),
        error: env.error_metric()?,
        gates: env.circuit().gate_count(),
        depth: env.circuit().depth(),
        seconds: start.elapsed().as_secs_f64(),
        optimizer_evals: evals,
        circuit: env.circuit().clone(),
        train_accuracy: scores.map(|s| s.0.accuracy),
        test_accuracy: scores.map(|s| s.1.accuracy),
    })
}

/// Network layer sizes for `task` under `cfg`.
pub fn layer_sizes(task: &TaskSpec, cfg: &AgentConfig, input_len: usize, n_actions: usize) -> Vec<usize> {
    let depth = cfg.hidden_layers.unwrap_or(task.hidden_layers);
    let mut s = vec![input_len];
    s.extend(std::iter::repeat_n(cfg.hidden_width, depth));
    s.push(n_actions);
    s
}

/// Single-threaded agent for `algo`.
pub fn build_agent(
    algo: Algorithm,
    cfg: &AgentConfig,
    task: &TaskSpec,
    seed: u64,
) -> Result<Box<dyn Agent>, AgentError> {
    cfg.validate().map_err(AgentError::Config)?;
    let env = QasEnv::new(task.clone())?;
    let sizes = layer_sizes(task, cfg, env.input_len(), env.n_actions());
    Ok(match algo {
        a if a.is_value_based() => Box::new(DqnAgent::new(a, cfg.clone(), &sizes, seed)),
        Algorithm::A3c => return Err(AgentError::Config("a3c runs through train() with worker threads".into())),
        a => Box::new(ActorCriticAgent::new(a, cfg.clone(), &sizes, seed)),
    })
}

/// Trains `algo` on `task` for up to `opts.episodes` episodes, calling
/// `on_episode` after each one.
pub fn train(
    task: &TaskSpec,
    algo: Algorithm,
    cfg: &AgentConfig,
    opts: &TrainOptions,
    seed: u64,
    on_episode: &mut dyn FnMut(&EpisodeStats),
) -> Result<Vec<EpisodeStats>, AgentError> {
    if algo == Algorithm::A3c {
        cfg.validate().map_err(AgentError::Config)?;
        let all = a3c::train_a3c(task, cfg, opts, seed)?;
        all.iter().for_each(&mut *on_episode);
        return Ok(all);
    }
    let mut agent = build_agent(algo, cfg, task, seed)?;
    let mut env = QasEnv::new(task.clone())?;
    let mut curriculum = opts.curriculum.unwrap_or(Curriculum::disabled(task.zeta));
    env.set_zeta(curriculum.zeta());
    let mut out = Vec::new();
    for ep in 0..opts.episodes {
        let stats = train_episode(agent.as_mut(), &mut env, ep)?;
        on_episode(&stats);
        let success = stats.success;
        out.push(stats);
        env.set_zeta(curriculum.update(success));
        if success && opts.stop_on_success {
            break;
        }
    }
    Ok(out)
}
