//! Reinforcement-learning agents over a small feed-forward network.

mod a3c;
mod adam;
mod config;
mod gradcheck;
mod heads;
mod mlp;
mod policy;
mod replay;
mod select;
mod train;
mod value;

use thiserror::Error;

pub use a3c::{train_a3c, A3cWorker, SharedStore};
pub use adam::{clip_scale, Adam, TensorAdam};
pub use config::{AgentConfig, Algorithm, EpsilonSchedule, PpoConfig, UnknownAgent};
pub use gradcheck::{backward_check, GradCheck, FD_STEP};
pub use heads::{
    actor_critic_loss, dueling_aggregate, entropy, masked_log_softmax, ppo_surrogate, q_regression_loss, q_row,
    rollback, tppo_surrogate, LossParts, PolicyBatch, Surrogate,
};
pub use mlp::{flat_grad, Cache, Input, Layer, Mlp, SparseRow};
pub use policy::{a2c_gradients, discounted_returns, gae, normalize, policy_head, ActorCriticAgent, RolloutStep};
pub use replay::{annealed_beta, ReplayBuffer, ReplayError, ReplayMode, SampledBatch, Transition, PRIORITY_EPS};
pub use select::{epsilon_greedy, greedy_action, sample_softmax, uniform_legal};
pub use train::{build_agent, layer_sizes, train, train_episode, EpisodeStats, TrainOptions};
pub use value::{dqn_target, q_table, DqnAgent, TargetRule};

use crate::env::{EnvError, QasObservation};

/// Network precision used by the agents.
pub type Net = Mlp<f32>;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error("invalid agent configuration: {0}")]
    Config(String),
    #[error("{0} produced non-finite parameters or loss")]
    Diverged(Algorithm),
    #[error("observed action {0} was not produced by select_action")]
    UnselectedAction(usize),
}

/// Interface the training loop drives.
pub trait Agent: Send {
    fn algorithm(&self) -> Algorithm;

    /// Picks a legal action for `obs`.
    fn select_action(&mut self, obs: &QasObservation, mask: &[bool]) -> usize;

    /// Records the transition that followed the last selected action and
    /// learns when the algorithm's schedule says so.
    fn observe(&mut self, t: Transition) -> Result<(), AgentError>;
}
