//! DQN family: DQN, double DQN, dueling DQN and the two prioritized-replay
//! variants.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::Adam;
use super::config::{AgentConfig, Algorithm};
use super::heads::{q_regression_loss, q_row};
use super::mlp::{Input, Mlp, SparseRow};
use super::replay::{annealed_beta, ReplayBuffer, Transition};
use super::select::epsilon_greedy;
use super::{Agent, AgentError, Net};
use crate::env::QasObservation;
use crate::scalar::Real;

/// How the bootstrap value of `s'` is formed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TargetRule {
    /// `max_a' Q_target(s', a')`.
    Max,
    /// `Q_target(s', argmax_a' Q_online(s', a'))`.
    Double,
}

/// `y = r + gamma * bootstrap * (1 - done)`, with the max/argmax over the
/// legal actions of `s'`. Rows of the Q tables are already aggregated values.
pub fn dqn_target<T: Real>(
    rewards: &[T],
    dones: &[bool],
    next_q_online: &Array2<T>,
    next_q_target: &Array2<T>,
    next_masks: &[Vec<bool>],
    gamma: T,
    rule: TargetRule,
) -> Vec<T> {
    (0..rewards.len())
        .map(|i| {
            if dones[i] {
                return rewards[i];
            }
            let legal = |j: &usize| next_masks[i][*j];
            let n = next_q_target.ncols();
            let boot = match rule {
                TargetRule::Max => (0..n).filter(legal).map(|j| next_q_target[[i, j]]).fold(T::neg_infinity(), T::max),
                TargetRule::Double => {
                    let q = next_q_online.row(i);
                    let q = q.as_slice().expect("standard layout");
                    next_q_target[[i, super::select::greedy_action(q, &next_masks[i])]]
                }
            };
            if boot.is_finite() {
                rewards[i] + gamma * boot
            } else {
                rewards[i]
            }
        })
        .collect()
}

/// Aggregated Q-table of a network output batch.
pub fn q_table<T: Real>(out: &Array2<T>, n_actions: usize, dueling: bool) -> Array2<T> {
    let mut q = Array2::zeros((out.nrows(), n_actions));
    for (i, row) in out.rows().into_iter().enumerate() {
        let v = q_row(row.as_slice().expect("standard layout"), n_actions, dueling);
        q.row_mut(i).assign(&ndarray::ArrayView1::from(&v[..]));
    }
    q
}

pub struct DqnAgent {
    algo: Algorithm,
    cfg: AgentConfig,
    n_actions: usize,
    online: Net,
    target: Net,
    adam: Adam<f32>,
    buffer: ReplayBuffer,
    rng: ChaCha8Rng,
    env_steps: u64,
    learn_steps: u64,
    last_loss: Option<f32>,
}

impl DqnAgent {
    pub fn new(algo: Algorithm, cfg: AgentConfig, sizes: &[usize], seed: u64) -> Self {
        assert!(algo.is_value_based(), "{algo} is not value based");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_actions = *sizes.last().expect("sizes");
        let mut net_sizes = sizes.to_vec();
        if algo == Algorithm::Dueling {
            *net_sizes.last_mut().expect("sizes") += 1;
        }
        let online = Mlp::new(&net_sizes, &mut rng);
        let target = online.clone();
        let adam = Adam::new(&online, cfg.lr as f32, cfg.max_grad_norm as f32);
        let buffer = ReplayBuffer::new(cfg.replay_capacity, algo.replay_mode(), cfg.per_alpha);
        Self { algo, cfg, n_actions, online, target, adam, buffer, rng, env_steps: 0, learn_steps: 0, last_loss: None }
    }

    fn dueling(&self) -> bool {
        self.algo == Algorithm::Dueling
    }

    pub fn online(&self) -> &Net {
        &self.online
    }

    pub fn target(&self) -> &Net {
        &self.target
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    pub fn learn_steps(&self) -> u64 {
        self.learn_steps
    }

    pub fn env_steps(&self) -> u64 {
        self.env_steps
    }

    pub fn last_loss(&self) -> Option<f32> {
        self.last_loss
    }

    pub fn epsilon(&self) -> f64 {
        self.cfg.epsilon.at(self.env_steps)
    }

    pub fn q_values(&self, obs: &QasObservation) -> Vec<f32> {
        let row = [SparseRow::from_observation(obs)];
        let out = self.online.forward(Input::Sparse(&row));
        q_row(out.row(0).as_slice().expect("layout"), self.n_actions, self.dueling())
    }

    /// One gradient step on a replay batch.
    pub fn learn(&mut self) -> Result<f32, AgentError> {
        let beta = annealed_beta(self.cfg.per_beta0, self.learn_steps, self.cfg.per_beta_steps);
        let sample = self.buffer.sample(self.cfg.batch_size, beta, &mut self.rng);
        let batch: Vec<&Transition> = sample.indices.iter().map(|&i| self.buffer.get(i)).collect();
        let obs: Vec<SparseRow<f32>> = batch.iter().map(|t| SparseRow::from_observation(&t.obs)).collect();
        let next: Vec<SparseRow<f32>> = batch.iter().map(|t| SparseRow::from_observation(&t.next_obs)).collect();
        let dueling = self.dueling();
        let next_target = q_table(&self.target.forward(Input::Sparse(&next)), self.n_actions, dueling);
        let rule = if self.algo == Algorithm::Ddqn { TargetRule::Double } else { TargetRule::Max };
        let next_online = match rule {
            TargetRule::Double => q_table(&self.online.forward(Input::Sparse(&next)), self.n_actions, dueling),
            TargetRule::Max => next_target.clone(),
        };
        let rewards: Vec<f32> = batch.iter().map(|t| t.reward as f32).collect();
        let dones: Vec<bool> = batch.iter().map(|t| t.done).collect();
        let masks: Vec<Vec<bool>> = batch.iter().map(|t| t.next_mask.clone()).collect();
        let y = dqn_target(&rewards, &dones, &next_online, &next_target, &masks, self.cfg.gamma as f32, rule);
        let actions: Vec<usize> = batch.iter().map(|t| t.action).collect();
        let weights: Vec<f32> = sample.weights.iter().map(|&w| w as f32).collect();
        let cache = self.online.forward_cached(Input::Sparse(&obs));
        let (loss, grad, td) = q_regression_loss(cache.output(), self.n_actions, dueling, &actions, &y, &weights);
        let grads = self.online.backward(Input::Sparse(&obs), &cache, &grad);
        self.adam.step(&mut self.online, &grads);
        if self.buffer.mode() != super::replay::ReplayMode::Uniform {
            let td: Vec<f64> = td.iter().map(|&e| f64::from(e)).collect();
            self.buffer.update_priorities(&sample.indices, &td)?;
        }
        self.learn_steps += 1;
        if self.learn_steps.is_multiple_of(self.cfg.target_sync) {
            self.target.copy_from(&self.online);
        }
        if !loss.is_finite() {
            return Err(AgentError::Diverged(self.algo));
        }
        self.last_loss = Some(loss);
        Ok(loss)
    }
}

impl Agent for DqnAgent {
    fn algorithm(&self) -> Algorithm {
        self.algo
    }

    fn select_action(&mut self, obs: &QasObservation, mask: &[bool]) -> usize {
        let q = self.q_values(obs);
        let eps = self.epsilon();
        epsilon_greedy(&q, mask, eps, &mut self.rng)
    }

    fn observe(&mut self, t: Transition) -> Result<(), AgentError> {
        self.buffer.push(t);
        self.env_steps += 1;
        if self.buffer.len() >= self.cfg.batch_size {
            self.learn()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn terminal_target_is_reward() {
        let q = array![[1.0, 2.0]];
        let y = dqn_target(&[0.7], &[true], &q, &q, &[vec![true, true]], 0.9, TargetRule::Max);
        assert_eq!(y, vec![0.7]);
    }

    #[test]
    fn hand_tables() {
        let online = array![[1.0, 5.0, 2.0]];
        let target = array![[4.0, 0.5, 3.0]];
        let mask = [vec![true, true, false]];
        let dqn = dqn_target(&[1.0], &[false], &online, &target, &mask, 0.5, TargetRule::Max);
        let ddqn = dqn_target(&[1.0], &[false], &online, &target, &mask, 0.5, TargetRule::Double);
        assert_eq!(dqn, vec![1.0 + 0.5 * 4.0]);
        assert_eq!(ddqn, vec![1.0 + 0.5 * 0.5]);
        let same = dqn_target(&[1.0], &[false], &target, &target, &mask, 0.5, TargetRule::Double);
        assert_eq!(same, dqn);
    }
}
