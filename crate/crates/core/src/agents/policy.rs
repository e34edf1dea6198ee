//! Actor-critic agents: A2C and the two proximal variants.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::Adam;
use super::config::{AgentConfig, Algorithm};
use super::heads::{actor_critic_loss, LossParts, PolicyBatch, Surrogate};
use super::mlp::{Input, Layer, Mlp, SparseRow};
use super::replay::Transition;
use super::select::sample_softmax;
use super::{Agent, AgentError, Net};
use crate::env::QasObservation;

/// One recorded environment step.
#[derive(Clone, Debug)]
pub struct RolloutStep {
    pub obs: SparseRow<f32>,
    pub mask: Vec<bool>,
    pub action: usize,
    pub logp: f32,
    pub value: f32,
    pub reward: f32,
    pub done: bool,
}

/// Discounted returns, bootstrapped from `bootstrap` after the last step and
/// cut at episode ends.
pub fn discounted_returns(steps: &[RolloutStep], bootstrap: f32, gamma: f32) -> Vec<f32> {
    let mut out = vec![0.0; steps.len()];
    let mut r = bootstrap;
    for (i, s) in steps.iter().enumerate().rev() {
        if s.done {
            r = 0.0;
        }
        r = s.reward + gamma * r;
        out[i] = r;
    }
    out
}

/// Generalized advantage estimates and the matching value targets.
pub fn gae(steps: &[RolloutStep], bootstrap: f32, gamma: f32, lambda: f32) -> (Vec<f32>, Vec<f32>) {
    let n = steps.len();
    let mut adv = vec![0.0; n];
    let mut next_value = bootstrap;
    let mut running = 0.0;
    for i in (0..n).rev() {
        let s = &steps[i];
        let live = if s.done { 0.0 } else { 1.0 };
        let delta = s.reward + gamma * next_value * live - s.value;
        running = delta + gamma * lambda * live * running;
        adv[i] = running;
        next_value = s.value;
    }
    let returns = adv.iter().zip(steps).map(|(a, s)| a + s.value).collect();
    (adv, returns)
}

/// Zero mean, unit variance (left untouched when the spread vanishes).
pub fn normalize(v: &mut [f32]) {
    if v.len() < 2 {
        return;
    }
    let n = v.len() as f32;
    let mean = v.iter().sum::<f32>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f32>() / n;
    let std = var.sqrt();
    for x in v.iter_mut() {
        *x = (*x - mean) / (std + 1e-8);
    }
}

/// Advantage actor-critic loss and gradients over `steps`.
pub fn a2c_gradients(
    net: &Net,
    steps: &[RolloutStep],
    bootstrap: f32,
    cfg: &AgentConfig,
) -> (LossParts<f32>, Vec<Layer<f32>>) {
    let returns = discounted_returns(steps, bootstrap, cfg.gamma as f32);
    let adv: Vec<f32> = returns.iter().zip(steps).map(|(r, s)| r - s.value).collect();
    let rows: Vec<SparseRow<f32>> = steps.iter().map(|s| s.obs.clone()).collect();
    let masks: Vec<Vec<bool>> = steps.iter().map(|s| s.mask.clone()).collect();
    let actions: Vec<usize> = steps.iter().map(|s| s.action).collect();
    let cache = net.forward_cached(Input::Sparse(&rows));
    let batch = PolicyBatch { masks: &masks, actions: &actions, advantages: &adv, returns: &returns, old_logp: None };
    let (parts, grad) = actor_critic_loss(
        cache.output(),
        &batch,
        Surrogate::Vanilla,
        cfg.ppo.value_coef as f32,
        cfg.ppo.entropy_coef as f32,
    );
    (parts, net.backward(Input::Sparse(&rows), &cache, &grad))
}

/// Logits and value for one observation.
pub fn policy_head(net: &Net, obs: &QasObservation) -> (Vec<f32>, f32) {
    let row = [SparseRow::from_observation(obs)];
    let out = net.forward(Input::Sparse(&row));
    let row = out.row(0);
    let row = row.as_slice().expect("layout");
    let a = row.len() - 1;
    (row[..a].to_vec(), row[a])
}

pub struct ActorCriticAgent {
    algo: Algorithm,
    cfg: AgentConfig,
    net: Net,
    adam: Adam<f32>,
    rng: ChaCha8Rng,
    steps: Vec<RolloutStep>,
    pending: Option<(usize, f32, f32, Vec<bool>)>,
    updates: u64,
    last_loss: Option<LossParts<f32>>,
}

impl ActorCriticAgent {
    pub fn new(algo: Algorithm, cfg: AgentConfig, sizes: &[usize], seed: u64) -> Self {
        assert!(matches!(algo, Algorithm::A2c | Algorithm::Ppo | Algorithm::Tppo), "{algo} is not handled here");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = sizes.to_vec();
        *s.last_mut().expect("sizes") += 1;
        let net = Mlp::new(&s, &mut rng);
        let adam = Adam::new(&net, cfg.lr as f32, cfg.max_grad_norm as f32);
        Self { algo, cfg, net, adam, rng, steps: Vec::new(), pending: None, updates: 0, last_loss: None }
    }

    pub fn net(&self) -> &Net {
        &self.net
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn last_loss(&self) -> Option<LossParts<f32>> {
        self.last_loss
    }

    fn surrogate(&self) -> Surrogate<f32> {
        let eps = self.cfg.ppo.clip as f32;
        match self.algo {
            Algorithm::Tppo => Surrogate::Rollback { eps, alpha: self.cfg.tppo_rollback as f32 },
            _ => Surrogate::Clip { eps },
        }
    }

    fn bootstrap(&self, last: &Transition) -> f32 {
        if last.done {
            0.0
        } else {
            policy_head(&self.net, &last.next_obs).1
        }
    }

    /// Clipped (or rolled-back) surrogate update over the stored rollout.
    pub fn ppo_update(&mut self, bootstrap: f32) -> LossParts<f32> {
        let p = self.cfg.ppo;
        let (mut adv, returns) = gae(&self.steps, bootstrap, self.cfg.gamma as f32, p.gae_lambda as f32);
        normalize(&mut adv);
        let mut order: Vec<usize> = (0..self.steps.len()).collect();
        let surrogate = self.surrogate();
        let mut last = LossParts::default();
        for _ in 0..p.epochs {
            order.shuffle(&mut self.rng);
            for chunk in order.chunks(p.minibatch) {
                let rows: Vec<SparseRow<f32>> = chunk.iter().map(|&i| self.steps[i].obs.clone()).collect();
                let masks: Vec<Vec<bool>> = chunk.iter().map(|&i| self.steps[i].mask.clone()).collect();
                let actions: Vec<usize> = chunk.iter().map(|&i| self.steps[i].action).collect();
                let a: Vec<f32> = chunk.iter().map(|&i| adv[i]).collect();
                let r: Vec<f32> = chunk.iter().map(|&i| returns[i]).collect();
                let old: Vec<f32> = chunk.iter().map(|&i| self.steps[i].logp).collect();
                let cache = self.net.forward_cached(Input::Sparse(&rows));
                let batch =
                    PolicyBatch { masks: &masks, actions: &actions, advantages: &a, returns: &r, old_logp: Some(&old) };
                let (parts, grad) =
                    actor_critic_loss(cache.output(), &batch, surrogate, p.value_coef as f32, p.entropy_coef as f32);
                let grads = self.net.backward(Input::Sparse(&rows), &cache, &grad);
                self.adam.step(&mut self.net, &grads);
                last = parts;
            }
        }
        last
    }

    fn flush(&mut self, bootstrap: f32) -> Result<(), AgentError> {
        let parts = if self.algo == Algorithm::A2c {
            let (parts, grads) = a2c_gradients(&self.net, &self.steps, bootstrap, &self.cfg);
            self.adam.step(&mut self.net, &grads);
            parts
        } else {
            self.ppo_update(bootstrap)
        };
        self.steps.clear();
        self.updates += 1;
        if !parts.total.is_finite() || !self.net.is_finite() {
            return Err(AgentError::Diverged(self.algo));
        }
        self.last_loss = Some(parts);
        Ok(())
    }
}

impl Agent for ActorCriticAgent {
    fn algorithm(&self) -> Algorithm {
        self.algo
    }

    fn select_action(&mut self, obs: &QasObservation, mask: &[bool]) -> usize {
        let (logits, value) = policy_head(&self.net, obs);
        let (a, logp) = sample_softmax(&logits, mask, &mut self.rng);
        self.pending = Some((a, logp, value, mask.to_vec()));
        a
    }

    fn observe(&mut self, t: Transition) -> Result<(), AgentError> {
        let (action, logp, value, mask) = match self.pending.take() {
            Some(p) if p.0 == t.action => p,
            _ => return Err(AgentError::UnselectedAction(t.action)),
        };
        self.steps.push(RolloutStep {
            obs: SparseRow::from_observation(&t.obs),
            mask,
            action,
            logp,
            value,
            reward: t.reward as f32,
            done: t.done,
        });
        let limit = if self.algo == Algorithm::A2c { self.cfg.ac_steps } else { self.cfg.ppo.rollout };
        let a2c_episode_end = self.algo == Algorithm::A2c && t.done;
        if self.steps.len() >= limit || a2c_episode_end {
            let b = self.bootstrap(&t);
            self.flush(b)?;
        }
        Ok(())
    }
}
