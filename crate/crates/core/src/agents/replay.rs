use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::QasObservation;

/// Added to every priority so no transition becomes unsampleable.
pub const PRIORITY_EPS: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplayMode {
    Uniform,
    /// `P(i) = p_i^alpha / sum p^alpha`.
    Proportional,
    /// `P(i) ~ (1 / rank_i)^alpha`, rank 1 = largest priority.
    Rank,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub obs: QasObservation,
    pub action: usize,
    pub reward: f64,
    pub next_obs: QasObservation,
    pub done: bool,
    pub next_mask: Vec<bool>,
}

#[derive(Debug, Error, PartialEq)]
pub enum ReplayError {
    #[error("indices do not come from the most recent sample call")]
    StaleIndices,
    #[error("{indices} indices but {errors} errors")]
    LengthMismatch { indices: usize, errors: usize },
    #[error("non-finite TD error")]
    NonFinite,
}

/// Indices drawn by [`ReplayBuffer::sample`] with importance weights.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledBatch {
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
}

/// Fixed-capacity FIFO transition store with optional prioritization.
#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    capacity: usize,
    mode: ReplayMode,
    alpha: f64,
    items: Vec<Transition>,
    priorities: Vec<f64>,
    /// Next slot to overwrite once full.
    head: usize,
    max_priority: f64,
    /// Bumped on every push; sampled indices are valid for one generation.
    generation: u64,
    last_sample: Option<(u64, Vec<usize>)>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, mode: ReplayMode, alpha: f64) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            mode,
            alpha,
            items: Vec::new(),
            priorities: Vec::new(),
            head: 0,
            max_priority: 1.0,
            generation: 0,
            last_sample: None,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn mode(&self) -> ReplayMode {
        self.mode
    }

    pub fn get(&self, i: usize) -> &Transition {
        &self.items[i]
    }

    pub fn priorities(&self) -> &[f64] {
        &self.priorities
    }

    /// Stores `t` at the highest priority seen so far, evicting the oldest
    /// entry when full.
    pub fn push(&mut self, t: Transition) {
        self.generation += 1;
        if self.items.len() < self.capacity {
            self.items.push(t);
            self.priorities.push(self.max_priority);
        } else {
            self.items[self.head] = t;
            self.priorities[self.head] = self.max_priority;
            self.head = (self.head + 1) % self.capacity;
        }
    }

    /// Sampling probability of every stored entry.
    pub fn probabilities(&self) -> Vec<f64> {
        let n = self.items.len();
        let raw: Vec<f64> = match self.mode {
            ReplayMode::Uniform => vec![1.0; n],
            ReplayMode::Proportional => self.priorities.iter().map(|p| p.powf(self.alpha)).collect(),
            ReplayMode::Rank => {
                let mut order: Vec<usize> = (0..n).collect();
                // stable: equal priorities keep insertion order
                order.sort_by(|&a, &b| self.priorities[b].total_cmp(&self.priorities[a]));
                let mut w = vec![0.0; n];
                for (rank, &i) in order.iter().enumerate() {
                    w[i] = (1.0 / (rank + 1) as f64).powf(self.alpha);
                }
                w
            }
        };
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    }

    /// Draws `batch` indices with replacement. Importance weights are
    /// `(N P(i))^-beta` divided by the largest weight over the buffer.
    pub fn sample<R: Rng>(&mut self, batch: usize, beta: f64, rng: &mut R) -> SampledBatch {
        assert!(!self.items.is_empty(), "sampling from an empty buffer");
        let n = self.items.len();
        let (indices, weights) = if self.mode == ReplayMode::Uniform {
            ((0..batch).map(|_| rng.random_range(0..n)).collect(), vec![1.0; batch])
        } else {
            let probs = self.probabilities();
            let mut cdf = Vec::with_capacity(n);
            let mut acc = 0.0;
            for p in &probs {
                acc += p;
                cdf.push(acc);
            }
            let indices: Vec<usize> = (0..batch)
                .map(|_| {
                    let u = rng.random::<f64>() * acc;
                    cdf.partition_point(|&c| c <= u).min(n - 1)
                })
                .collect();
            let p_min = probs.iter().copied().fold(f64::INFINITY, f64::min);
            let w_max = (n as f64 * p_min).powf(-beta);
            let weights = indices.iter().map(|&i| (n as f64 * probs[i]).powf(-beta) / w_max).collect();
            (indices, weights)
        };
        self.last_sample = Some((self.generation, indices.clone()));
        SampledBatch { indices, weights }
    }

    /// Sets priorities `|delta| + PRIORITY_EPS` for the last sampled indices.
    pub fn update_priorities(&mut self, indices: &[usize], td_errors: &[f64]) -> Result<(), ReplayError> {
        if indices.len() != td_errors.len() {
            return Err(ReplayError::LengthMismatch { indices: indices.len(), errors: td_errors.len() });
        }
        match &self.last_sample {
            Some((g, last)) if *g == self.generation && last.as_slice() == indices => {}
            _ => return Err(ReplayError::StaleIndices),
        }
        if td_errors.iter().any(|e| !e.is_finite()) {
            return Err(ReplayError::NonFinite);
        }
        for (&i, &e) in indices.iter().zip(td_errors) {
            let p = e.abs() + PRIORITY_EPS;
            self.priorities[i] = p;
            self.max_priority = self.max_priority.max(p);
        }
        Ok(())
    }
}

/// Linear anneal from `beta0` to 1 over `steps` learner updates.
pub fn annealed_beta(beta0: f64, step: u64, steps: u64) -> f64 {
    if steps == 0 {
        return 1.0;
    }
    beta0 + (1.0 - beta0) * (step as f64 / steps as f64).min(1.0)
}
