//! Asynchronous advantage actor-critic: workers with private environments
//! push gradients into a shared parameter store.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::{clip_scale, TensorAdam};
use super::config::{AgentConfig, Algorithm};
use super::mlp::{Layer, Mlp, SparseRow};
use super::policy::{a2c_gradients, policy_head, RolloutStep};
use super::replay::Transition;
use super::select::sample_softmax;
use super::train::{layer_sizes, train_episode, EpisodeStats, TrainOptions};
use super::{Agent, AgentError, Net};
use crate::env::{Curriculum, QasEnv, QasObservation};
use crate::problems::TaskSpec;

struct SharedTensor {
    data: Vec<f32>,
    adam: TensorAdam<f32>,
}

/// Parameters shared by all workers, locked per tensor.
pub struct SharedStore {
    tensors: Vec<Mutex<SharedTensor>>,
    lr: f32,
    max_grad_norm: f32,
}

impl SharedStore {
    pub fn new(net: &Net, lr: f32, max_grad_norm: f32) -> Self {
        let mut tensors = Vec::new();
        for l in net.layers() {
            for data in [l.w.as_slice().expect("layout").to_vec(), l.b.to_vec()] {
                let adam = TensorAdam::new(data.len());
                tensors.push(Mutex::new(SharedTensor { data, adam }));
            }
        }
        Self { tensors, lr, max_grad_norm }
    }

    /// Applies one gradient, each tensor atomically.
    pub fn apply(&self, grads: &[Layer<f32>]) {
        let scale = clip_scale(grads, self.max_grad_norm);
        for (i, g) in grads.iter().enumerate() {
            for (j, slice) in [g.w.as_slice().expect("layout"), g.b.as_slice().expect("layout")].into_iter().enumerate()
            {
                let mut t = self.tensors[2 * i + j].lock().expect("store lock");
                let SharedTensor { data, adam } = &mut *t;
                adam.step(data, slice, self.lr, scale);
            }
        }
    }

    /// Copies the current parameters into `net`, one tensor snapshot at a time.
    pub fn refresh(&self, net: &mut Net) {
        for (i, l) in net.layers_mut().iter_mut().enumerate() {
            let w = self.tensors[2 * i].lock().expect("store lock");
            l.w.as_slice_mut().expect("layout").copy_from_slice(&w.data);
            drop(w);
            let b = self.tensors[2 * i + 1].lock().expect("store lock");
            l.b.as_slice_mut().expect("layout").copy_from_slice(&b.data);
        }
    }
}

/// One worker's view: a local network refreshed from the store after every
/// update.
pub struct A3cWorker {
    cfg: AgentConfig,
    local: Net,
    store: Arc<SharedStore>,
    rng: ChaCha8Rng,
    steps: Vec<RolloutStep>,
    pending: Option<(usize, f32, f32, Vec<bool>)>,
}

impl A3cWorker {
    pub fn new(cfg: AgentConfig, store: Arc<SharedStore>, template: &Net, seed: u64) -> Self {
        let mut local = template.clone();
        store.refresh(&mut local);
        Self { cfg, local, store, rng: ChaCha8Rng::seed_from_u64(seed), steps: Vec::new(), pending: None }
    }

    fn flush(&mut self, bootstrap: f32) -> Result<(), AgentError> {
        let (parts, grads) = a2c_gradients(&self.local, &self.steps, bootstrap, &self.cfg);
        self.steps.clear();
        if !parts.total.is_finite() {
            return Err(AgentError::Diverged(Algorithm::A3c));
        }
        self.store.apply(&grads);
        self.store.refresh(&mut self.local);
        Ok(())
    }
}

impl Agent for A3cWorker {
    fn algorithm(&self) -> Algorithm {
        Algorithm::A3c
    }

    fn select_action(&mut self, obs: &QasObservation, mask: &[bool]) -> usize {
        let (logits, value) = policy_head(&self.local, obs);
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
        if t.done || self.steps.len() >= self.cfg.ac_steps {
            let b = if t.done { 0.0 } else { policy_head(&self.local, &t.next_obs).1 };
            self.flush(b)?;
        }
        Ok(())
    }
}

/// Runs `cfg.a3c_workers` threads until `opts.episodes` episodes are done in
/// total. Episodes are numbered in start order.
pub fn train_a3c(
    task: &TaskSpec,
    cfg: &AgentConfig,
    opts: &TrainOptions,
    seed: u64,
) -> Result<Vec<EpisodeStats>, AgentError> {
    let probe = QasEnv::new(task.clone())?;
    let sizes = layer_sizes(task, cfg, probe.input_len(), probe.n_actions() + 1);
    let template = Mlp::new(&sizes, &mut ChaCha8Rng::seed_from_u64(seed));
    let store = Arc::new(SharedStore::new(&template, cfg.lr as f32, cfg.max_grad_norm as f32));
    let next_episode = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let results: Mutex<Vec<EpisodeStats>> = Mutex::new(Vec::new());
    let first_error: Mutex<Option<AgentError>> = Mutex::new(None);

    thread::scope(|s| {
        for w in 0..cfg.a3c_workers {
            let store = Arc::clone(&store);
            let (template, next_episode, stop, results, first_error) =
                (&template, &next_episode, &stop, &results, &first_error);
            s.spawn(move || {
                let mut worker = A3cWorker::new(cfg.clone(), store, template, seed ^ (0x9e37_79b9 * (w as u64 + 1)));
                let mut env = match QasEnv::new(task.clone()) {
                    Ok(e) => e,
                    Err(e) => {
                        first_error.lock().expect("lock").get_or_insert(e.into());
                        stop.store(true, Ordering::SeqCst);
                        return;
                    }
                };
                let mut curriculum = opts.curriculum.unwrap_or(Curriculum::disabled(task.zeta));
                env.set_zeta(curriculum.zeta());
                while !stop.load(Ordering::SeqCst) {
                    let ep = next_episode.fetch_add(1, Ordering::SeqCst);
                    if ep >= opts.episodes {
                        break;
                    }
                    match train_episode(&mut worker, &mut env, ep) {
                        Ok(stats) => {
                            let success = stats.success;
                            results.lock().expect("lock").push(stats);
                            env.set_zeta(curriculum.update(success));
                            if success && opts.stop_on_success {
                                stop.store(true, Ordering::SeqCst);
                            }
                        }
                        Err(e) => {
                            first_error.lock().expect("lock").get_or_insert(e);
                            stop.store(true, Ordering::SeqCst);
                        }
                    }
                }
            });
        }
    });
    if let Some(e) = first_error.into_inner().expect("lock") {
        return Err(e);
    }
    let mut all = results.into_inner().expect("lock");
    all.sort_by_key(|e| e.episode);
    Ok(all)
}
