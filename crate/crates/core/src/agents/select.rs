//! Masked action selection.

use rand::Rng;

use super::heads::masked_log_softmax;
use crate::scalar::Real;

/// Argmax over legal entries; ties go to the lowest index.
///
/// # Panics
/// If no action is legal.
pub fn greedy_action<T: Real>(q: &[T], mask: &[bool]) -> usize {
    let mut best: Option<(usize, T)> = None;
    for (i, (&v, &legal)) in q.iter().zip(mask).enumerate() {
        if legal && best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.expect("mask has no legal action").0
}

/// Uniform choice among legal actions.
pub fn uniform_legal<R: Rng>(mask: &[bool], rng: &mut R) -> usize {
    let legal = mask.iter().filter(|&&m| m).count();
    assert!(legal > 0, "mask has no legal action");
    let k = rng.random_range(0..legal);
    mask.iter().enumerate().filter(|(_, &m)| m).nth(k).expect("k < legal").0
}

/// With probability `epsilon` a uniform legal action, else the greedy one.
pub fn epsilon_greedy<T: Real, R: Rng>(q: &[T], mask: &[bool], epsilon: f64, rng: &mut R) -> usize {
    if rng.random::<f64>() < epsilon {
        uniform_legal(mask, rng)
    } else {
        greedy_action(q, mask)
    }
}

/// Draws from the softmax over legal logits; returns the action and its
/// log-probability.
pub fn sample_softmax<T: Real, R: Rng>(logits: &[T], mask: &[bool], rng: &mut R) -> (usize, T) {
    let logp = masked_log_softmax(logits, mask);
    let u = T::lit(rng.random::<f64>());
    let mut acc = T::zero();
    let mut last = 0;
    for (i, &lp) in logp.iter().enumerate() {
        if !mask[i] {
            continue;
        }
        last = i;
        acc += lp.exp();
        if u < acc {
            return (i, lp);
        }
    }
    // rounding left the cumulative sum just short of u
    (last, logp[last])
}
