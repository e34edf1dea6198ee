//! Loss heads on raw network outputs, each returning the loss and its
//! gradient with respect to the output batch.
//!
//! Output layouts with `A` actions: Q-networks emit `A` values; dueling
//! networks emit `A` advantages followed by the state value; actor-critic
//! networks emit `A` logits followed by the state value.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// `Q(a) = V + A(a) - mean(A)`.
pub fn dueling_aggregate<T: Real>(value: T, advantages: &[T]) -> Vec<T> {
    let mean = advantages.iter().copied().sum::<T>() / T::lit(advantages.len() as f64);
    advantages.iter().map(|&a| value + a - mean).collect()
}

/// Q-values of one output row.
pub fn q_row<T: Real>(row: &[T], n_actions: usize, dueling: bool) -> Vec<T> {
    if dueling {
        dueling_aggregate(row[n_actions], &row[..n_actions])
    } else {
        row[..n_actions].to_vec()
    }
}

/// Weighted squared TD loss `mean(w (Q(s,a) - y)^2 / 2)`.
///
/// Returns the loss, the output gradient and the TD errors `y - Q(s,a)`.
pub fn q_regression_loss<T: Real>(
    out: &Array2<T>,
    n_actions: usize,
    dueling: bool,
    actions: &[usize],
    targets: &[T],
    weights: &[T],
) -> (T, Array2<T>, Vec<T>) {
    let b = out.nrows();
    let inv_b = T::one() / T::lit(b as f64);
    let half = T::lit(0.5);
    let mut grad = Array2::zeros(out.dim());
    let mut loss = T::zero();
    let mut td = Vec::with_capacity(b);
    for i in 0..b {
        let row = out.row(i);
        let row = row.as_slice().expect("standard layout");
        let q = q_row(row, n_actions, dueling)[actions[i]];
        let e = q - targets[i];
        td.push(-e);
        loss += weights[i] * half * e * e * inv_b;
        let g = weights[i] * e * inv_b;
        if dueling {
            // dQ(a)/dA(a') = [a == a'] - 1/A, dQ(a)/dV = 1
            let share = g / T::lit(n_actions as f64);
            for j in 0..n_actions {
                grad[[i, j]] -= share;
            }
            grad[[i, actions[i]]] += g;
            grad[[i, n_actions]] += g;
        } else {
            grad[[i, actions[i]]] += g;
        }
    }
    (loss, grad, td)
}

/// Log-softmax over the legal entries; illegal entries get `-inf`.
pub fn masked_log_softmax<T: Real>(logits: &[T], mask: &[bool]) -> Vec<T> {
    let max = logits.iter().zip(mask).filter(|(_, &m)| m).map(|(&l, _)| l).fold(T::neg_infinity(), T::max);
    assert!(max > T::neg_infinity(), "mask has no legal action");
    let lse = max + logits.iter().zip(mask).filter(|(_, &m)| m).map(|(&l, _)| (l - max).exp()).sum::<T>().ln();
    logits.iter().zip(mask).map(|(&l, &m)| if m { l - lse } else { T::neg_infinity() }).collect()
}

/// Entropy of a distribution given by (masked) log-probabilities.
pub fn entropy<T: Real>(logp: &[T]) -> T {
    -logp.iter().filter(|l| l.is_finite()).map(|&l| l.exp() * l).sum::<T>()
}

/// Policy objective per sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Surrogate<T> {
    /// `log pi(a) A`.
    Vanilla,
    /// `min(rho A, clip(rho, 1-eps, 1+eps) A)`.
    Clip { eps: T },
    /// Clip band with a negative-slope rollback of strength `alpha` outside.
    Rollback { eps: T, alpha: T },
}

/// `min(rho A, clip(rho, 1-eps, 1+eps) A)`.
pub fn ppo_surrogate<T: Real>(rho: T, adv: T, eps: T) -> T {
    let clipped = rho.max(T::one() - eps).min(T::one() + eps);
    (rho * adv).min(clipped * adv)
}

/// Rollback function: identity inside `[1-eps, 1+eps]`, slope `-alpha`
/// outside, continuous at both edges.
pub fn rollback<T: Real>(rho: T, eps: T, alpha: T) -> T {
    let one = T::one();
    if rho > one + eps {
        -alpha * rho + (one + alpha) * (one + eps)
    } else if rho < one - eps {
        -alpha * rho + (one + alpha) * (one - eps)
    } else {
        rho
    }
}

pub fn tppo_surrogate<T: Real>(rho: T, adv: T, eps: T, alpha: T) -> T {
    (rho * adv).min(rollback(rho, eps, alpha) * adv)
}

impl<T: Real> Surrogate<T> {
    /// Surrogate value and its derivative in `rho`.
    fn eval(&self, rho: T, adv: T) -> (T, T) {
        match *self {
            Surrogate::Vanilla => unreachable!("vanilla objective is not ratio based"),
            Surrogate::Clip { eps } => {
                let s = ppo_surrogate(rho, adv, eps);
                (s, if rho * adv <= s { adv } else { T::zero() })
            }
            Surrogate::Rollback { eps, alpha } => {
                let s = tppo_surrogate(rho, adv, eps, alpha);
                let inside = rho >= T::one() - eps && rho <= T::one() + eps;
                (s, if rho * adv <= s || inside { adv } else { -alpha * adv })
            }
        }
    }
}

/// Inputs for [`actor_critic_loss`], one entry per sample.
#[derive(Clone, Copy, Debug)]
pub struct PolicyBatch<'a, T> {
    pub masks: &'a [Vec<bool>],
    pub actions: &'a [usize],
    pub advantages: &'a [T],
    pub returns: &'a [T],
    /// Behaviour-policy log-probabilities (ratio-based surrogates only).
    pub old_logp: Option<&'a [T]>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LossParts<T> {
    pub policy: T,
    pub value: T,
    pub entropy: T,
    pub total: T,
}

/// `policy + value_coef * value - entropy_coef * entropy`, each a batch mean;
/// the value term is `(V - R)^2 / 2`.
pub fn actor_critic_loss<T: Real>(
    out: &Array2<T>,
    batch: &PolicyBatch<'_, T>,
    surrogate: Surrogate<T>,
    value_coef: T,
    entropy_coef: T,
) -> (LossParts<T>, Array2<T>) {
    let (b, width) = out.dim();
    let n_actions = width - 1;
    let inv_b = T::one() / T::lit(b as f64);
    let mut grad = Array2::zeros(out.dim());
    let mut parts = LossParts::default();
    for i in 0..b {
        let row = out.row(i);
        let row = row.as_slice().expect("standard layout");
        let logp = masked_log_softmax(&row[..n_actions], &batch.masks[i]);
        let a = batch.actions[i];
        let adv = batch.advantages[i];
        // d(-S)/d logit_j = -s_l * ([j == a] - p_j), with s_l = dS/d log pi(a)
        let (s, s_l) = match surrogate {
            Surrogate::Vanilla => (logp[a] * adv, adv),
            _ => {
                let old = batch.old_logp.expect("ratio surrogate needs old log-probabilities")[i];
                let rho = (logp[a] - old).exp();
                let (s, ds) = surrogate.eval(rho, adv);
                (s, ds * rho)
            }
        };
        let h = entropy(&logp);
        let v = row[n_actions];
        let dv = v - batch.returns[i];
        parts.policy -= s * inv_b;
        parts.entropy += h * inv_b;
        parts.value += T::lit(0.5) * dv * dv * inv_b;
        for j in 0..n_actions {
            if !batch.masks[i][j] {
                continue;
            }
            let p = logp[j].exp();
            let onehot = if j == a { T::one() } else { T::zero() };
            let g_pol = -s_l * (onehot - p);
            // dH/dl_j = -p_j (log p_j + H)
            let g_ent = p * (logp[j] + h);
            grad[[i, j]] = (g_pol + entropy_coef * g_ent) * inv_b;
        }
        grad[[i, n_actions]] = value_coef * dv * inv_b;
    }
    parts.total = parts.policy + value_coef * parts.value - entropy_coef * parts.entropy;
    (parts, grad)
}
