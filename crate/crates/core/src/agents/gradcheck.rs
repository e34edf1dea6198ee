use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::mlp::{flat_grad, Input, Mlp};
use crate::scalar::Real;

/// Central-difference step.
pub const FD_STEP: f64 = 1e-5;

/// Agreement between backpropagated and finite-difference gradients.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradCheck {
    /// Largest `|a - n| / max(|a|, |n|)` over parameters where either side
    /// exceeds `1e-8`.
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    /// Largest gradient magnitude seen on either side.
    pub max_magnitude: f64,
}

/// Compares [`Mlp::backward`] with central differences of `loss_fn`, which
/// maps a network output to `(loss, d loss / d output)`.
pub fn backward_check<T, F>(net: &Mlp<T>, x: Input<'_, T>, loss_fn: F) -> GradCheck
where
    T: Real,
    F: Fn(&Array2<T>) -> (T, Array2<T>),
{
    let cache = net.forward_cached(x.clone());
    let (_, g_out) = loss_fn(cache.output());
    let grads = net.backward(x.clone(), &cache, &g_out);
    let mut probe = net.clone();
    let h = T::lit(FD_STEP);
    let mut res = GradCheck { max_rel_error: 0.0, max_abs_error: 0.0, max_magnitude: 0.0 };
    for i in 0..net.param_count() {
        let p = net.param(i);
        probe.set_param(i, p + h);
        let up = loss_fn(&probe.forward(x.clone())).0;
        probe.set_param(i, p - h);
        let down = loss_fn(&probe.forward(x.clone())).0;
        probe.set_param(i, p);
        let numeric = ((up - down) / (h + h)).to_f64_lossy();
        let analytic = flat_grad(&grads, i).to_f64_lossy();
        let abs = (numeric - analytic).abs();
        let mag = numeric.abs().max(analytic.abs());
        res.max_abs_error = res.max_abs_error.max(abs);
        res.max_magnitude = res.max_magnitude.max(mag);
        if mag > 1e-8 {
            res.max_rel_error = res.max_rel_error.max(abs / mag);
        }
    }
    res
}
