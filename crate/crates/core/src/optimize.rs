//! Derivative-free inner loop for circuit angles.
//!
//! Wraps the COBYLA implementation from the `cobyla` crate (linear
//! approximations on a simplex inside a shrinking trust region). The budget
//! counts cost-function evaluations and the result always reports the best
//! point seen, never one worse than the start.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Recorded in run metadata.
pub const METHOD_NAME: &str = "cobyla";

/// Initial trust-region radius in radians.
pub const INITIAL_STEP: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    pub best_params: Vec<f64>,
    pub best_cost: f64,
    pub evals_used: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizeError {
    #[error("budget must allow at least one evaluation")]
    ZeroBudget,
    #[error("cost function returned {value} at angles {params:?}")]
    NonFinite { value: f64, params: Vec<f64> },
}

struct Tracker {
    best_params: Vec<f64>,
    best_cost: f64,
    evals: usize,
    budget: usize,
    bad: Option<(f64, Vec<f64>)>,
}

impl Tracker {
    fn record(&mut self, x: &[f64], c: f64) {
        self.evals += 1;
        if !c.is_finite() {
            if self.bad.is_none() {
                self.bad = Some((c, x.to_vec()));
            }
            return;
        }
        if c < self.best_cost {
            self.best_cost = c;
            self.best_params.clear();
            self.best_params.extend_from_slice(x);
        }
    }
}

/// Minimizes `cost_fn` from `initial` with at most `budget` evaluations.
///
/// `seed` is accepted for interface stability; the method itself is
/// deterministic.
pub fn minimize<F>(cost_fn: F, initial: &[f64], budget: usize, seed: u64) -> Result<OptimizeResult, OptimizeError>
where
    F: Fn(&[f64]) -> f64,
{
    let _ = seed;
    if budget == 0 {
        return Err(OptimizeError::ZeroBudget);
    }
    let c0 = cost_fn(initial);
    if !c0.is_finite() {
        return Err(OptimizeError::NonFinite { value: c0, params: initial.to_vec() });
    }
    let tracker = RefCell::new(Tracker { best_params: initial.to_vec(), best_cost: c0, evals: 1, budget, bad: None });
    if !initial.is_empty() && budget > 1 {
        let objective = |x: &[f64], _: &mut ()| -> f64 {
            let t = tracker.borrow_mut();
            if t.evals >= t.budget || t.bad.is_some() {
                // past the budget: report the incumbent so the solver winds down
                return t.best_cost;
            }
            drop(t);
            let c = cost_fn(x);
            let mut t = tracker.borrow_mut();
            t.record(x, c);
            if c.is_finite() {
                c
            } else {
                f64::MAX
            }
        };
        let bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); initial.len()];
        let no_constraints: Vec<fn(&[f64], &mut ()) -> f64> = Vec::new();
        let tols = cobyla::StopTols { ftol_rel: 0.0, ftol_abs: 1e-14, xtol_rel: 1e-10, xtol_abs: Vec::new() };
        // the solver's own stopping status carries nothing the tracker lacks
        let _ = cobyla::minimize(
            objective,
            initial,
            &bounds,
            &no_constraints,
            (),
            budget - 1,
            cobyla::RhoBeg::All(INITIAL_STEP),
            Some(tols),
        );
    }
    let t = tracker.into_inner();
    if let Some((value, params)) = t.bad {
        return Err(OptimizeError::NonFinite { value, params });
    }
    Ok(OptimizeResult { best_params: t.best_params, best_cost: t.best_cost, evals_used: t.evals.min(budget) })
}
