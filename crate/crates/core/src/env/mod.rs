//! Circuit-building environment: one gate per step, angles re-optimized after
//! every step, reward from the task cost.

mod action;
mod circuit;
mod cost;
mod curriculum;
mod mask;
mod observation;
mod reward;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use action::{ActionSpace, GateAction};
pub use circuit::{CircuitFile, CircuitProgram, GateEntry};
pub use cost::{vqc_cost, vqc_score_with, vqsd_cost, vqsd_cost_with, VqcScore};
pub use curriculum::Curriculum;
pub use mask::{is_legal, legal_action_mask};
pub use observation::{input_len, structure_len, PlacedGate, QasObservation};
pub use reward::{
    cost_reward, fidelity_reward, state_prep_reward, DENOM_FLOOR, R_BIG, SUCCESS_REWARD, TIMEOUT_PENALTY,
};

use crate::optimize::{self, OptimizeError};
use crate::problems::{ProblemError, Split, TaskKind, TaskPayload, TaskSpec};
use crate::qsim::{DensityMatrix, GateKind, SimError, StateVector};

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("action {index} outside the action space of size {size}")]
    ActionOutOfRange { index: usize, size: usize },
    #[error("action {index} ({action}) is masked in the current state")]
    IllegalAction { index: usize, action: String },
    #[error("episode is over; call reset")]
    EpisodeOver,
    #[error("stored moment {stored} disagrees with scheduled moment {scheduled}")]
    MomentMismatch { stored: usize, scheduled: usize },
    #[error("expected {expected} angles, got {got}")]
    ParamCount { expected: usize, got: usize },
    #[error("circuit depth {depth} exceeds observation capacity {d_max}")]
    DepthOverflow { depth: usize, d_max: usize },
    #[error("gate {0} is not in this action space")]
    ForeignGate(GateKind),
    #[error("observation does not decode to a circuit")]
    CorruptObservation,
    #[error("expected {expected} qubits, got {got}")]
    QubitMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    /// Thresholded cost `C_t`.
    pub cost: f64,
    /// Value of the optimized objective (equals `cost` except for VQC).
    pub objective: f64,
    pub depth: usize,
    pub gate_count: usize,
    pub optimizer_evals: usize,
    pub success: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub observation: QasObservation,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

/// Environment for one task. Not shared between threads.
#[derive(Clone, Debug)]
pub struct QasEnv {
    task: TaskSpec,
    space: ActionSpace,
    circuit: CircuitProgram,
    zeta: f64,
    seed: u64,
    t: usize,
    c0: f64,
    cost: f64,
    objective: f64,
    done: bool,
    success: bool,
}

impl QasEnv {
    pub fn new(task: TaskSpec) -> Result<Self, EnvError> {
        task.validate()?;
        let space = ActionSpace::new(task.kind, task.n_qubits);
        let circuit = CircuitProgram::new(task.n_qubits)?;
        let zeta = task.zeta;
        let mut env = Self {
            task,
            space,
            circuit,
            zeta,
            seed: 0,
            t: 0,
            c0: 0.0,
            cost: 0.0,
            objective: 0.0,
            done: false,
            success: false,
        };
        env.reset(0)?;
        Ok(env)
    }

    /// Starts a new episode from the empty circuit.
    pub fn reset(&mut self, seed: u64) -> Result<QasObservation, EnvError> {
        self.seed = seed;
        self.circuit = CircuitProgram::new(self.task.n_qubits)?;
        self.t = 0;
        self.done = false;
        self.success = false;
        let (cost, objective) = self.evaluate_params(&self.circuit, &[])?;
        self.c0 = cost;
        self.cost = cost;
        self.objective = objective;
        self.observation()
    }

    pub fn task(&self) -> &TaskSpec {
        &self.task
    }

    pub fn action_space(&self) -> &ActionSpace {
        &self.space
    }

    pub fn n_actions(&self) -> usize {
        self.space.size()
    }

    pub fn input_len(&self) -> usize {
        input_len(self.task.d_max, self.task.n_qubits)
    }

    pub fn circuit(&self) -> &CircuitProgram {
        &self.circuit
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn succeeded(&self) -> bool {
        self.success
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    /// Current thresholded cost `C_t`.
    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn e_min(&self) -> f64 {
        self.task.e_min()
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    /// Overrides the success threshold (curriculum).
    pub fn set_zeta(&mut self, zeta: f64) {
        self.zeta = zeta;
    }

    pub fn legal_mask(&self) -> Vec<bool> {
        legal_action_mask(&self.circuit, &self.space)
    }

    pub fn observation(&self) -> Result<QasObservation, EnvError> {
        QasObservation::encode(&self.circuit, &self.space, self.task.d_max, self.cost_feature(self.cost))
    }

    fn cost_feature(&self, c: f64) -> f64 {
        if self.task.kind == TaskKind::StatePrep {
            return c.clamp(0.0, 1.0);
        }
        let e_min = self.e_min();
        let scale = (self.c0 - e_min).abs();
        if scale < 1e-15 {
            0.0
        } else {
            ((c - e_min) / scale).clamp(0.0, 1.0)
        }
    }

    /// Appends the gate of `action`, re-optimizes the angles and scores the
    /// result.
    pub fn step(&mut self, action: usize) -> Result<StepOutcome, EnvError> {
        if self.done {
            return Err(EnvError::EpisodeOver);
        }
        let a = self.space.decode(action)?;
        if !is_legal(&self.circuit, &a) {
            return Err(EnvError::IllegalAction { index: action, action: a.gate().to_string() });
        }
        let mut next = self.circuit.clone();
        next.push(a.gate())?;
        let mut evals = 0;
        if self.task.kind.is_parameterized() {
            let start = next.params();
            let result = {
                let probe = &next;
                optimize::minimize(
                    |p| self.objective_of(probe, p).unwrap_or(f64::NAN),
                    &start,
                    self.task.optimizer_budget,
                    self.seed ^ (self.t as u64),
                )?
            };
            evals = result.evals_used;
            next.set_params(&result.best_params)?;
        }
        let (cost, objective) = self.evaluate_params(&next, &next.params())?;
        self.circuit = next;
        self.t += 1;
        let (reward, done, success) = if self.task.kind == TaskKind::StatePrep {
            let (r, hit) = fidelity_reward(1.0 - cost, 1.0 - self.zeta);
            (r, hit || self.t >= self.task.d_max, hit)
        } else {
            let (r, done) = cost_reward(self.cost, cost, self.e_min(), self.zeta, self.t, self.task.d_max);
            (r, done, cost - self.e_min() <= self.zeta)
        };
        self.cost = cost;
        self.objective = objective;
        self.done = done;
        self.success = success;
        Ok(StepOutcome {
            observation: self.observation()?,
            reward,
            done,
            info: StepInfo {
                cost,
                objective,
                depth: self.circuit.depth(),
                gate_count: self.circuit.gate_count(),
                optimizer_evals: evals,
                success,
            },
        })
    }

    /// The quantity the inner optimizer minimizes.
    fn objective_of(&self, circuit: &CircuitProgram, params: &[f64]) -> Result<f64, EnvError> {
        let noise = &self.task.noise;
        match &self.task.payload {
            TaskPayload::Hamiltonian(h) => {
                if noise.enabled {
                    let rho = circuit.evolve_density(&DensityMatrix::zero_state(circuit.n_qubits())?, params, noise)?;
                    Ok(h.expectation_mixed(&rho)?)
                } else {
                    let mut s = StateVector::zero_state(circuit.n_qubits())?;
                    for g in circuit.gates_with(params) {
                        s.apply(&g)?;
                    }
                    Ok(h.expectation_pure(&s)?)
                }
            }
            TaskPayload::MixedState(rho) => vqsd_cost_with(rho, circuit, params, noise),
            TaskPayload::Dataset(d) => Ok(vqc_score_with(circuit, params, d.split(Split::Train), noise)?.cost),
            TaskPayload::TargetState(target) => Ok(1.0 - self.fidelity_of(circuit, params, target)?),
        }
    }

    fn fidelity_of(
        &self,
        circuit: &CircuitProgram,
        params: &[f64],
        target: &StateVector<f64>,
    ) -> Result<f64, EnvError> {
        let noise = &self.task.noise;
        if noise.enabled {
            let rho = circuit.evolve_density(&DensityMatrix::zero_state(circuit.n_qubits())?, params, noise)?;
            Ok(rho.fidelity_with_pure(target)?)
        } else {
            let mut s = StateVector::zero_state(circuit.n_qubits())?;
            for g in circuit.gates_with(params) {
                s.apply(&g)?;
            }
            Ok(s.fidelity(target)?)
        }
    }

    /// `(C_t, objective)` for `circuit` at `params`.
    fn evaluate_params(&self, circuit: &CircuitProgram, params: &[f64]) -> Result<(f64, f64), EnvError> {
        let objective = self.objective_of(circuit, params)?;
        let cost = match &self.task.payload {
            TaskPayload::Dataset(d) => {
                1.0 - vqc_score_with(circuit, params, d.split(Split::Train), &self.task.noise)?.accuracy
            }
            _ => objective,
        };
        Ok((cost, objective))
    }

    /// Thresholded cost `C` of an arbitrary circuit under this task, with its
    /// own angles.
    pub fn evaluate(&self, circuit: &CircuitProgram) -> Result<f64, EnvError> {
        if circuit.n_qubits() != self.task.n_qubits {
            return Err(EnvError::QubitMismatch { expected: self.task.n_qubits, got: circuit.n_qubits() });
        }
        Ok(self.evaluate_params(circuit, &circuit.params())?.0)
    }

    /// Reported error of the current circuit: energy gap (VQE), cost (VQSD),
    /// test error rate (VQC), or infidelity (state preparation).
    pub fn error_metric(&self) -> Result<f64, EnvError> {
        Ok(match &self.task.payload {
            TaskPayload::Hamiltonian(_) => (self.objective - self.e_min()).abs(),
            TaskPayload::Dataset(_) => 1.0 - self.vqc_scores()?.expect("dataset task").1.accuracy,
            _ => self.cost,
        })
    }

    /// Train and test scores of the current circuit (VQC only).
    pub fn vqc_scores(&self) -> Result<Option<(VqcScore, VqcScore)>, EnvError> {
        let TaskPayload::Dataset(d) = &self.task.payload else {
            return Ok(None);
        };
        let p = self.circuit.params();
        let noise = &self.task.noise;
        Ok(Some((
            vqc_score_with(&self.circuit, &p, d.split(Split::Train), noise)?,
            vqc_score_with(&self.circuit, &p, d.split(Split::Test), noise)?,
        )))
    }
}
