use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::dataset::{generate_vqc_dataset, ClassificationDataset, DEFAULT_TEST, DEFAULT_TRAIN};
use super::hamiltonian::{bundled, PauliHamiltonian};
use super::states::{ghz_target, random_mixed_state};
use super::ProblemError;
use crate::qsim::{DensityMatrix, NoiseConfig, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TaskKind {
    Vqe,
    Vqsd,
    Vqc,
    StatePrep,
}

impl TaskKind {
    /// Parameterized tasks use the rotation gate set and re-optimize angles.
    pub fn is_parameterized(self) -> bool {
        self != TaskKind::StatePrep
    }
}

#[derive(Clone, Debug)]
pub enum TaskPayload {
    Hamiltonian(Arc<PauliHamiltonian>),
    MixedState(Arc<DensityMatrix<f64>>),
    Dataset(Arc<ClassificationDataset>),
    TargetState(Arc<StateVector<f64>>),
}

/// One benchmark problem instance.
#[derive(Clone, Debug)]
pub struct TaskSpec {
    pub id: String,
    pub kind: TaskKind,
    pub n_qubits: usize,
    /// Step limit per episode (and moment capacity of the observation).
    pub d_max: usize,
    /// Success threshold on `C_t - E_min` (state preparation: on `1 - F`).
    pub zeta: f64,
    /// Cost evaluations per inner optimization.
    pub optimizer_budget: usize,
    pub noise: NoiseConfig,
    /// Hidden layers suggested for the agent network on this task.
    pub hidden_layers: usize,
    pub payload: TaskPayload,
}

/// Serializable snapshot of a [`TaskSpec`] without its payload.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskSummary {
    pub id: String,
    pub kind: TaskKind,
    pub n_qubits: usize,
    pub d_max: usize,
    pub zeta: f64,
    pub optimizer_budget: usize,
    pub noise: NoiseConfig,
}

/// Overrides applied when building a task from its id.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskOptions {
    pub noise: Option<NoiseConfig>,
    pub d_max: Option<usize>,
    pub zeta: Option<f64>,
    pub optimizer_budget: Option<usize>,
    /// Seed of the VQSD target state.
    pub target_seed: Option<u64>,
    pub target_rank: Option<usize>,
    pub dataset_seed: Option<u64>,
    pub n_train: Option<usize>,
    pub n_test: Option<usize>,
    pub hamiltonian_path: Option<PathBuf>,
}

pub const TASK_IDS: [&str; 6] = ["ghz-3", "vqsd-2", "vqc-3", "vqe-h2", "vqe-beh2", "vqe-h2o"];

/// Fidelity at which state preparation counts as solved.
pub const STATE_PREP_FIDELITY: f64 = 0.98;
pub const CHEMICAL_ACCURACY: f64 = 1.6e-3;

impl TaskSpec {
    /// Builds a task from one of [`TASK_IDS`], or `vqe:<path>` for a
    /// Hamiltonian file.
    pub fn from_id(id: &str, opts: &TaskOptions) -> Result<Self, ProblemError> {
        let noise = opts.noise.unwrap_or_default();
        let mut spec = if let Some(path) = id.strip_prefix("vqe:") {
            let h = PauliHamiltonian::load(path)?;
            let n = h.n_qubits();
            let (d_max, budget, layers) = vqe_defaults(n);
            Self::vqe(id, Arc::new(h), d_max, budget, layers)
        } else {
            match id {
                "ghz-3" => TaskSpec {
                    id: id.into(),
                    kind: TaskKind::StatePrep,
                    n_qubits: 3,
                    d_max: 20,
                    zeta: 1.0 - STATE_PREP_FIDELITY,
                    optimizer_budget: 0,
                    noise: NoiseConfig::noiseless(),
                    hidden_layers: 3,
                    payload: TaskPayload::TargetState(Arc::new(ghz_target(3)?)),
                },
                "vqsd-2" => {
                    let rho = random_mixed_state(2, opts.target_rank.unwrap_or(4), opts.target_seed.unwrap_or(0))?;
                    TaskSpec {
                        id: id.into(),
                        kind: TaskKind::Vqsd,
                        n_qubits: 2,
                        d_max: 40,
                        zeta: 5e-2,
                        optimizer_budget: 500,
                        noise: NoiseConfig::noiseless(),
                        hidden_layers: 4,
                        payload: TaskPayload::MixedState(Arc::new(rho)),
                    }
                }
                "vqc-3" => {
                    let data = generate_vqc_dataset(
                        opts.dataset_seed.unwrap_or(0),
                        opts.n_train.unwrap_or(DEFAULT_TRAIN),
                        opts.n_test.unwrap_or(DEFAULT_TEST),
                    )?;
                    TaskSpec {
                        id: id.into(),
                        kind: TaskKind::Vqc,
                        n_qubits: 3,
                        d_max: 25,
                        zeta: 0.2,
                        optimizer_budget: 1000,
                        noise: NoiseConfig::noiseless(),
                        hidden_layers: 3,
                        payload: TaskPayload::Dataset(Arc::new(data)),
                    }
                }
                "vqe-h2" => Self::vqe(id, Arc::new(bundled::h2()), 40, 100, 3),
                "vqe-beh2" => Self::vqe(id, Arc::new(bundled::beh2()), 70, 200, 4),
                "vqe-h2o" => Self::vqe(id, Arc::new(bundled::h2o()), 250, 500, 5),
                other => return Err(ProblemError::UnknownTask(other.to_string())),
            }
        };
        if opts.hamiltonian_path.is_some() && spec.kind != TaskKind::Vqe {
            return Err(ProblemError::PayloadMismatch(spec.id));
        }
        if let Some(path) = &opts.hamiltonian_path {
            let h = PauliHamiltonian::load(path)?;
            spec.n_qubits = h.n_qubits();
            spec.payload = TaskPayload::Hamiltonian(Arc::new(h));
        }
        spec.noise = noise;
        if let Some(d) = opts.d_max {
            spec.d_max = d;
        }
        if let Some(z) = opts.zeta {
            spec.zeta = z;
        }
        if let Some(b) = opts.optimizer_budget {
            spec.optimizer_budget = b;
        }
        spec.validate()?;
        Ok(spec)
    }

    fn vqe(id: &str, h: Arc<PauliHamiltonian>, d_max: usize, budget: usize, layers: usize) -> Self {
        TaskSpec {
            id: id.into(),
            kind: TaskKind::Vqe,
            n_qubits: h.n_qubits(),
            d_max,
            zeta: CHEMICAL_ACCURACY,
            optimizer_budget: budget,
            noise: NoiseConfig::noiseless(),
            hidden_layers: layers,
            payload: TaskPayload::Hamiltonian(h),
        }
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        if self.d_max == 0 {
            return Err(ProblemError::InvalidTask("d_max must be positive".into()));
        }
        if self.zeta.is_nan() || self.zeta <= 0.0 {
            return Err(ProblemError::InvalidTask("zeta must be positive".into()));
        }
        if self.kind.is_parameterized() && self.optimizer_budget == 0 {
            return Err(ProblemError::InvalidTask("optimizer budget must be positive".into()));
        }
        self.noise.validate()?;
        let consistent = match (&self.kind, &self.payload) {
            (TaskKind::Vqe, TaskPayload::Hamiltonian(h)) => h.n_qubits() == self.n_qubits,
            (TaskKind::Vqsd, TaskPayload::MixedState(r)) => r.n_qubits() == self.n_qubits,
            (TaskKind::Vqc, TaskPayload::Dataset(_)) => self.n_qubits >= 2,
            (TaskKind::StatePrep, TaskPayload::TargetState(s)) => s.n_qubits() == self.n_qubits,
            _ => false,
        };
        if !consistent {
            return Err(ProblemError::PayloadMismatch(self.id.clone()));
        }
        Ok(())
    }

    /// Analytic minimum of the task's cost.
    pub fn e_min(&self) -> f64 {
        match &self.payload {
            TaskPayload::Hamiltonian(h) => h.ground_energy(),
            _ => 0.0,
        }
    }

    pub fn summary(&self) -> TaskSummary {
        TaskSummary {
            id: self.id.clone(),
            kind: self.kind,
            n_qubits: self.n_qubits,
            d_max: self.d_max,
            zeta: self.zeta,
            optimizer_budget: self.optimizer_budget,
            noise: self.noise,
        }
    }
}

fn vqe_defaults(n_qubits: usize) -> (usize, usize, usize) {
    match n_qubits {
        0..=4 => (40, 100, 3),
        5..=6 => (70, 200, 4),
        _ => (250, 500, 5),
    }
}
