//! The four benchmark problems as data: molecular Hamiltonians, random mixed
//! states to diagonalize, the circle classification set, and the GHZ target.

mod dataset;
mod hamiltonian;
mod states;
mod task;

pub use dataset::{circle_label, generate_vqc_dataset, ClassificationDataset, Sample, Split, CIRCLE_RADIUS_SQ};
pub use hamiltonian::{bundled, min_eigenvalue, HamiltonianFile, PauliHamiltonian, GROUND_ENERGY_TOL};
pub use states::{encode_features, ghz_target, random_mixed_state};
pub use task::{
    TaskKind, TaskOptions, TaskPayload, TaskSpec, TaskSummary, CHEMICAL_ACCURACY, STATE_PREP_FIDELITY, TASK_IDS,
};

use thiserror::Error;

use crate::qsim::SimError;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed Hamiltonian document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("Pauli string {string:?} does not have length {n_qubits}")]
    StringLength { string: String, n_qubits: usize },
    #[error("non-finite coefficient on term {0:?}")]
    NonFiniteCoefficient(String),
    #[error("{0} qubits exceeds the supported register size")]
    TooLarge(usize),
    #[error("{0} qubits is too small for this problem")]
    TooSmall(usize),
    #[error("supplied ground energy {supplied} differs from exact value {exact}")]
    GroundEnergyMismatch { supplied: f64, exact: f64 },
    #[error("rank {rank} outside 1..={dim}")]
    InvalidRank { rank: usize, dim: usize },
    #[error("dataset splits need at least 10 samples (got {n_train}/{n_test})")]
    DatasetSize { n_train: usize, n_test: usize },
    #[error("unknown task id {0:?}; valid ids: {ids}", ids = TASK_IDS.join(", "))]
    UnknownTask(String),
    #[error("payload does not match task kind for {0}")]
    PayloadMismatch(String),
    #[error("invalid task: {0}")]
    InvalidTask(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}
