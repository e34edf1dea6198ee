//! Experiment matrix, weighted ranking and result files.

mod checks;
mod config;
mod matrix;
mod ranking;
mod record;
mod report;

pub use checks::{run_checks, CheckResult};
pub use config::{AgentSection, BenchConfig, Preset, RankingSection, TaskSection};
pub use matrix::{resolve_agents, resolve_tasks, run_matrix, run_matrix_with, stream_seed, MatrixPlan, RecordSink};
pub use ranking::{
    aggregate, composite_score, normalize_metric, AgentMetrics, Aggregation, RankedAgent, RankingWeights,
};
pub use record::{RunConfig, RunRecord};
pub use report::{
    emit_report, load_records, rank_task, ranking_file_name, write_rankings, write_runtime_table, ReportFiles,
    RANKING_HEADER, RUNS_FILE, RUNTIME_FILE,
};

use thiserror::Error;

use crate::agents::AgentError;
use crate::problems::ProblemError;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid ranking weights: {0}")]
    Weights(String),
    #[error("bad data: {0}")]
    Data(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("unknown {what} '{id}'; valid ids: {valid}")]
    UnknownId { what: &'static str, id: String, valid: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("run {task}/{agent}/seed {seed}: {source}")]
    Run { task: String, agent: String, seed: u64, source: AgentError },
}

impl BenchError {
    /// Problems with the request itself rather than with executing it.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            BenchError::Weights(_) | BenchError::Config(_) | BenchError::UnknownId { .. } | BenchError::Problem(_)
        )
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        BenchError::Io { path: path.display().to_string(), source }
    }
}
