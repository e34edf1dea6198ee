use std::fs::{self, File, OpenOptions};
use std::hash::Hasher;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use fnv::FnvHasher;
use rayon::prelude::*;

use super::config::BenchConfig;
use super::record::{RunConfig, RunRecord};
use super::report::RUNS_FILE;
use super::BenchError;
use crate::agents::{train, AgentConfig, Algorithm, TrainOptions};
use crate::problems::{ProblemError, TaskOptions, TaskSpec, TASK_IDS};

/// Everything needed to run a (task x agent x seed) grid.
#[derive(Clone, Debug)]
pub struct MatrixPlan {
    pub tasks: Vec<TaskSpec>,
    pub agents: Vec<Algorithm>,
    pub seeds: Vec<u64>,
    pub agent_config: AgentConfig,
    pub train: TrainOptions,
    /// Runs executed at once.
    pub parallelism: usize,
}

impl MatrixPlan {
    pub fn from_config(cfg: &BenchConfig) -> Result<Self, BenchError> {
        let train = cfg.train_options()?;
        let agent_config = cfg.agent_config()?;
        let agents = resolve_agents(&cfg.agent.ids)?;
        let tasks = resolve_tasks(&cfg.task.ids, &cfg.task_options())?;
        if cfg.agent.seeds == 0 {
            return Err(BenchError::Config("at least one seed is required".into()));
        }
        if cfg.agent.parallel == 0 {
            return Err(BenchError::Config("parallelism must be at least 1".into()));
        }
        let seeds = (cfg.agent.first_seed..cfg.agent.first_seed + cfg.agent.seeds).collect();
        Ok(Self { tasks, agents, seeds, agent_config, train, parallelism: cfg.agent.parallel })
    }

    pub fn run_count(&self) -> usize {
        self.tasks.len() * self.agents.len() * self.seeds.len()
    }
}

/// Builds every task; `"all"` expands to the registered ids.
pub fn resolve_tasks(ids: &[String], opts: &TaskOptions) -> Result<Vec<TaskSpec>, BenchError> {
    let ids = expand(ids, &TASK_IDS, "task")?;
    ids.iter()
        .map(|id| {
            TaskSpec::from_id(id, opts).map_err(|e| match e {
                ProblemError::UnknownTask(id) => unknown("task", id, &TASK_IDS),
                other => BenchError::Problem(other),
            })
        })
        .collect()
}

/// Parses agent ids; `"all"` expands to all nine.
pub fn resolve_agents(ids: &[String]) -> Result<Vec<Algorithm>, BenchError> {
    let valid: Vec<&str> = Algorithm::ALL.iter().map(|a| a.id()).collect();
    let ids = expand(ids, &valid, "agent")?;
    let mut out = Vec::new();
    for id in &ids {
        let a = id.parse::<Algorithm>().map_err(|_| unknown("agent", id.clone(), &valid))?;
        if !out.contains(&a) {
            out.push(a);
        }
    }
    Ok(out)
}

fn expand(ids: &[String], all: &[&str], what: &'static str) -> Result<Vec<String>, BenchError> {
    if ids.is_empty() {
        return Err(BenchError::Config(format!("no {what} ids given; valid ids: {}", all.join(", "))));
    }
    let mut out: Vec<String> = Vec::new();
    for id in ids {
        let batch: Vec<String> =
            if id == "all" { all.iter().map(|s| s.to_string()).collect() } else { vec![id.clone()] };
        for b in batch {
            if !out.contains(&b) {
                out.push(b);
            }
        }
    }
    Ok(out)
}

fn unknown(what: &'static str, id: String, valid: &[&str]) -> BenchError {
    BenchError::UnknownId { what, id, valid: valid.join(", ") }
}

/// Seed of one run's random stream: FNV-1a over task, agent and seed.
pub fn stream_seed(task: &str, agent: &str, seed: u64) -> u64 {
    let mut h = FnvHasher::default();
    h.write(task.as_bytes());
    h.write_u8(0);
    h.write(agent.as_bytes());
    h.write_u8(0);
    h.write(&seed.to_le_bytes());
    h.finish()
}

/// Line-delimited record file shared by concurrent runs.
pub struct RecordSink {
    path: PathBuf,
    out: Mutex<BufWriter<File>>,
}

impl RecordSink {
    /// Creates `dir` if needed and starts a fresh `runs.jsonl` there.
    pub fn create(dir: &Path) -> Result<Self, BenchError> {
        fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
        let path = dir.join(RUNS_FILE);
        let file = OpenOptions::new()
            .create(true)
            .write(true)
            .truncate(true)
            .open(&path)
            .map_err(|e| BenchError::io(&path, e))?;
        Ok(Self { path, out: Mutex::new(BufWriter::new(file)) })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Appends one record and flushes it to disk.
    pub fn append(&self, record: &RunRecord) -> Result<(), BenchError> {
        let line = serde_json::to_string(record).expect("run record serializes");
        let mut out = self.out.lock().expect("record sink lock");
        writeln!(out, "{line}").and_then(|_| out.flush()).map_err(|e| BenchError::io(&self.path, e))
    }
}

/// Runs the grid without progress output.
pub fn run_matrix(plan: &MatrixPlan, sink: Option<&RecordSink>) -> Result<Vec<RunRecord>, BenchError> {
    run_matrix_with(plan, sink, &|_| {})
}

/// Runs every (task, agent, seed) triple, `plan.parallelism` at a time.
/// Records come back in grid order regardless of completion order and are
/// appended to `sink` as each run finishes. On failure the remaining runs
/// still complete and the first error is returned.
pub fn run_matrix_with(
    plan: &MatrixPlan,
    sink: Option<&RecordSink>,
    on_record: &(dyn Fn(&RunRecord) + Sync),
) -> Result<Vec<RunRecord>, BenchError> {
    if plan.parallelism == 0 {
        return Err(BenchError::Config("parallelism must be at least 1".into()));
    }
    let mut jobs = Vec::with_capacity(plan.run_count());
    for task in &plan.tasks {
        for &agent in &plan.agents {
            for &seed in &plan.seeds {
                jobs.push((task, agent, seed));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.parallelism)
        .build()
        .map_err(|e| BenchError::Config(format!("thread pool: {e}")))?;
    let results: Vec<Result<RunRecord, BenchError>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(task, agent, seed)| {
                let record = run_one(plan, task, agent, seed)?;
                if let Some(s) = sink {
                    s.append(&record)?;
                }
                on_record(&record);
                Ok(record)
            })
            .collect()
    });
    results.into_iter().collect()
}

fn run_one(plan: &MatrixPlan, task: &TaskSpec, agent: Algorithm, seed: u64) -> Result<RunRecord, BenchError> {
    let stream = stream_seed(&task.id, agent.id(), seed);
    let fail = |source| BenchError::Run { task: task.id.clone(), agent: agent.id().into(), seed, source };
    let episodes = train(task, agent, &plan.agent_config, &plan.train, stream, &mut |_| {}).map_err(fail)?;
    let config = RunConfig {
        task: task.summary(),
        agent: plan.agent_config.clone(),
        episode_budget: plan.train.episodes,
        stop_on_success: plan.train.stop_on_success,
        stream_seed: stream,
    };
    RunRecord::from_episodes(&task.id, agent.id(), seed, &episodes, config)
        .ok_or_else(|| BenchError::Data(format!("{}/{}/seed {seed} produced no episodes", task.id, agent.id())))
}
