use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rlqas::agents::Algorithm;
use rlqas::bench::{
    load_records, rank_task, run_checks, run_matrix_with, write_rankings, Aggregation, BenchConfig, BenchError,
    MatrixPlan, Preset, RankingWeights, RecordSink, RunRecord,
};
use rlqas::problems::TASK_IDS;

const DEFAULT_OUT: &str = "results";

#[derive(Parser, Debug)]
#[command(name = "rlqas", version, about = "Benchmark RL agents that build quantum circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train every (task, agent, seed) combination and write results.
    Run(RunArgs),
    /// Rank agents from an existing results directory.
    Rank(RankArgs),
    /// Run the built-in oracle and property checks.
    Validate,
    /// Print task and agent ids.
    List,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Task id; repeat or separate with commas, or "all".
    #[arg(long, value_delimiter = ',')]
    task: Vec<String>,
    /// Agent id; repeat or separate with commas, or "all".
    #[arg(long, value_delimiter = ',')]
    agent: Vec<String>,
    /// Number of seeds per (task, agent).
    #[arg(long)]
    seeds: Option<u64>,
    #[arg(long)]
    first_seed: Option<u64>,
    /// Episodes per run (5000 is a reasonable start).
    #[arg(long)]
    episodes: Option<usize>,
    /// Stop a run at its first successful episode.
    #[arg(long)]
    stop_on_success: bool,
    /// Depolarizing noise with p1 = 0.001, p2 = 0.0001.
    #[arg(long)]
    noisy: bool,
    /// Hyperparameter preset: full or desk.
    #[arg(long)]
    preset: Option<Preset>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Runs executed at once.
    #[arg(long)]
    parallel: Option<usize>,
    #[command(flatten)]
    ranking: RankingFlags,
}

#[derive(Args, Debug)]
struct RankArgs {
    /// Results directory (or runs.jsonl file).
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Where ranking tables go; defaults to the input directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use the noisy weight preset.
    #[arg(long)]
    noisy: bool,
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    ranking: RankingFlags,
}

#[derive(Args, Debug)]
struct RankingFlags {
    /// wE,wG,wD,wT
    #[arg(long)]
    weights: Option<RankingWeights>,
    /// mean or best
    #[arg(long)]
    aggregate: Option<Aggregation>,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Rank(a) => rank(a),
        Command::Validate => validate(),
        Command::List => {
            list();
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load_config(path: Option<&PathBuf>) -> Result<BenchConfig, Failure> {
    Ok(match path {
        Some(p) => BenchConfig::load(p)?,
        None => BenchConfig::default(),
    })
}

fn apply_ranking(cfg: &mut BenchConfig, flags: &RankingFlags) {
    if let Some(w) = flags.weights {
        cfg.ranking.weights = Some(w);
    }
    if let Some(a) = flags.aggregate {
        cfg.ranking.aggregate = a;
    }
}

fn run(a: RunArgs) -> Result<(), Failure> {
    let mut cfg = load_config(a.config.as_ref())?;
    if !a.task.is_empty() {
        cfg.task.ids = a.task;
    }
    if !a.agent.is_empty() {
        cfg.agent.ids = a.agent;
    }
    if let Some(n) = a.seeds {
        cfg.agent.seeds = n;
    }
    if let Some(n) = a.first_seed {
        cfg.agent.first_seed = n;
    }
    if a.episodes.is_some() {
        cfg.agent.episodes = a.episodes;
    }
    cfg.agent.stop_on_success |= a.stop_on_success;
    cfg.noise.enabled |= a.noisy;
    if let Some(p) = a.preset {
        cfg.agent.preset = p;
    }
    if let Some(n) = a.parallel {
        cfg.agent.parallel = n;
    }
    if a.out.is_some() {
        cfg.ranking.out = a.out;
    }
    apply_ranking(&mut cfg, &a.ranking);

    let plan = MatrixPlan::from_config(&cfg)?;
    let out = cfg.ranking.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let sink = RecordSink::create(&out)?;
    eprintln!("{} runs, results in {}", plan.run_count(), out.display());
    let records = run_matrix_with(&plan, Some(&sink), &|r| eprintln!("{}", summary(r)))?;
    let files = write_rankings(&records, &cfg.weights(), cfg.ranking.aggregate, &out)?;
    print_rankings(&records, &cfg)?;
    for f in files.rankings.iter().chain([&files.runtime]) {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}

fn rank(a: RankArgs) -> Result<(), Failure> {
    let mut cfg = load_config(a.config.as_ref())?;
    if a.input.is_some() {
        cfg.ranking.input = a.input;
    }
    apply_ranking(&mut cfg, &a.ranking);
    let input = cfg.ranking.input.clone().ok_or_else(|| Failure::Config("--in is required".into()))?;
    let records = load_records(&input)?;
    cfg.noise.enabled |= a.noisy || (!records.is_empty() && records.iter().all(|r| r.config.task.noise.enabled));
    let out = a.out.or(cfg.ranking.out.clone()).unwrap_or_else(|| {
        if input.is_dir() {
            input.clone()
        } else {
            input.parent().map(PathBuf::from).unwrap_or_default()
        }
    });
    let files = write_rankings(&records, &cfg.weights(), cfg.ranking.aggregate, &out)?;
    print_rankings(&records, &cfg)?;
    for f in files.rankings.iter().chain([&files.runtime]) {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}

fn summary(r: &RunRecord) -> String {
    format!(
        "{} {} seed {}: {} episodes, success {}, E {:.3e}, G {}, D {}, T {:.3}s",
        r.task, r.agent, r.seed, r.episodes_run, r.success, r.error, r.gates, r.depth, r.time_per_episode
    )
}

fn print_rankings(records: &[RunRecord], cfg: &BenchConfig) -> Result<(), Failure> {
    let mut tasks: Vec<&str> = Vec::new();
    for r in records {
        if !tasks.contains(&r.task.as_str()) {
            tasks.push(&r.task);
        }
    }
    let w = cfg.weights();
    println!("weights {:?}, aggregate {:?}", w.as_array(), cfg.ranking.aggregate);
    for task in tasks {
        println!("{task}");
        for r in rank_task(records, task, &w, cfg.ranking.aggregate)? {
            let m = &r.metrics;
            println!(
                "  {:>2}. {:<8} S {:.4}  E {:.3e}  G {:.1}  D {:.1}  T {:.3}s",
                r.rank, m.agent, r.s, m.e, m.g, m.d, m.t
            );
        }
    }
    Ok(())
}

fn validate() -> Result<(), Failure> {
    let results = run_checks();
    let mut failed = 0;
    for r in &results {
        println!("[{}] {} ({:.2}s): {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.seconds, r.detail);
        failed += usize::from(!r.passed);
    }
    if failed > 0 {
        return Err(Failure::Runtime(format!("{failed} of {} checks failed", results.len())));
    }
    println!("all {} checks passed", results.len());
    Ok(())
}

fn list() {
    println!("tasks:");
    for id in TASK_IDS {
        println!("  {id}");
    }
    println!("  vqe:<path>   (Hamiltonian JSON file)");
    println!("agents:");
    for a in Algorithm::ALL {
        println!("  {}", a.id());
    }
}
