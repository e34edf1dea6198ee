use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use super::ranking::{aggregate, composite_score, Aggregation, RankedAgent, RankingWeights};
use super::record::RunRecord;
use super::BenchError;

pub const RUNS_FILE: &str = "runs.jsonl";
pub const RUNTIME_FILE: &str = "runtime_table.csv";
pub const RANKING_HEADER: [&str; 8] = ["task", "agent", "E", "G", "D", "T", "S", "rank"];

#[derive(Clone, Debug, PartialEq)]
pub struct ReportFiles {
    pub runs: Option<PathBuf>,
    pub rankings: Vec<PathBuf>,
    pub runtime: PathBuf,
}

/// Writes `runs.jsonl`, one `ranking_<task>.csv` per task and
/// `runtime_table.csv` into `out_dir`.
pub fn emit_report(
    records: &[RunRecord],
    weights: &RankingWeights,
    how: Aggregation,
    out_dir: &Path,
) -> Result<ReportFiles, BenchError> {
    fs::create_dir_all(out_dir).map_err(|e| BenchError::io(out_dir, e))?;
    let runs = out_dir.join(RUNS_FILE);
    let mut text = String::new();
    for r in records {
        text.push_str(&serde_json::to_string(r).expect("run record serializes"));
        text.push('\n');
    }
    fs::File::create(&runs).and_then(|mut f| f.write_all(text.as_bytes())).map_err(|e| BenchError::io(&runs, e))?;
    let mut files = write_rankings(records, weights, how, out_dir)?;
    files.runs = Some(runs);
    Ok(files)
}

/// Ranking and runtime tables only; used when re-ranking existing results.
pub fn write_rankings(
    records: &[RunRecord],
    weights: &RankingWeights,
    how: Aggregation,
    out_dir: &Path,
) -> Result<ReportFiles, BenchError> {
    fs::create_dir_all(out_dir).map_err(|e| BenchError::io(out_dir, e))?;
    let mut rankings = Vec::new();
    for task in ordered(records.iter().map(|r| r.task.as_str())) {
        let ranked = rank_task(records, task, weights, how)?;
        let path = out_dir.join(ranking_file_name(task));
        let mut w = csv_writer(&path)?;
        w.write_record(RANKING_HEADER)?;
        for r in &ranked {
            let m = &r.metrics;
            w.write_record([
                task.to_string(),
                m.agent.clone(),
                m.e.to_string(),
                m.g.to_string(),
                m.d.to_string(),
                m.t.to_string(),
                r.s.to_string(),
                r.rank.to_string(),
            ])?;
        }
        w.flush().map_err(|e| BenchError::io(&path, e))?;
        rankings.push(path);
    }
    let runtime = write_runtime_table(records, out_dir)?;
    Ok(ReportFiles { runs: None, rankings, runtime })
}

/// `ranking_<task>.csv`, with characters that are unsafe in file names
/// (such as those of a `vqe:<path>` id) replaced by `_`.
pub fn ranking_file_name(task: &str) -> String {
    let stem: String =
        task.chars().map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' }).collect();
    format!("ranking_{stem}.csv")
}

/// Composite ranking of every agent on `task`.
pub fn rank_task(
    records: &[RunRecord],
    task: &str,
    weights: &RankingWeights,
    how: Aggregation,
) -> Result<Vec<RankedAgent>, BenchError> {
    let subset: Vec<&RunRecord> = records.iter().filter(|r| r.task == task).collect();
    composite_score(&aggregate(&subset, how), weights)
}

/// Mean seconds per episode, agents as rows and tasks as columns; a missing
/// pair is left blank.
pub fn write_runtime_table(records: &[RunRecord], out_dir: &Path) -> Result<PathBuf, BenchError> {
    let tasks = ordered(records.iter().map(|r| r.task.as_str()));
    let agents = ordered(records.iter().map(|r| r.agent.as_str()));
    let path = out_dir.join(RUNTIME_FILE);
    let mut w = csv_writer(&path)?;
    let mut header = vec!["agent".to_string()];
    header.extend(tasks.iter().map(|t| t.to_string()));
    w.write_record(&header)?;
    for agent in &agents {
        let mut row = vec![agent.to_string()];
        for task in &tasks {
            let t: Vec<f64> =
                records.iter().filter(|r| r.agent == *agent && r.task == *task).map(|r| r.time_per_episode).collect();
            row.push(if t.is_empty() { String::new() } else { (t.iter().sum::<f64>() / t.len() as f64).to_string() });
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| BenchError::io(&path, e))?;
    Ok(path)
}

/// Reads `runs.jsonl` from a results directory (or a file path).
pub fn load_records(path: &Path) -> Result<Vec<RunRecord>, BenchError> {
    let file_path = if path.is_dir() { path.join(RUNS_FILE) } else { path.to_path_buf() };
    let file = fs::File::open(&file_path).map_err(|e| BenchError::io(&file_path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| BenchError::io(&file_path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line)
            .map_err(|e| BenchError::Json { path: format!("{}:{}", file_path.display(), i + 1), source: e })?;
        out.push(rec);
    }
    Ok(out)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, BenchError> {
    let f = fs::File::create(path).map_err(|e| BenchError::io(path, e))?;
    Ok(csv::Writer::from_writer(f))
}

/// Distinct values in first-seen order.
fn ordered<'a>(it: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    let mut out: Vec<&str> = Vec::new();
    for s in it {
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}
