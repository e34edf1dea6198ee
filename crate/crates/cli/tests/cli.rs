use std::path::Path;
use std::process::{Command, Output};

fn rlqas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rlqas")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn small_run(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "run",
        "--task",
        "ghz-3",
        "--agent",
        "dqn,ppo",
        "--seeds",
        "2",
        "--episodes",
        "2",
        "--preset",
        "desk",
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    rlqas(&args)
}

#[test]
fn list_names_tasks_and_agents() {
    let o = rlqas(&["list"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    for id in ["ghz-3", "vqsd-2", "vqc-3", "vqe-h2", "vqe-beh2", "vqe-h2o", "dqn", "ddqn", "dueling", "tppo", "a3c"] {
        assert!(text.contains(id), "{id} missing from\n{text}");
    }
}

#[test]
fn validate_passes() {
    let o = rlqas(&["validate"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.lines().filter(|l| l.starts_with("[PASS]")).count() >= 9);
    assert!(!text.contains("[FAIL]"));
}

#[test]
fn run_writes_one_record_per_combination() {
    let dir = tempfile::tempdir().unwrap();
    let o = small_run(dir.path(), &["--parallel", "2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let runs = std::fs::read_to_string(dir.path().join("runs.jsonl")).unwrap();
    assert_eq!(runs.lines().count(), 4);
    let ranking = std::fs::read_to_string(dir.path().join("ranking_ghz-3.csv")).unwrap();
    assert!(ranking.starts_with("task,agent,E,G,D,T,S,rank"));
    assert_eq!(ranking.lines().count(), 3);
    assert!(dir.path().join("runtime_table.csv").exists());

    // re-rank the same directory with other settings
    let o = rlqas(&["rank", "--in", dir.path().to_str().unwrap(), "--weights", "1,0,0,0", "--aggregate", "best"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("ghz-3"));
}

#[test]
fn configuration_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&small_run(dir.path(), &["--weights", "0,0,0,0"])), 1);
    assert_eq!(code(&rlqas(&["rank", "--in", dir.path().to_str().unwrap(), "--weights", "0,0,0,0"])), 1);
    assert_eq!(code(&rlqas(&["run", "--task", "vqe-lih", "--agent", "dqn", "--episodes", "1"])), 1);
    assert_eq!(code(&rlqas(&["run", "--task", "ghz-3", "--agent", "sac", "--episodes", "1"])), 1);
    assert_eq!(code(&rlqas(&["run", "--task", "ghz-3", "--agent", "dqn"])), 1);
    assert_eq!(code(&rlqas(&["run", "--bogus"])), 1);
    assert_eq!(code(&rlqas(&["rank"])), 1);

    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"agent": {"episodez": 3}}"#).unwrap();
    assert_eq!(code(&rlqas(&["run", "--config", cfg.to_str().unwrap()])), 1);
}

#[test]
fn config_file_drives_a_run_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bench.json");
    std::fs::write(
        &cfg,
        r#"{"task": {"ids": ["ghz-3"]}, "agent": {"ids": ["ddqn"], "seeds": 3, "episodes": 2, "preset": "desk"}}"#,
    )
    .unwrap();
    let out = dir.path().join("res");
    let o = rlqas(&["run", "--config", cfg.to_str().unwrap(), "--seeds", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(out.join("runs.jsonl")).unwrap().lines().count(), 1);
}

#[test]
fn missing_input_is_a_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = rlqas(&["rank", "--in", dir.path().join("nothing").to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn help_exits_cleanly() {
    assert_eq!(code(&rlqas(&["--help"])), 0);
    assert_eq!(code(&rlqas(&["run", "--help"])), 0);
}

#[test]
fn custom_hamiltonian_files_run_and_rank() {
    let dir = tempfile::tempdir().unwrap();
    let ham = dir.path().join("toy.json");
    std::fs::write(&ham, r#"{"name": "toy", "n_qubits": 2, "terms": [[0.5, "ZI"], [0.25, "XX"]]}"#).unwrap();
    let task = format!("vqe:{}", ham.display());
    let out = dir.path().join("res");
    let o = rlqas(&[
        "run",
        "--task",
        &task,
        "--agent",
        "dqn",
        "--episodes",
        "1",
        "--preset",
        "desk",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rankings: Vec<_> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with("ranking_"))
        .collect();
    assert_eq!(rankings.len(), 1, "{rankings:?}");
    assert!(rankings[0].ends_with("toy.json.csv"));
}
