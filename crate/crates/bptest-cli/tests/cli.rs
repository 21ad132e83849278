//! End-to-end checks of the installed binary: exit codes, report files,
//! and the seed override.

use std::path::Path;
use std::process::{Command, Output};

fn bptest(args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bptest"));
    // Keep ambient configuration out of the tests that pin seeds by flag.
    cmd.env_remove("BPTEST_SEED");
    cmd.args(args);
    cmd
}

fn run(args: &[&str]) -> Output {
    bptest(args).output().expect("spawn bptest")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn test_subcommand_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("report.json");
    let out = run(&[
        "test",
        "--graph",
        "cycle:30",
        "--tester",
        "t2-low-degree",
        "--eps",
        "0.2",
        "--trials",
        "5",
        "--seed",
        "7",
        "--output",
        json.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&json).unwrap();
    // Members are never rejected.
    assert!(text.contains("\"rejections\": 0"), "report: {text}");
    assert!(dir.path().join("report.csv").exists());

    let verify = run(&["report", json.to_str().unwrap()]);
    assert!(verify.status.success());
    assert!(stdout_of(&verify).contains("aggregates consistent"));
}

#[test]
fn gen_then_env_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let env_path = dir.path().join("env.txt");
    let graph_path = dir.path().join("graph.txt");
    let out = run(&[
        "gen",
        "--graph",
        "grid:5x4+loops",
        "--density",
        "0.3",
        "--horizon",
        "6",
        "--seed",
        "11",
        "--out",
        env_path.to_str().unwrap(),
        "--out-graph",
        graph_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(env_path.exists() && graph_path.exists());

    let graph_arg = format!("file:{}", graph_path.display());
    let rerun = run(&[
        "test",
        "--graph",
        &graph_arg,
        "--instance",
        "env-file",
        "--env-file",
        env_path.to_str().unwrap(),
        "--tester",
        "gen-t-local",
        "--eps",
        "0.2",
        "--trials",
        "3",
        "--seed",
        "5",
    ]);
    assert!(rerun.status.success(), "stderr: {}", String::from_utf8_lossy(&rerun.stderr));
    assert!(stdout_of(&rerun).contains("rejection rate 0.0000"));
}

#[test]
fn suite_soundness_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("suite.json");
    let out = run(&[
        "suite",
        "soundness",
        "--trials",
        "1",
        "--seed",
        "3",
        "--output",
        json.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout_of(&out).contains("suite soundness: passed"));
    let text = std::fs::read_to_string(&json).unwrap();
    assert!(text.contains("\"passed\": true"));
}

#[test]
fn seed_env_var_overrides_flag() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("report.json");
    let out = bptest(&[
        "test",
        "--graph",
        "cycle:12",
        "--tester",
        "t2-low-degree",
        "--eps",
        "0.3",
        "--trials",
        "2",
        "--seed",
        "7",
        "--output",
        json.to_str().unwrap(),
    ])
    .env("BPTEST_SEED", "99")
    .output()
    .expect("spawn bptest");
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&json).unwrap();
    assert!(text.contains("\"base_seed\": 99"), "report: {text}");
}

#[test]
fn report_rejects_tampered_aggregates() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("report.json");
    let out = run(&[
        "test",
        "--graph",
        "cycle:12",
        "--tester",
        "t2-low-degree",
        "--eps",
        "0.3",
        "--trials",
        "2",
        "--seed",
        "7",
        "--output",
        json.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let bad = dir.path().join("tampered.json");
    let text = std::fs::read_to_string(&json).unwrap();
    assert!(text.contains("\"rejections\": 0"));
    std::fs::write(&bad, text.replace("\"rejections\": 0", "\"rejections\": 1")).unwrap();
    let verify = run(&["report", bad.to_str().unwrap()]);
    assert!(!verify.status.success());
    assert!(stdout_of(&verify).contains("inconsistent"));
    assert!(reports_exist(dir.path()));
}

fn reports_exist(dir: &Path) -> bool {
    dir.join("report.json").exists() && dir.join("report.csv").exists()
}

#[test]
fn bad_arguments_exit_nonzero() {
    let unknown_tester = run(&[
        "test", "--graph", "cycle:12", "--tester", "nonsense", "--eps", "0.3",
    ]);
    assert!(!unknown_tester.status.success());
    assert!(String::from_utf8_lossy(&unknown_tester.stderr).contains("unknown tester"));

    let bad_graph = run(&["gen", "--graph", "cycle:zero", "--out", "/tmp/never.txt"]);
    assert!(!bad_graph.status.success());

    let missing_env_file = run(&[
        "test", "--graph", "cycle:12", "--instance", "env-file", "--tester", "t2-low-degree",
        "--eps", "0.3",
    ]);
    assert!(!missing_env_file.status.success());
    assert!(String::from_utf8_lossy(&missing_env_file.stderr).contains("--env-file is required"));
}
