//! End-to-end behaviour of the `shrinklab` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn shrinklab(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shrinklab"))
        .args(args)
        .env("SHRINKLAB_OUT", out)
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

#[test]
fn moments_prints_table_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = shrinklab(dir.path(), &["moments", "--max-degree", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("alpha")).count(), 7);
    let report = read_json(&dir.path().join("moments.json"));
    assert_eq!(report["passed"], true);
    assert_eq!(report["header"]["parameters"]["max_degree"], 6);
    assert!(report["header"]["version"].as_str().unwrap().starts_with("shrinklab "));
}

#[test]
fn al_solve_writes_curve_that_checks_back() {
    let dir = tempfile::tempdir().unwrap();
    let out = shrinklab(dir.path(), &["al-solve", "--p", "2", "--q", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("al_2_3.csv")).unwrap();
    let first = csv.lines().next().unwrap();
    assert!(first.starts_with("# {") && first.contains("\"version\""));
    assert_eq!(csv.lines().nth(1).unwrap(), "sigma,x1,x2,kappa,kappa_dot,rho");
    let input = dir.path().join("al_2_3.csv").display().to_string();
    let out = shrinklab(dir.path(), &["curve-check", "--input", &input]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = shrinklab(dir.path(), &["verify-assumptions", "--input", &input]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn flow_reports_decay_rate() {
    let dir = tempfile::tempdir().unwrap();
    let out = shrinklab(dir.path(), &["flow", "--modes", "2", "--amp", "1e-2"]);
    assert_eq!(out.status.code(), Some(0));
    let report = read_json(&dir.path().join("flow.json"));
    let rate = report["data"]["decay_fit"]["rate"].as_f64().unwrap();
    assert!((rate + 1.0).abs() < 0.05);
    assert!(dir.path().join("trajectory.csv").exists());
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(shrinklab(dir.path(), &["flow", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(shrinklab(dir.path(), &["al-solve", "--p", "2", "--q", "4"]).status.code(), Some(2));
    assert_eq!(shrinklab(dir.path(), &["report-suite", "--criteria", "AC-10"]).status.code(), Some(2));
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[flow]\nunknown_key = 1\n").unwrap();
    let out = shrinklab(dir.path(), &["--config", cfg.to_str().unwrap(), "flow"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown_key"));
}

#[test]
fn computational_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = shrinklab(dir.path(), &["al-solve", "--p", "1", "--q", "2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_values_are_resolved_into_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "seed = 42\n[obstruction]\nsamples = 50\nmax_dim = 2\n").unwrap();
    let out = shrinklab(dir.path(), &["--config", cfg.to_str().unwrap(), "obstruction", "--max-dim", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let report = read_json(&dir.path().join("obstruction.json"));
    assert_eq!(report["header"]["seed"], 42);
    assert_eq!(report["header"]["parameters"]["samples"], 50);
    assert_eq!(report["header"]["parameters"]["max_dim"], 3);
}

#[test]
fn same_seed_gives_identical_artifacts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        let out = shrinklab(dir, &["--seed", "5", "lojasiewicz", "--samples", "40", "--calibration-samples", "40"]);
        assert_eq!(out.status.code(), Some(0));
    }
    for name in ["lojasiewicz.json", "lojasiewicz_scatter.csv"] {
        assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn report_suite_is_deterministic_and_passes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        let out = shrinklab(dir, &["report-suite"]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    }
    let ja = std::fs::read(a.path().join("suite.json")).unwrap();
    assert_eq!(ja, std::fs::read(b.path().join("suite.json")).unwrap());
    let suite = read_json(&a.path().join("suite.json"));
    assert_eq!(suite["suite"]["criteria"].as_array().unwrap().len(), 9);
    assert_eq!(suite["suite"]["passed"], true);
}

#[test]
fn corrupted_moment_table_fails_ac1() {
    let dir = tempfile::tempdir().unwrap();
    let table = fixture("corrupt_moment_table.json");
    let out = shrinklab(dir.path(), &["report-suite", "--criteria", "AC-1,AC-4", "--moment-table", &table]);
    assert_eq!(out.status.code(), Some(1));
    let suite = read_json(&dir.path().join("suite.json"));
    let criteria = suite["suite"]["criteria"].as_array().unwrap();
    assert_eq!(criteria[0]["id"], "AC-1");
    assert_eq!(criteria[0]["passed"], false);
    assert_eq!(criteria[1]["passed"], true);
    assert!(String::from_utf8_lossy(&out.stdout).contains("AC-1 FAIL"));
}
