//! End-to-end checks on the `dilute1d` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dilute1d"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dilute1d-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn ll_solve_csv_has_one_row_per_gamma() {
    let out = run(&[
        "--format", "csv", "ll-solve", "--gamma", "1,10,100", "--nodes", "64",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4, "{text}");
    assert!(lines[0].starts_with("gamma,"));
}

#[test]
fn sweep_writes_named_file() {
    let dir = scratch("sweep");
    let out = run(&[
        "--out-dir",
        dir.to_str().unwrap(),
        "--format",
        "csv",
        "sweep",
        "--task",
        "anyon",
        "--c",
        "1,2",
        "--kappa",
        "0,pi/2",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(dir.join("sweep-anyon.csv")).unwrap();
    assert_eq!(text.lines().count(), 5, "{text}");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn malformed_config_exits_with_two() {
    let dir = scratch("config");
    let path = dir.join("bad.cfg");
    std::fs::write(&path, "[potential.delta]\nx0 = 0\nstrength = -1\n").unwrap();
    let out = run(&["scatter", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn validate_without_oracle_passes() {
    let out = run(&["validate", "--N", "100", "--L", "1000", "--c", "5"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["verdict"], serde_json::Value::Bool(true));
    assert!((report["scattering_length"].as_f64().unwrap() + 0.4).abs() < 1e-12);
}

#[test]
fn acceptance_single_criterion() {
    let out = run(&["acceptance", "--only", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("[PASS]"));
}
