//! End-to-end runs of the `tcflow` binary.

use std::path::Path;
use std::process::{Command, Output};

fn tcflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tcflow")).args(args).output().unwrap()
}

fn with_config(dir: &Path, cmd: &str, config: &str, extra: &[&str]) -> Output {
    let cfg = dir.join("c.json");
    std::fs::write(&cfg, config).unwrap();
    let mut args = vec![cmd, "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    tcflow(&args)
}

#[test]
fn resolvent_writes_csv_and_json() {
    let d = tempfile::tempdir().unwrap();
    let out = with_config(d.path(), "resolvent", r#"{"nu": 1e-3, "B": 1, "R": 2, "N": 32, "k": 2}"#, &[]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(d.path().join("resolvent.csv")).unwrap();
    assert!(csv.starts_with("# version: tcflow "));
    assert!(csv.contains(r#"# grid: {"N":32}"#));
    assert!(csv.contains("nu,A,B,R,k,variable,value,n,r_squared"));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("resolvent.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["k"], 2);
    assert_eq!(json["passed"], true);
    assert!(json["result"]["sigma_min"].as_f64().unwrap() > 0.0);
    assert!(std::fs::read_to_string(d.path().join("resolvent.log")).unwrap().contains("wall_time_s"));
}

#[test]
fn non_positive_dt_names_the_key() {
    let d = tempfile::tempdir().unwrap();
    for dt in ["0", "-0.1"] {
        let out = with_config(d.path(), "simulate", &format!(r#"{{"nu": 1e-2, "K": 2, "N": 16, "dt": {dt}}}"#), &[]);
        assert_eq!(out.status.code(), Some(2));
        assert!(String::from_utf8_lossy(&out.stderr).contains("dt"));
    }
}

#[test]
fn usage_and_config_errors_exit_two() {
    let out = tcflow(&["semigroup", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    let d = tempfile::tempdir().unwrap();
    assert_eq!(with_config(d.path(), "basis", r#"{"l_max": 1000}"#, &[]).status.code(), Some(2));
    assert_eq!(with_config(d.path(), "basis", r#"{"NN": 3}"#, &[]).status.code(), Some(2));
    assert_eq!(tcflow(&["basis", "--config", "/nonexistent/c.json"]).status.code(), Some(2));
}

#[test]
fn failed_check_exits_one() {
    let d = tempfile::tempdir().unwrap();
    let out = with_config(d.path(), "semigroup", r#"{"nu": 1e-2, "N": 24, "gp_tol": -0.9}"#, &[]);
    assert_eq!(out.status.code(), Some(1));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("semigroup.json")).unwrap()).unwrap();
    assert_eq!(json["passed"], false);
}

#[test]
fn inequalities_rerun_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = tcflow(&["inequalities", "--samples", "1000", "--seed", "7", "--out", d.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["inequalities.json", "inequalities.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
    }
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.path().join("inequalities.json")).unwrap()).unwrap();
    assert_eq!(json["flags"]["seed"], 7);
    assert_eq!(json["result"]["samples"], 1000);
}

#[test]
fn thread_count_does_not_change_output() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = r#"{"nu_values": [1e-3, 1e-2], "b_values": [1, 2], "N": 24, "refine_iters": 8}"#;
    with_config(a.path(), "pseudospectrum", cfg, &["--threads", "1"]);
    with_config(b.path(), "pseudospectrum", cfg, &["--threads", "3"]);
    assert_eq!(
        std::fs::read(a.path().join("pseudospectrum.csv")).unwrap(),
        std::fs::read(b.path().join("pseudospectrum.csv")).unwrap()
    );
}
