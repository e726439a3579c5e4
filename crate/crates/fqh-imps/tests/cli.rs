//! The `fqh` binary: exit codes and output shape.

use std::process::Command;

fn fqh(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_fqh")).args(args).output().expect("spawn fqh");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn expand_json_echoes_config() {
    let (code, out) = fqh(&["expand", "--q", "2", "--n", "2", "--gamma", "1"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["config"]["command"], "expand");
    assert_eq!(v["config"]["b_resolved"], serde_json::json!([0, 0]));
    assert!(out.contains("1.0000000000000000e0"));
}

#[test]
fn csv_starts_with_config() {
    let (code, out) = fqh(&["--format", "csv", "expand", "--q", "1", "--n", "3"]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert!(lines.next().unwrap().starts_with("# config: {"));
    assert!(lines.next().unwrap().starts_with("lambda,"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(fqh(&["expand", "--q", "0"]).0, 2);
    assert_eq!(fqh(&["expand", "--b", "2,1", "--n", "2"]).0, 2);
    assert_eq!(fqh(&["no-such-command"]).0, 2);
    assert_eq!(fqh(&["--threads", "0", "expand"]).0, 2);
    assert_eq!(fqh(&["--help"]).0, 0);
}

#[test]
fn verify_oracle_passes() {
    let (code, out) = fqh(&["verify", "--suite", "oracle"]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn resource_caps_come_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_fqh"))
        .args(["expand", "--q", "3", "--n", "6"])
        .env("FQH_MAX_PARTITIONS", "5")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
