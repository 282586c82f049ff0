use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zn-thomae")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let p: PathBuf = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

const FAMILY_ONE_N5: &str = r#"{"n": 5, "points": [
    {"alpha": 1, "label": "P", "lambda": "0"},
    {"alpha": 4, "label": "Q", "lambda": "1"},
    {"alpha": 2, "label": "R", "lambda": "5/2"},
    {"alpha": 3, "label": "S", "lambda": "-3"}]}"#;

#[test]
fn ftable_matches_the_n5_d2_row() {
    let out = run(&["ftable", "--n", "5", "--d", "2", "--format", "human"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("0,0;1,0;2,4;3,2;4,4"), "{text}");
    assert!(text.contains("c=4"));
    let out = run(&["ftable", "--n", "5", "--d", "2", "--format", "csv"]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("l,f\n0,0\n1,0\n2,4\n3,2\n4,4\nc,4\n"));
}

#[test]
fn counts_fit_recovers_the_quadratic() {
    let dir = TempDir::new().unwrap();
    let fam = write(&dir, "m3.json", r#"{"c": [1, 1, 1], "d": [1, 1, 1]}"#);
    let out = run(&["counts", "--family", &fam, "--n-range", "2..7", "--fit"]);
    assert!(out.status.success());
    let report = json_of(&out);
    assert_eq!(report["result"]["fit"]["polynomial"], "18*n^2 - 45*n + 33");
    assert_eq!(report["result"]["fit"]["exact"], true);
    assert_eq!(report["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert_eq!(report["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn enumerate_counts_and_lists_agree() {
    let dir = TempDir::new().unwrap();
    let curve = write(&dir, "c.json", FAMILY_ONE_N5);
    let out = run(&["enumerate", "--curve", &curve, "--kind", "delta"]);
    let report = json_of(&out);
    assert_eq!(report["result"]["count"], "15");
    assert_eq!(report["result"]["divisors"].as_array().unwrap().len(), 15);
    let out = run(&["enumerate", "--curve", &curve, "--kind", "xi", "--count-only", "--avoid", "0"]);
    assert_eq!(json_of(&out)["result"]["count"], "7");
}

#[test]
fn apply_and_denominator_on_the_isolated_divisor() {
    let dir = TempDir::new().unwrap();
    let curve = write(&dir, "c.json", FAMILY_ONE_N5);
    let xi = write(&dir, "xi.json", r#"{"kind": "xi", "levels": [0, 0, 4, 4]}"#);
    let out = run(&["apply", "--curve", &curve, "--divisor", &xi, "--op", "N"]);
    assert!(out.status.success());
    assert_eq!(json_of(&out)["result"]["valid"], true);
    let out = run(&["apply", "--curve", &curve, "--divisor", &xi, "--op", "T:0,2"]);
    assert_eq!(out.status.code(), Some(1));

    let out = run(&["denominator", "--curve", &curve, "--divisor", &xi, "--which", "g:1", "--format", "human"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("(P-Q)^10 (P-R)^20 (P-S)^10"), "{text}");
    let out = run(&["denominator", "--curve", &curve, "--divisor", &xi, "--evaluate", "exact"]);
    let report = json_of(&out);
    assert!(report["result"]["value"]["exact"].is_string());
    assert_eq!(report["result"]["unit"], "e*n");
    let out = run(&["denominator", "--curve", &curve, "--divisor", &xi, "--evaluate", "log", "--reduce"]);
    assert!(out.status.success());
    assert!(json_of(&out)["result"]["common_factor"].is_array());
}

#[test]
fn orbits_reports_one_component_and_a_witness() {
    let dir = TempDir::new().unwrap();
    let curve = write(&dir, "c.json", FAMILY_ONE_N5);
    let a = write(&dir, "a.json", r#"{"kind": "xi", "levels": [0, 0, 4, 4]}"#);
    let b = write(&dir, "b.json", r#"{"kind": "xi", "levels": [4, 4, 0, 0]}"#);
    let out = run(&["orbits", "--curve", &curve, "--witness", &a, &b]);
    assert!(out.status.success());
    let report = json_of(&out);
    assert_eq!(report["result"]["components"].as_array().unwrap().len(), 1);
    assert!(report["result"]["witness"].is_array());
}

#[test]
fn verify_passes_on_a_single_curve() {
    let dir = TempDir::new().unwrap();
    let curve = write(&dir, "c.json", FAMILY_ONE_N5);
    let out = run(&["verify", "--curve", &curve, "--suite", "operators,denominators,structure"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let report = json_of(&out);
    assert_eq!(report["result"]["passed"], true);
    assert_eq!(report["result"]["suites"].as_array().unwrap().len(), 3);
}

#[test]
fn invalid_inputs_exit_with_status_one() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", r#"{"n": 5, "points": [{"alpha": 1}, {"alpha": 2}, {"alpha": 3}]}"#);
    let out = run(&["enumerate", "--curve", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sum"));
    let float = write(&dir, "f.json", r#"{"n": 3, "points": [{"alpha": 1, "lambda": 0.5}, {"alpha": 1}, {"alpha": 1}]}"#);
    assert_eq!(run(&["enumerate", "--curve", &float]).status.code(), Some(1));
    assert_eq!(run(&["verify", "--suite", "nope"]).status.code(), Some(1));
    assert_eq!(run(&["enumerate", "--curve", "/nonexistent.json"]).status.code(), Some(1));
    assert_eq!(run(&["ftable", "--n", "6", "--d", "2"]).status.code(), Some(1));
}

#[test]
fn unknown_commands_are_rejected_with_status_one() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["ftable", "--n", "five", "--d", "1"]).status.code(), Some(1));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}
