use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn disteer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_disteer")).args(args).output().expect("spawn disteer")
}

fn ok(args: &[&str]) -> String {
    let out = disteer(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    disteer(args).status.code().expect("exit code")
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).display().to_string()
}

fn json_file(p: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(Path::new(p)).unwrap()).unwrap()
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let dir = TempDir::new().unwrap();
    let (a, b, c) = (path(&dir, "a.json"), path(&dir, "b.json"), path(&dir, "c.json"));
    let base = ["simulate", "--visibility", "0.9", "--budget", "5000"];
    ok(&[&base[..], &["--seed", "4", "--out", &a]].concat());
    ok(&[&base[..], &["--seed", "4", "--out", &b]].concat());
    ok(&[&base[..], &["--seed", "5", "--out", &c]].concat());
    let read = |p: &str| std::fs::read_to_string(p).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    let counts = json_file(&a);
    assert_eq!(counts["counts"].as_array().unwrap().len(), 72);
    assert_eq!(counts["chsh_counts"].as_array().unwrap().len(), 72);
}

#[test]
fn verify_reports_violation_for_high_visibility() {
    let dir = TempDir::new().unwrap();
    let counts = path(&dir, "counts.json");
    ok(&["simulate", "--visibility", "0.9951", "--budget", "100000", "--seed", "1", "--out", &counts]);
    let report: Value = serde_json::from_str(&ok(&[
        "verify", "--from-counts", &counts, "--fidelities", "0.9931,0.9897,0.9979", "--resamples", "100",
    ]))
    .unwrap();
    assert_eq!(report["kind"], "payoff");
    assert_eq!(report["violated"], true);
    let value = report["value"].as_f64().unwrap();
    assert!((value - 1.02).abs() < 0.05, "{value}");
    let stderr = report["stderr"].as_f64().unwrap();
    assert!(stderr > 0.0 && value / stderr >= 5.0, "{value} +- {stderr}");
}

#[test]
fn sweep_csv_and_json_agree() {
    let csv = ok(&["reproduce-fig3", "--fidelities", "0.9931,0.9897,0.9979"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("v,payoff_ideal,payoff_noisy,chsh_value,stderr"));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 6);
    let json: Value =
        serde_json::from_str(&ok(&["reproduce-fig3", "--fidelities", "0.9931,0.9897,0.9979", "--format", "json"]))
            .unwrap();
    for (row, obj) in rows.iter().zip(json["rows"].as_array().unwrap()) {
        for (k, key) in ["v", "payoff_ideal", "payoff_noisy", "chsh_value"].iter().enumerate() {
            assert_eq!(row[k], obj[key].to_string(), "{key}");
        }
        assert!(row[4].is_empty() && obj["stderr"].is_null());
    }
    assert_eq!(rows[2][0], "0.7015000000");
    assert_eq!(rows[2][2], "0.1420682812");
}

#[test]
fn config_file_fills_gaps_and_flags_win() {
    let dir = TempDir::new().unwrap();
    let cfg = path(&dir, "cfg.json");
    std::fs::write(&cfg, r#"{"v-grid": [0.6, 0.7], "fidelities": [1, 1, 1], "format": "csv"}"#).unwrap();
    let from_file = ok(&["reproduce-fig3", "--config", &cfg]);
    assert_eq!(from_file.lines().count(), 3);
    let overridden = ok(&["reproduce-fig3", "--config", &cfg, "--v-grid", "0.5,0.6,0.7"]);
    assert_eq!(overridden.lines().count(), 4);
    std::fs::write(&cfg, r#"{"v_grid": [0.6]}"#).unwrap();
    assert_eq!(code(&["reproduce-fig3", "--config", &cfg]), 2);
}

#[test]
fn input_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&["reproduce-fig3", "--v-grid", "0.7,0.6"]), 2);
    assert_eq!(code(&["verify", "--from-counts", &path(&dir, "missing.json"), "--fidelities", "1,1,1"]), 2);
    assert_eq!(code(&["selftest", "--chsh", "3,2,2"]), 2);
    assert_eq!(code(&["simulate", "--visibility", "0.9", "--budget", "0"]), 2);

    let bad = path(&dir, "bad.json");
    std::fs::write(&bad, r#"{"seed": 1, "counts": [], "chsh_counts": [], "extra": 0}"#).unwrap();
    assert_eq!(code(&["verify", "--from-counts", &bad, "--fidelities", "1,1,1"]), 2);

    let empty = path(&dir, "empty.json");
    std::fs::write(&empty, r#"{"seed": 1, "counts": [], "chsh_counts": []}"#).unwrap();
    let out = disteer(&["verify", "--from-counts", &empty, "--fidelities", "1,1,1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let dup = path(&dir, "dup.json");
    let cell = r#"{"x": 1, "z": 1, "a": 1, "c": 1, "bob": "yes", "n": 3}"#;
    std::fs::write(&dup, format!(r#"{{"seed": 1, "counts": [{cell}, {cell}], "chsh_counts": []}}"#)).unwrap();
    let out = disteer(&["verify", "--from-counts", &dup, "--fidelities", "1,1,1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("counts[1]"));
}

#[test]
fn selftest_ideal_chsh_gives_unit_fidelity() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "selftest.json");
    let c = 2.0 * std::f64::consts::SQRT_2;
    let chsh = format!("{c},{c},{c}");
    ok(&["selftest", "--chsh", &chsh, "--out", &out]);
    let report = json_file(&out);
    for key in ["f1", "f2", "f3", "average"] {
        let f = report["fidelity"][key].as_f64().unwrap();
        assert!(f > 0.999, "{key}: {f}");
        assert!(report["trace_distance"][key].as_f64().unwrap() < 0.04);
    }
    assert_eq!(report["relaxation"]["basis_size"], 96);
    assert!(report["chsh_stderr"].is_null());
}
