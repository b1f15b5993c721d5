use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const FOUR_DEVICES: &str = r#"{
  "global_dist": [0.5, 0.5],
  "devices": [
    {"dist": [0.51, 0.49], "min_bw_hz": 1.0},
    {"dist": [0.51, 0.49], "min_bw_hz": 1.0},
    {"dist": [0.8, 0.2], "min_bw_hz": 1.0},
    {"dist": [0.2, 0.8], "min_bw_hz": 1.0}
  ],
  "sigma": 0.0,
  "batch": 32,
  "g_weights": [1.0, 1.0],
  "total_bw_hz": 2.0
}"#;

fn fedcgd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fedcgd"))
        .args(args)
        .env_remove("FEDCGD_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn oracle_solves_the_four_device_example() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "inst.json", FOUR_DEVICES);
    let v = stdout_json(&fedcgd(&["solve", "--instance", &inst, "--solver", "oracle"]));
    assert_eq!(v["members"], serde_json::json!([2, 3]));
    assert!(v["objective"].as_f64().unwrap().abs() < 1e-12);
    assert_eq!(v["solver"], "oracle");
}

#[test]
fn every_solver_name_runs() {
    let dir = tempfile::tempdir().unwrap();
    let with_side = FOUR_DEVICES.replace(
        r#""min_bw_hz": 1.0}"#,
        r#""min_bw_hz": 1.0, "gain": 1e-9, "grad_norm": 1.0, "loss": 0.5}"#,
    );
    let inst = write(dir.path(), "inst.json", &with_side);
    for name in ["gs", "fscd", "cd", "oracle", "bc", "bn", "poc"] {
        let v = stdout_json(&fedcgd(&["solve", "--instance", &inst, "--solver", name]));
        assert!(v["bandwidth_used_hz"].as_f64().unwrap() <= 2.0, "{name}");
    }
}

#[test]
fn baseline_without_side_info_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "inst.json", FOUR_DEVICES);
    assert_eq!(fedcgd(&["solve", "--instance", &inst, "--solver", "bc"]).status.code(), Some(2));
}

#[test]
fn unknown_solver_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "inst.json", FOUR_DEVICES);
    let out = fedcgd(&["solve", "--instance", &inst, "--solver", "annealing"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(fedcgd(&["solve", "--bogus"]).status.code(), Some(1));
    assert_eq!(fedcgd(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn malformed_instance_reports_the_location() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "bad.json", "{\n  \"global_dist\": [0.5, 0.5],\n  \"devices\": 7\n}");
    let out = fedcgd(&["solve", "--instance", &inst]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn invalid_distribution_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "bad.json", &FOUR_DEVICES.replace("[0.8, 0.2]", "[0.8, 0.8]"));
    let out = fedcgd(&["solve", "--instance", &inst]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("devices[2]"));
}

#[test]
fn bench_reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = (0..2).map(|i| dir.path().join(format!("b{i}.json"))).collect();
    for p in &paths {
        let out = fedcgd(&[
            "bench-solvers",
            "--devices",
            "6,8",
            "--instances",
            "10",
            "--seed",
            "3",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let a = std::fs::read(&paths[0]).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, std::fs::read(&paths[1]).unwrap());
}

#[test]
fn train_writes_metrics_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"fleet": {"devices": 8, "availability": 0.6}, "hyper": {"rounds": 4}, "seeds": [1, 2]}"#,
    );
    let out_dir = dir.path().join("out");
    let v = stdout_json(&fedcgd(&["train", "--config", &cfg, "--out", out_dir.to_str().unwrap(), "--solver", "gs"]));
    assert_eq!(v["solver"], "gs");
    let csv = std::fs::read_to_string(out_dir.join("metrics.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("round,solver,available"));
    assert_eq!(lines.count(), 8);
    assert!(out_dir.join("summary.json").exists());
}

#[test]
fn train_rejects_unknown_config_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", r#"{"fleet": {"devices": 8, "radius": 3}}"#);
    assert_eq!(fedcgd(&["train", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn gen_data_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"fleet": {"devices": 4}, "data": {"partition": {"scheme": "dirichlet", "alpha": 0.5}}}"#,
    );
    let out_dir = dir.path().join("data");
    let manifest = stdout_json(&fedcgd(&["gen-data", "--config", &cfg, "--out", out_dir.to_str().unwrap()]));
    let devices = manifest["devices"].as_array().unwrap();
    assert_eq!(devices.len(), 4);
    let pool = std::fs::read_to_string(out_dir.join("pool.csv")).unwrap();
    let rows = pool.lines().count() - 1;
    assert_eq!(rows as u64, manifest["pool_size"].as_u64().unwrap());
    assert_eq!(devices.last().unwrap()["end"].as_u64().unwrap() as usize, rows);
    assert!(out_dir.join("test.csv").exists());
}
