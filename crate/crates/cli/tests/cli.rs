use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn rcs(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rcs"))
        .current_dir(dir)
        .env_remove("RCS_DATA_DIR")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = rcs(dir, args);
    assert!(
        out.status.success(),
        "rcs {} failed: {}",
        args.join(" "),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn mixture_samples_recover_fidelity() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--qubits", "compact:12", "--cycles", "12", "--seed", "1"]);
    ok(d, &["sample", "--circuit", "circuit.json", "--shots", "100000", "--seed", "2", "--noise", "mixture:0.5"]);
    ok(d, &["xeb", "--samples", "samples.txt"]);
    let est = json(&d.join("xeb.json"));
    let value = est["value"].as_f64().unwrap();
    assert!((value - 0.5).abs() < 0.03, "{value}");
    assert_eq!(est["method"], "linear_xeb");
    assert_eq!(est["n_samples"], 100000);
}

#[test]
fn outputs_carry_digest_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--qubits", "compact:6", "--cycles", "4", "--seed", "9", "--out", "a.json"]);
    ok(d, &["gen", "--qubits", "compact:6", "--cycles", "4", "--seed", "9", "--out", "b.json"]);
    let a = json(&d.join("a.json"));
    let manifest = json(&d.join("a.json.manifest.json"));
    assert_eq!(a["schema_version"], 1);
    assert_eq!(a["run_digest"], manifest["run_digest"]);
    assert_eq!(manifest["command"], "gen");
    assert_eq!(manifest["seeds"][0], 9);
    assert_eq!(manifest["outputs"][0]["path"], "a.json");
    assert_eq!(
        std::fs::read(d.join("a.json")).unwrap(),
        std::fs::read(d.join("b.json")).unwrap(),
        "output path must not affect output bytes"
    );

    ok(d, &["gen", "--qubits", "compact:6", "--cycles", "4", "--seed", "10", "--out", "c.json"]);
    assert_ne!(json(&d.join("c.json"))["run_digest"], a["run_digest"]);
}

#[test]
fn runtime_anchor() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(dir.path(), &["runtime", "--shots", "1000000"]);
    let out = json(&dir.path().join("runtime.json"));
    assert!((out["seconds"].as_f64().unwrap() - 400.0).abs() < 1e-9);
    assert!(stdout.contains("runtime:"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(rcs(d, &["sample"]).status.code(), Some(2));
    assert_eq!(rcs(d, &["frobnicate"]).status.code(), Some(2));

    let missing = rcs(d, &["xeb", "--samples", "nope.txt"]);
    assert_eq!(missing.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("nope.txt"));

    std::fs::write(d.join("bad.json"), r#"{"schema_version": 1, "subset": 3}"#).unwrap();
    let bad = rcs(d, &["simulate", "--circuit", "bad.json"]);
    assert_eq!(bad.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("subset"));

    assert_eq!(rcs(d, &["gen", "--qubits", "compact:200", "--cycles", "2", "--seed", "1"]).status.code(), Some(3));
    assert_eq!(rcs(d, &["sample", "--circuit", "x", "--shots", "1", "--seed", "1", "--noise", "mixture:2"]).status.code(), Some(3));

    ok(d, &["gen", "--qubits", "compact:20", "--cycles", "2", "--seed", "1"]);
    let over = rcs(d, &["simulate", "--circuit", "circuit.json", "--max-qubits", "16"]);
    assert_eq!(over.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&over.stderr).contains("limit of 16"));

    let tight = rcs(d, &["cost", "--circuit", "circuit.json", "--seed", "1", "--memory", "64B"]);
    assert_eq!(tight.status.code(), Some(3));
}

#[test]
fn patch_and_predict_on_bundled_subset() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--qubits", "subset31", "--cycles", "12", "--seed", "3"]);
    ok(d, &["patch", "--circuit", "circuit.json", "--patches", "4"]);
    let stdout = ok(d, &["predict", "--circuit", "circuit.json", "--patch-ratio", "4"]);
    assert!(stdout.contains("predicted fidelity"));
    let pred = json(&d.join("prediction.json"));
    let ratio = pred["patch_ratio"].as_f64().unwrap();
    assert!(ratio > 1.0 && ratio < 1.3, "{ratio}");
    ok(d, &["simulate", "--circuit", "patched.json", "--amplitude", "0"]);
    let state = json(&d.join("state.json"));
    assert_eq!(state["patches"].as_array().unwrap().len(), 4);
}

#[test]
fn cost_replay_and_reference_table() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--qubits", "compact:10", "--cycles", "6", "--seed", "4"]);
    ok(d, &["cost", "--circuit", "circuit.json", "--seed", "1", "--memory", "2KiB", "--contract"]);
    let cost = json(&d.join("cost.json"));
    assert_eq!(cost["contraction"]["matches_report"], true);
    assert!(cost["report"]["max_intermediate_bytes"].as_f64().unwrap() <= 2048.0);

    let table = ok(d, &["cost", "--out", "table.json"]);
    assert!(table.contains("discrepancies between sources: 0"));
    let checks = json(&d.join("table.json"))["runtime_checks"].as_array().unwrap().len();
    assert!(checks > 0);
}

#[test]
fn monitor_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("series.csv"), "timestamp,value\n0,1.0e-3\n1,1.24e-3\n2,1.30e-3\n").unwrap();
    let stdout = ok(d, &["monitor", "--series", "series.csv", "--estimate", "1e-3"]);
    assert!(stdout.contains("fail"));
    let csv = std::fs::read_to_string(d.join("monitor.csv")).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert!(lines[0].starts_with("# schema_version=1 run_digest="));
    assert_eq!(lines[1], "timestamp,value,lower,upper,verdict");
    assert!(lines[3].ends_with("pass"));
    assert!(lines[4].ends_with("fail"));
}

#[test]
fn data_dir_overrides_profile() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::create_dir_all(d.join("data/profiles")).unwrap();
    let profile = r#"{"schema_version": 1, "name": "slow", "mean": {"e1": 0.001, "e2": 0.01, "e_ro": 0.01, "e_idle": 0.001},
        "durations": {"t_1q_ns": 30, "t_2q_ns": 50, "t_idle_ns": 50, "sampling_interval_us": 1000}}"#;
    std::fs::write(d.join("data/profiles/slow.json"), profile).unwrap();
    ok(d, &["--data-dir", "data", "runtime", "--shots", "1000", "--profile", "slow"]);
    let out = json(&d.join("runtime.json"));
    assert!((out["seconds"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}
