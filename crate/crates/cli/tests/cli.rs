use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn rig(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rig-lab")).args(args).current_dir(dir).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn generate_is_bit_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["generate", "--n", "500", "--d", "64", "--p", "0.5", "--q", "0.2", "--seed", "7", "-o"];
    for name in ["a.json", "b.json"] {
        let mut a = args.to_vec();
        a.push(name);
        assert!(rig(&a, dir.path()).status.success());
    }
    let a = std::fs::read(dir.path().join("a.json")).unwrap();
    let b = std::fs::read(dir.path().join("b.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn sparse_recovery_of_a_single_clique_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let gen = rig(&["generate", "--n", "300", "--d", "1", "--p", "0.1", "--q", "0", "--seed", "11", "-o", "i.json"], dir.path());
    assert!(gen.status.success());
    let out = rig(&["recover-sparse", "-i", "i.json", "--t", "2", "--strict"], dir.path());
    let report = stdout_json(&out);
    assert_eq!(report["score"]["exact_recovery"], Value::Bool(true));
    assert_eq!(report["sets"].as_array().unwrap().len(), 1);
}

#[test]
fn sweep_writes_one_row_per_cell_and_trial() {
    let dir = tempfile::tempdir().unwrap();
    let spec = r#"{"grid": {"n": [150, 200], "d": [1], "p": [0.1], "q": [0.0, 0.001]}, "trials": 3, "sparse_t": 2}"#;
    std::fs::write(dir.path().join("spec.json"), spec).unwrap();
    let out = rig(&["sweep", "--spec", "spec.json", "-o", "rows.csv", "--summary", "sum.csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = std::fs::read_to_string(dir.path().join("rows.csv")).unwrap();
    let lines: Vec<&str> = rows.lines().collect();
    assert_eq!(lines.len(), 13);
    assert!(lines[0].starts_with("cell,trial,seed,"));
    let summary = std::fs::read_to_string(dir.path().join("sum.csv")).unwrap();
    assert_eq!(summary.lines().count(), 5);

    // Same spec, same rows.
    let again = rig(&["sweep", "--spec", "spec.json"], dir.path());
    assert_eq!(String::from_utf8(again.stdout).unwrap(), rows);
}

#[test]
fn empty_grid_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("spec.json"), r#"{"trials": 3}"#).unwrap();
    let out = rig(&["sweep", "--spec", "spec.json"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("cell,trial,seed,n,d,p,q,"));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(rig(&["no-such-command"], dir.path()).status.code(), Some(2));
    assert_eq!(rig(&["generate", "--bogus"], dir.path()).status.code(), Some(2));
    assert_eq!(rig(&["generate", "--n", "10"], dir.path()).status.code(), Some(2));
    assert_eq!(rig(&["spectral", "-i", "missing.json"], dir.path()).status.code(), Some(2));
    let bad = rig(&["generate", "--n", "10", "--d", "2", "--p", "1.5", "--q", "0"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn malformed_instance_reports_its_position() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{\n  \"version\": 1,\n  \"params\": [\n").unwrap();
    let out = rig(&["spectral", "-i", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line"), "{err}");
}

#[test]
fn strict_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    rig(&["generate", "--n", "300", "--d", "1", "--p", "0.1", "--q", "0", "--seed", "11", "-o", "i.json"], dir.path());
    // A target size far from the clique finds nothing.
    let lax = rig(&["recover-sparse", "-i", "i.json", "--t", "2", "--k", "5"], dir.path());
    assert_eq!(lax.status.code(), Some(0));
    let strict = rig(&["recover-sparse", "-i", "i.json", "--t", "2", "--k", "5", "--strict"], dir.path());
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn config_file_fills_missing_flags_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), r#"{"n": 60, "d": 2, "p": 0.5, "q": 0.1, "seed": 4}"#).unwrap();
    let a = rig(&["generate", "--config", "c.json"], dir.path());
    let b = rig(&["generate", "--n", "60", "--d", "2", "--p", "0.5", "--q", "0.1", "--seed", "4"], dir.path());
    assert_eq!(a.stdout, b.stdout);
    let c = rig(&["generate", "--config", "c.json", "--seed", "5"], dir.path());
    let inst = stdout_json(&c);
    assert_eq!(inst["params"]["seed"], 5);
    assert_eq!(inst["params"]["n"], 60);

    std::fs::write(dir.path().join("bad.json"), r#"{"n": 60, "colour": 1}"#).unwrap();
    let bad = rig(&["generate", "--config", "bad.json"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn adversary_only_deletes_noise_edges() {
    let dir = tempfile::tempdir().unwrap();
    rig(&["generate", "--n", "80", "--d", "3", "--p", "0.5", "--q", "0.2", "--seed", "2", "-o", "i.json"], dir.path());
    let out = rig(&["adversary", "-i", "i.json", "--monotone-fraction", "0.5", "-o", "j.json"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let load = |f: &str| -> Value { serde_json::from_str(&std::fs::read_to_string(dir.path().join(f)).unwrap()).unwrap() };
    let (i, j) = (load("i.json"), load("j.json"));
    assert_eq!(i["labels"], j["labels"]);
    assert!(j["edges"].as_array().unwrap().len() < i["edges"].as_array().unwrap().len());
}

#[test]
fn analysis_subcommands_produce_json() {
    let dir = tempfile::tempdir().unwrap();
    rig(&["generate", "--n", "60", "--d", "2", "--p", "0.5", "--q", "0", "--seed", "9", "-o", "i.json"], dir.path());
    let s = stdout_json(&rig(&["spectral", "-i", "i.json"], dir.path()));
    assert!(s["norm"].as_f64().unwrap() > 0.0);
    let b = stdout_json(&rig(&["balancedness", "-i", "i.json", "--a", "6"], dir.path()));
    assert_eq!(b["r"], 2);
    let v = stdout_json(&rig(&["verify-identifiability", "-i", "i.json", "--strict"], dir.path()));
    assert!(v["violations"].as_array().unwrap().is_empty());
    let r = stdout_json(&rig(&["refute", "-i", "i.json", "--truth", "--epsilon", "0.5"], dir.path()));
    assert!(r["verdict"].is_string());
}

#[test]
fn traces_stream_to_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    rig(&["generate", "--n", "300", "--d", "1", "--p", "0.1", "--q", "0", "--seed", "11", "-o", "i.json"], dir.path());
    let out = rig(&["recover-sparse", "-i", "i.json", "--t", "2", "--traces", "t.jsonl"], dir.path());
    let report = stdout_json(&out);
    assert!(report["traces"].as_array().unwrap().is_empty());
    let lines = std::fs::read_to_string(dir.path().join("t.jsonl")).unwrap();
    assert!(lines.lines().count() >= 1);
    for l in lines.lines() {
        let _: Value = serde_json::from_str(l).unwrap();
    }
}
