use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run_bin(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_frobenius-lab")).args(args).output().expect("binary runs");
    let code = out.status.code().expect("exit code");
    let doc = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (code, doc)
}

fn rat(v: &Value) -> (String, String) {
    (v["num"].as_str().unwrap().to_string(), v["den"].as_str().unwrap().to_string())
}

fn assert_no_bare_numbers(v: &Value) {
    match v {
        Value::Number(n) => panic!("bare number {n} in output"),
        Value::Array(a) => a.iter().for_each(assert_no_bare_numbers),
        Value::Object(o) => o.values().for_each(assert_no_bare_numbers),
        _ => {}
    }
}

#[test]
fn node_hk_job() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("node.csv");
    let (code, doc) = run_bin(&["--input", fixture("node_hk.job").to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_no_bare_numbers(&doc);
    let samples = doc["results"]["samples"].as_array().unwrap();
    let lambdas: Vec<(String, String)> = samples.iter().map(|s| rat(&s["lambda"])).collect();
    let want = [("5", "3"), ("17", "9"), ("53", "27")];
    assert_eq!(lambdas, want.map(|(a, b)| (a.to_string(), b.to_string())));
    assert_eq!(rat(&doc["results"]["empirical_c"]), ("2".into(), "3".into()));
    let table = std::fs::read_to_string(csv).unwrap();
    assert_eq!(table.lines().nth(3), Some("3,27,53,53/27"));
}

#[test]
fn fermat_fedder_job() {
    let (code, doc) = run_bin(&["--input", fixture("fermat_p5_fedder.job").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(doc["results"]["is_F_pure"], Value::Bool(false));
    let (code, doc) = run_bin(&["--input", fixture("fermat_p7_fedder.job").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(doc["results"]["is_F_pure"], Value::Bool(true));
}

#[test]
fn json_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cusp.json");
    let (code, _) = run_bin(&["--input", fixture("cusp_tame.job").to_str().unwrap(), "--json", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_no_bare_numbers(&doc);
    assert_eq!(rat(&doc["results"]["discriminant"]["valuation"]), ("9".into(), "1".into()));
    assert_eq!(rat(&doc["results"]["invariants"]["Delta"]), ("9".into(), "1".into()));
}

#[test]
fn parse_error_exit_code() {
    let (code, doc) = run_bin(&["--input", fixture("malformed.job").to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(doc["error"]["kind"], "parse");
    assert_eq!(rat(&doc["error"]["position"]), ("5".into(), "1".into()));
    assert_no_bare_numbers(&doc);
}

#[test]
fn precondition_and_budget_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let off = dir.path().join("off.job");
    std::fs::write(&off, "command = hk\np = 5; vars = x, y; ideal = y^2 - x^3; point = 1,0;\n").unwrap();
    let (code, doc) = run_bin(&["--input", off.to_str().unwrap()]);
    assert_eq!(code, 3);
    assert_eq!(doc["error"]["kind"], "precondition");

    let heavy = dir.path().join("heavy.job");
    std::fs::write(&heavy, "command = fsig\np = 3; vars = x, y, z; ideal = x*y, x*z, y*z\nemax = 2\n").unwrap();
    let (code, doc) = run_bin(&["--input", heavy.to_str().unwrap(), "--budget-pairs", "1"]);
    assert_eq!(code, 4, "{doc}");
    assert_eq!(doc["error"]["kind"], "budget");
}

#[test]
fn missing_input_is_an_io_error() {
    let (code, doc) = run_bin(&["--input", "/nonexistent/job"]);
    assert_eq!(code, 1);
    assert_eq!(doc["error"]["kind"], "io");
}

#[test]
fn repeated_runs_hash_identically() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let job = fixture("node_surface_scan.job");
    for path in [&a, &b] {
        let (code, _) = run_bin(&["--input", job.to_str().unwrap(), "--json", path.to_str().unwrap(), "--threads", "2"]);
        assert_eq!(code, 0);
    }
    let da: Value = serde_json::from_str(&std::fs::read_to_string(a).unwrap()).unwrap();
    let db: Value = serde_json::from_str(&std::fs::read_to_string(b).unwrap()).unwrap();
    assert_eq!(da["results"], db["results"]);
    assert_eq!(da["hash"], db["hash"]);
}

#[test]
fn every_fixture_runs() {
    let dir = std::fs::read_dir(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")).unwrap();
    for entry in dir {
        let path = entry.unwrap().path();
        let (code, doc) = run_bin(&["--input", path.to_str().unwrap()]);
        let want = if path.file_stem().unwrap() == "malformed" { 2 } else { 0 };
        assert_eq!(code, want, "{}: {doc}", path.display());
        assert_no_bare_numbers(&doc);
    }
}
