use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn qobs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qobs"))
        .args(args)
        .env_remove("QOBS_DIM_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn diagnostic(o: &Output) -> Value {
    let line = stderr(o).lines().last().unwrap_or_default().to_string();
    serde_json::from_str(&line).unwrap_or_else(|_| panic!("not a JSON diagnostic: {line}"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

const PAULI_Z: &str = r#"{"dim": 2, "re": [[1, 0], [0, -1]], "im": [[0, 0], [0, 0]]}"#;
const PLUS: &str = r#"{"dim": 2, "re": [[0.5, 0.5], [0.5, 0.5]], "im": [[0, 0], [0, 0]]}"#;

#[test]
fn canonical_four_copy_error_is_one_half() {
    let dir = tempfile::tempdir().unwrap();
    let z = write(dir.path(), "pauli-z.json", PAULI_Z);
    let plus = write(dir.path(), "plus.json", PLUS);
    let o = qobs(&["canonical", "--observable", z.to_str().unwrap(), "--state", plus.to_str().unwrap(), "--copies", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["closed_form_error"].as_f64(), Some(0.5));
    assert_eq!(v["n_copies"].as_u64(), Some(4));
    assert_eq!(v["distribution"].as_array().unwrap().len(), 5);
    assert!(stdout(&o).contains("\"closed_form_error\": 5.0000000000000000e-1"));
}

#[test]
fn canonical_csv_and_povm_output() {
    let dir = tempfile::tempdir().unwrap();
    let povm = dir.path().join("povm.json");
    let o = qobs(&[
        "canonical", "--observable", "pauli-z", "--state", "plus", "--copies", "2", "--format", "csv", "--povm-out",
        povm.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        stdout(&o),
        "value,probability\n-1.0000000000000000e0,2.5000000000000000e-1\n0.0000000000000000e0,5.0000000000000000e-1\n1.0000000000000000e0,2.5000000000000000e-1\n"
    );
    let o = qobs(&["verify-povm", "--povm", povm.to_str().unwrap(), "--copies", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], Value::Bool(true));

    let o = qobs(&["error", "--povm", povm.to_str().unwrap(), "--copies", "2", "--observable", "pauli-z", "--state", "plus"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["gap"].as_f64().unwrap().abs() < 1e-12);
    assert_eq!(v["unbiased"], Value::Bool(true));
    assert!((v["estimation_error"].as_f64().unwrap() - 0.5f64.sqrt()).abs() < 1e-12);

    let o = qobs(&["sample", "--povm", povm.to_str().unwrap(), "--copies", "2", "--state", "plus", "--shots", "500", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let total: u64 = v["outcomes"].as_array().unwrap().iter().map(|e| e["count"].as_u64().unwrap()).sum();
    assert_eq!(total, 500);
}

#[test]
fn incomplete_povm_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "bad.json",
        r#"{"dim": 2, "outcomes": [
            {"value": 1, "re": [[1.1, 0], [0, 0]], "im": [[0, 0], [0, 0]]},
            {"value": -1, "re": [[0, 0], [0, 1]], "im": [[0, 0], [0, 0]]}]}"#,
    );
    let o = qobs(&["verify-povm", "--povm", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let d = diagnostic(&o);
    assert_eq!(d["error"]["code"], "POVM_COMPLETENESS");
    assert!(d["error"]["message"].as_str().unwrap().contains("residual"));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["completeness_residual"].as_f64().unwrap() - 0.1).abs() < 1e-12);

    let o = qobs(&["error", "--povm", p.to_str().unwrap(), "--observable", "pauli-z", "--state", "plus"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(diagnostic(&o)["error"]["code"], "POVM_COMPLETENESS");
    assert!(o.stdout.is_empty());
}

#[test]
fn out_of_spectrum_values_only_warn() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "wide.json",
        r#"{"dim": 2, "outcomes": [
            {"value": 3, "re": [[0.5, 0], [0, 0.5]], "im": [[0, 0], [0, 0]]},
            {"value": -3, "re": [[0.5, 0], [0, 0.5]], "im": [[0, 0], [0, 0]]}]}"#,
    );
    let o = qobs(&["verify-povm", "--povm", p.to_str().unwrap(), "--observable", "pauli-z"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stderr(&o).lines().filter(|l| l.starts_with("warning:")).count(), 2);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["warnings"].as_array().unwrap().len(), 2);
}

#[test]
fn adversary_campaign_rows_and_gaps() {
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("summary.json");
    let o = qobs(&["adversary", "--trials", "100", "--copies", "2", "--summary", summary.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let gap_col = header.iter().position(|h| *h == "gap").unwrap();
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 100);
    for row in rows {
        let gap: f64 = row.split(',').nth(gap_col).unwrap().parse().unwrap();
        assert!(gap >= -1e-8);
    }
    let s: Value = serde_json::from_str(&fs::read_to_string(summary).unwrap()).unwrap();
    assert_eq!(s["all_gaps_ok"], Value::Bool(true));
    assert_eq!(s["trials"].as_u64(), Some(100));
}

#[test]
fn adversary_explicit_grid_and_json() {
    let o = qobs(&["adversary", "--trials", "5", "--copies", "3", "--grid", "-1,-0.5,0,0.5,1", "--format", "json", "--seed", "9"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(s["rows"].as_array().unwrap().len(), 5);
    assert_eq!(s["grid"].as_array().unwrap().len(), 5);
    let o = qobs(&["adversary", "--copies", "2", "--grid", "0.0,0.0"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(diagnostic(&o)["error"]["code"], "INFEASIBLE");
    let o = qobs(&["adversary", "--grid", "many"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(diagnostic(&o)["error"]["code"], "INVALID_ARGUMENT");
}

#[test]
fn fixed_seed_reports_are_byte_identical() {
    for args in [
        &["canonical", "--observable", "pauli-x", "--state", "zero", "--copies", "3", "--shots", "1000", "--seed", "17"][..],
        &["simulate", "--observable", "pauli-z", "--state", "plus", "--copies", "4", "--shots", "20000", "--seed", "4"][..],
        &["lemma-demo", "--dim", "2", "--copies", "3", "--seed", "8"][..],
        &["adversary", "--trials", "3", "--seed", "2"][..],
    ] {
        let a = qobs(args);
        let b = qobs(args);
        assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn simulate_reports_sample_statistics() {
    let o = qobs(&["simulate", "--observable", "pauli-z", "--state", "plus", "--copies", "4", "--shots", "100000", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["sample_mean"].as_f64().unwrap().abs() <= 4.0 * 0.5 / (1e5f64).sqrt());
    assert!((v["sample_stddev"].as_f64().unwrap() - 0.5).abs() <= 0.025);
}

#[test]
fn dimension_cap_from_flag_and_environment() {
    let o = qobs(&["canonical", "--observable", "pauli-z", "--state", "plus", "--copies", "4", "--dim-cap", "8"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(diagnostic(&o)["error"]["code"], "DIM_CAP");
    assert!(o.stdout.is_empty());
    let o = Command::new(env!("CARGO_BIN_EXE_qobs"))
        .args(["theta", "--observable", "pauli-z", "--copies", "4"])
        .env("QOBS_DIM_CAP", "8")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(diagnostic(&o)["error"]["code"], "DIM_CAP");
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(qobs(&[]).status.code(), Some(2));
    assert_eq!(qobs(&["canonical", "--state", "plus"]).status.code(), Some(2));
    assert_eq!(qobs(&["canonical", "--observable", "pauli-z", "--state", "plus", "--copies", "0"]).status.code(), Some(2));
    assert_eq!(qobs(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(qobs(&["canonical", "--observable", "pauli-z", "--state", "plus", "--format", "xml"]).status.code(), Some(2));
}

#[test]
fn malformed_inputs_give_coded_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let junk = write(dir.path(), "junk.json", "{\"dim\": 2, \"re\": [[1, 0]");
    let ragged = write(dir.path(), "ragged.json", r#"{"dim": 2, "re": [[1, 0], [0]], "im": [[0, 0], [0, 0]]}"#);
    let skew = write(dir.path(), "skew.json", r#"{"dim": 2, "re": [[1, 2], [0, 1]], "im": [[0, 0], [0, 0]]}"#);
    let cases = [
        (junk.to_str().unwrap(), "PARSE"),
        (ragged.to_str().unwrap(), "DIM_MISMATCH"),
        (skew.to_str().unwrap(), "NOT_HERMITIAN"),
        ("no-such-preset", "UNKNOWN_PRESET"),
    ];
    for (obs, code) in cases {
        let o = qobs(&["canonical", "--observable", obs, "--state", "plus"]);
        assert_eq!(o.status.code(), Some(1));
        assert_eq!(diagnostic(&o)["error"]["code"], code);
        assert!(o.stdout.is_empty());
    }
    let o = qobs(&["canonical", "--observable", "spin1-z", "--state", "plus"]);
    assert_eq!(diagnostic(&o)["error"]["code"], "DIM_MISMATCH");
    let bad_state = write(dir.path(), "state.json", r#"{"dim": 2, "re": [[1, 0], [0, 1]], "im": [[0, 0], [0, 0]]}"#);
    let o = qobs(&["canonical", "--observable", "pauli-z", "--state", bad_state.to_str().unwrap()]);
    assert_eq!(diagnostic(&o)["error"]["code"], "STATE_TRACE");
    let o = qobs(&["verify-povm", "--povm", "/nonexistent/povm.json"]);
    assert_eq!(diagnostic(&o)["error"]["code"], "IO");
}

#[test]
fn theta_and_twirl_write_operator_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("theta.json");
    let o = qobs(&["theta", "--observable", "pauli-z", "--copies", "2", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let diag: Vec<f64> = (0..4).map(|i| v["re"][i][i].as_f64().unwrap()).collect();
    assert_eq!(diag, vec![1.0, 0.0, 0.0, -1.0]);

    let x = write(
        dir.path(),
        "x.json",
        r#"{"dim": 4, "re": [[0,0,0,0],[0,1,0,0],[0,0,0,0],[0,0,0,0]], "im": [[0,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,0]]}"#,
    );
    let o = qobs(&["twirl", "--operator", x.to_str().unwrap(), "--copies", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["re"][1][1].as_f64(), Some(0.5));
    assert_eq!(v["re"][2][2].as_f64(), Some(0.5));
    let o = qobs(&["twirl", "--operator", x.to_str().unwrap(), "--copies", "3"]);
    assert_eq!(diagnostic(&o)["error"]["code"], "DIM_MISMATCH");
}

#[test]
fn lemma_demo_reports_and_flags_too_few_probes() {
    let o = qobs(&["lemma-demo", "--dim", "2", "--copies", "2", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["invariant_dimension"].as_u64(), Some(10));
    assert!(v["moment_reconstruction_error"].as_f64().unwrap() <= 1e-8);
    assert!(v["condition_number"].as_f64().unwrap() < 1e8);
    let o = qobs(&["lemma-demo", "--dim", "2", "--copies", "2", "--probes", "5"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(diagnostic(&o)["error"]["code"], "CONDITIONING");
}

#[test]
fn help_lists_subcommands_and_flags() {
    let o = qobs(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for sub in ["canonical", "simulate", "verify-povm", "error", "sample", "lemma-demo", "adversary", "theta", "twirl"] {
        assert!(text.contains(sub), "{sub}");
    }
    assert!(text.contains("QOBS_DIM_CAP"));
    let o = qobs(&["canonical", "--help"]);
    for flag in ["--observable", "--state", "--copies", "--shots", "--seed", "--merge-tol", "--format", "--output"] {
        assert!(stdout(&o).contains(flag), "{flag}");
    }
}
