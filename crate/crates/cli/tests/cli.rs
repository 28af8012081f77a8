use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const ZERO_PLUS: &str = r#"{
  "priors": [0.5, 0.5],
  "states": [
    {"type": "pure_qubit", "bloch": [0.0, 0.0]},
    {"type": "pure_qubit", "bloch": [1.5707963267948966, 0.0]}
  ]
}"#;

const TRIPLE: &str = r#"{
  "priors": [0.3333333333333333, 0.3333333333333333, 0.3333333333333334],
  "states": [
    {"type": "pure_qubit", "bloch": [0.0, 0.0]},
    {"type": "pure_qubit", "bloch": [1.0471975511965976, 0.0]},
    {"type": "pure_qubit", "bloch": [2.0943951023931953, 1.5707963267948966]}
  ]
}"#;

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, body).unwrap();
    path
}

fn qmht(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmht"))
        .args(args)
        .output()
        .unwrap()
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows of a CSV, comment lines dropped, each split into fields.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn identical_states_are_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "same.json",
        r#"{"priors": [0.5, 0.5], "states": [
            {"type": "pure_qubit", "bloch": [0.3, 0.1]},
            {"type": "pure_qubit", "bloch": [0.3, 0.1]}]}"#,
    );
    let out = qmht(&["chernoff", "--config", arg(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn malformed_config_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "bad.json", r#"{"hypotheses": "x.json", "colour": 1}"#);
    let out = qmht(&["chernoff", "--config", arg(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dimension_cap_is_a_resource_error() {
    let dir = TempDir::new().unwrap();
    write(&dir, "pair.json", ZERO_PLUS);
    let cfg = write(
        &dir,
        "exp.json",
        r#"{"hypotheses": "pair.json", "backend": "dense", "max_dim": 16, "n_range": [2, 4, 6]}"#,
    );
    let out = qmht(&["binary-sweep", "--config", arg(&cfg)]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn binary_sweep_is_deterministic_and_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "pair.json", ZERO_PLUS);
    let args = [
        "binary-sweep",
        "--config",
        arg(&cfg),
        "--n-min",
        "1",
        "--n-max",
        "8",
    ];
    let (a, b) = (qmht(&args), qmht(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("n,error,exponent\n"));
    assert!(text.lines().last().unwrap().starts_with("# fit slope="));
    for row in rows(&text) {
        let n: i32 = row[0].parse().unwrap();
        let err: f64 = row[1].parse().unwrap();
        let closed = (1.0 - (1.0 - 0.5f64.powi(n)).sqrt()) / 2.0;
        assert!((err - closed).abs() <= 1e-12, "n = {n}: {err} vs {closed}");
    }
}

#[test]
fn two_hypothesis_multi_sweep_reduces_to_binary() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "pair.json", ZERO_PLUS);
    let range = ["--n-min", "2", "--n-max", "10", "--n-step", "2"];
    let binary = qmht(&[&["binary-sweep", "--config", arg(&cfg)][..], &range].concat());
    let multi = qmht(&[&["multi-sweep", "--config", arg(&cfg)][..], &range].concat());
    assert!(binary.status.success() && multi.status.success());
    let (b, m) = (rows(&stdout(&binary)), rows(&stdout(&multi)));
    assert_eq!(b.len(), 5);
    for (rb, rm) in b.iter().zip(&m) {
        assert_eq!(rb[0], rm[0]);
        // multi rows: n, err_1, err_2, error, exponent
        let (eb, em): (f64, f64) = (rb[1].parse().unwrap(), rm[3].parse().unwrap());
        assert!((eb - em).abs() <= 1e-12 * eb.max(1e-300), "{eb} vs {em}");
    }
}

#[test]
fn orthogonal_pair_reported_as_infinite() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "line.json",
        r#"{"priors": [0.3333333333333333, 0.3333333333333333, 0.3333333333333334], "states": [
            {"type": "pure_qubit", "bloch": [0.0, 0.0]},
            {"type": "pure_qubit", "bloch": [1.5707963267948966, 0.0]},
            {"type": "pure_qubit", "bloch": [3.141592653589793, 0.0]}]}"#,
    );
    let out = qmht(&["chernoff", "--config", arg(&cfg)]);
    assert!(out.status.success());
    let table = rows(&stdout(&out));
    assert_eq!(table.len(), 3);
    assert_eq!(table[1][..3], ["1", "3", "inf"]);
    let ln2: f64 = table[0][2].parse().unwrap();
    assert!((ln2 - std::f64::consts::LN_2).abs() <= 1e-6);
    let summary = String::from_utf8(out.stderr).unwrap();
    assert!(summary.contains("pair (1, 3) has infinite distance"));
}

#[test]
fn plan_writes_file_and_echoes_manual_weights() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "triple.json", TRIPLE);
    let csv = dir.path().join("plan.csv");
    let out = qmht(&[
        "plan",
        "--config",
        arg(&cfg),
        "--n",
        "10",
        "--weights",
        "manual:0.5,0.3,0.2",
        "--out",
        arg(&csv),
    ]);
    assert!(out.status.success());
    let summary = stdout(&out);
    assert!(summary.contains("lengths [5, 3, 2]"), "{summary}");
    assert!(summary.contains("(manual)"));
    let table = fs::read_to_string(&csv).unwrap();
    assert!(table.starts_with("k,i,j,weight,length,xi\n"));
    let lengths: usize = rows(&table)
        .iter()
        .map(|r| r[4].parse::<usize>().unwrap())
        .sum();
    assert_eq!(lengths, 10);
}

#[test]
fn bad_manual_weights_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "triple.json", TRIPLE);
    let out = qmht(&[
        "plan",
        "--config",
        arg(&cfg),
        "--n",
        "10",
        "--weights",
        "manual:0.5,0.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn monte_carlo_sweep_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "triple.json", TRIPLE);
    let args = [
        "multi-sweep",
        "--config",
        arg(&cfg),
        "--method",
        "monte-carlo",
        "--samples",
        "2000",
        "--seed",
        "5",
        "--n-min",
        "3",
        "--n-max",
        "9",
        "--n-step",
        "3",
    ];
    let (a, b) = (qmht(&args), qmht(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).lines().next().unwrap().ends_with(",std_error"));
}
