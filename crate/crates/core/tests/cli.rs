use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

fn entpower(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entpower"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn assert_json_close(actual: &Value, expected: &Value, path: &str) {
    match (actual, expected) {
        (Value::Number(a), Value::Number(e)) => {
            let (a, e) = (a.as_f64().unwrap(), e.as_f64().unwrap());
            assert!((a - e).abs() <= 1e-9, "{path}: {a} vs {e}");
        }
        (Value::Array(a), Value::Array(e)) => {
            assert_eq!(a.len(), e.len(), "{path}: length");
            for (i, (x, y)) in a.iter().zip(e).enumerate() {
                assert_json_close(x, y, &format!("{path}[{i}]"));
            }
        }
        (Value::Object(a), Value::Object(e)) => {
            let mut ka: Vec<_> = a.keys().collect();
            let mut ke: Vec<_> = e.keys().collect();
            ka.sort();
            ke.sort();
            assert_eq!(ka, ke, "{path}: keys");
            for k in ke {
                assert_json_close(&a[k], &e[k], &format!("{path}.{k}"));
            }
        }
        _ => assert_eq!(actual, expected, "{path}"),
    }
}

#[test]
fn decompose_cnot_json_matches_golden() {
    let o = entpower(&["decompose", "--gate", "cnot", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let actual: Value = serde_json::from_str(&stdout(&o)).expect("single JSON document");
    let expected: Value =
        serde_json::from_str(&std::fs::read_to_string(golden("decompose_cnot.json")).unwrap())
            .unwrap();
    assert_json_close(&actual, &expected, "$");
    assert!(actual["reconstruction_residual"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn power_swap_matches_golden() {
    let o = entpower(&["power", "--gate", "swap", "--c0", "0.3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        std::fs::read_to_string(golden("power_swap_0.3.txt")).unwrap()
    );
}

#[test]
fn curve_csv_matches_golden_on_stdout_and_file() {
    let expected = std::fs::read_to_string(golden("curve_cnot_3.csv")).unwrap();
    let o = entpower(&["curve", "--gate", "cnot", "--steps", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), expected);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    let o = entpower(&[
        "curve",
        "--gate",
        "cnot",
        "--steps",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(written, expected);
    assert!(!written.contains('\r'));
}

#[test]
fn curve_verify_adds_oracle_columns() {
    let o = entpower(&[
        "curve",
        "--gate",
        "canonical:0.3,0.2,0.1",
        "--steps",
        "3",
        "--verify",
        "--starts",
        "8",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("c0,c_min,c_max,oracle_min,oracle_max"));
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(v.len(), 5);
        assert!(
            (v[1] - v[3]).abs() <= 1e-3 && (v[2] - v[4]).abs() <= 1e-3,
            "{line}"
        );
    }
}

#[test]
fn json_gate_file_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cnot.json");
    let (z, l) = ([0.0, 0.0], [1.0, 0.0]);
    let doc = serde_json::json!({
        "name": "cnot",
        "matrix": [[l, z, z, z], [z, l, z, z], [z, z, z, l], [z, z, l, z]],
    });
    std::fs::write(&path, doc.to_string()).unwrap();
    let out = entpower(&["decompose", "--gate", path.to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let alpha: Vec<f64> = v["alpha"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert!((alpha[0] - std::f64::consts::FRAC_PI_4).abs() <= 1e-9);
    assert!(alpha[1].abs() <= 1e-9 && alpha[2].abs() <= 1e-9);
}

#[test]
fn compare_prints_relation_and_angles() {
    let o = entpower(&["compare", "--gate-a", "swap", "--gate-b", "cnot"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("swap < cnot"));
    assert!(text.contains("effective_angle(cnot): 1.57079632679"));
    let o = entpower(&["compare", "--gate-a", "iswap", "--gate-b", "cnot"]);
    assert_eq!(stdout(&o).lines().next(), Some("iswap = cnot"));
}

#[test]
fn degrees_flag_changes_display_only() {
    let o = entpower(&["decompose", "--gate", "cnot", "--degrees"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("alpha: 45 0 0"));
}

#[test]
fn verify_is_deterministic_and_reports_failure_with_exit_1() {
    let args = [
        "verify",
        "--gate",
        "canonical:0.3,0.2,0.1",
        "--grid",
        "3",
        "--starts",
        "4",
        "--seed",
        "9",
    ];
    let a = entpower(&args);
    let b = entpower(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    let mut json_args = args.to_vec();
    json_args.push("--json");
    let j1 = entpower(&json_args);
    let j2 = entpower(&json_args);
    assert_eq!(j1.stdout, j2.stdout);
    let v: Value = serde_json::from_str(&stdout(&j1)).unwrap();
    assert_eq!(v["pass"], Value::Bool(true));

    let o = entpower(&[
        "verify",
        "--gate",
        "canonical:0.3,0.2,0.1",
        "--grid",
        "2",
        "--starts",
        "1",
        "--tol",
        "1e-300",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("overall: FAIL"));
}

#[test]
fn input_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let z = [0.0, 0.0];
    let doc = serde_json::json!({ "matrix": [[[2.0, 0.0], z, z, z], [z, [1.0, 0.0], z, z], [z, z, [1.0, 0.0], z], [z, z, z, [1.0, 0.0]]] });
    std::fs::write(&bad, doc.to_string()).unwrap();
    let malformed = dir.path().join("malformed.json");
    std::fs::write(&malformed, "{\"matrix\": [[1, 2]]}").unwrap();
    let unwritable = dir.path().join("missing-dir").join("out.csv");

    let cases: Vec<Vec<&str>> = vec![
        vec!["decompose", "--gate", "toffoli"],
        vec!["decompose", "--gate", bad.to_str().unwrap()],
        vec!["decompose", "--gate", malformed.to_str().unwrap()],
        vec!["decompose", "--gate", "/no/such/gate.json"],
        vec!["decompose", "--gate", "canonical:1,2"],
        vec!["power", "--gate", "cnot", "--c0", "1.5"],
        vec!["power", "--gate", "cnot", "--c0", "-0.2"],
        vec!["power", "--gate", "cnot", "--c0", "abc"],
        vec!["curve", "--gate", "cnot", "--steps", "1"],
        vec![
            "curve",
            "--gate",
            "cnot",
            "--steps",
            "3",
            "--out",
            unwritable.to_str().unwrap(),
        ],
        vec!["verify", "--gate", "cnot", "--starts", "0"],
        vec!["verify", "--gate", "cnot", "--tol", "-1"],
        vec!["frobnicate"],
        vec![],
    ];
    for args in cases {
        let o = entpower(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn help_exits_0() {
    let o = entpower(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("decompose"));
}

#[test]
fn run_writes_to_any_writer() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = entpower::cli::run(
        ["entpower", "power", "--gate", "cnot", "--c0", "0.5"],
        &mut out,
        &mut err,
    );
    assert_eq!(code, 0);
    let text = String::from_utf8(out).unwrap();
    assert!(text.contains("c_min: 0\n") && text.contains("c_max: 1\n"));
    assert!(err.is_empty());
}
