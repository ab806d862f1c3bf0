use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use serde_json::Value;

fn henon(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_henon"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn henon")
}

fn json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn rows(doc: &Value) -> &Vec<Value> {
    doc["rows"].as_array().unwrap()
}

#[test]
fn rspe_writes_exact_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let out = henon(dir.path(), &["rspe", "--orders", "4", "--out-dir", "o"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(dir.path().join("o/rspe.json"));
    assert_eq!(doc["beta_coeffs"][2], "-1/18");
    assert_eq!(doc["run_config"]["orders"], 4);
    assert!(doc["build"].as_str().unwrap().starts_with("0.1.0+"));

    let csv = fs::read_to_string(dir.path().join("o/rspe.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# build: "));
    assert!(lines.next().unwrap().starts_with("# run_config: {\"command\":\"rspe\""));
    assert!(csv.contains("beta,2,-1/18,"));
}

#[test]
fn rspe_zero_orders_and_negative_orders() {
    let dir = tempfile::tempdir().unwrap();
    let out = henon(dir.path(), &["rspe", "--orders", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(dir.path().join("henon-out/rspe.json"));
    assert_eq!(doc["beta_coeffs"], serde_json::json!(["2/1"]));

    let out = henon(dir.path(), &["rspe", "--orders", "-1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn resonance_rows_and_coupling_symmetry() {
    let dir = tempfile::tempdir().unwrap();
    let out = henon(
        dir.path(),
        &["resonance", "--beta", "0", "--beta", "0.1", "--beta", "-0.1", "--tol", "1e-8"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(dir.path().join("henon-out/resonance.json"));
    let r = rows(&doc);
    let f = |i: usize, k: &str| r[i][k].as_f64().unwrap();
    assert!((f(0, "re_E") - 2.0).abs() < 1e-10 && f(0, "im_E").abs() < 1e-10);
    assert!((f(1, "re_E") - (2.0 - 0.01 / 18.0)).abs() < 1e-5);
    assert!((f(1, "re_E") - f(2, "re_E")).abs() < 1e-10);
    assert!(f(1, "im_E") * f(2, "im_E") <= 0.0);
    let csv = fs::read_to_string(dir.path().join("henon-out/resonance.csv")).unwrap();
    assert!(csv.lines().nth(2).unwrap().starts_with("beta,re_E,im_E,"));
}

#[test]
fn resum_constant_series_and_missing_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("const.json"), "[\"3/2\"]").unwrap();
    for q in ["1/2", "1"] {
        let out = henon(
            dir.path(),
            &["resum", "--coeffs", "const.json", "--q", q, "--beta", "0.05", "--beta", "0.3"],
        );
        assert_eq!(out.status.code(), Some(0));
        let doc = json(dir.path().join("henon-out/resum.json"));
        for row in rows(&doc) {
            assert!((row["f"].as_f64().unwrap() - 1.5).abs() < 1e-12);
        }
    }

    let out = henon(dir.path(), &["resum", "--coeffs", "nowhere.json", "--beta", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere.json"));
}

#[test]
fn resum_matches_resonance() {
    let dir = tempfile::tempdir().unwrap();
    assert!(henon(dir.path(), &["rspe", "--orders", "40", "--out-dir", "s"]).status.success());
    let out = henon(dir.path(), &["resum", "--coeffs", "s/rspe.json", "--beta", "0.2", "--out-dir", "r"]);
    assert!(out.status.success());
    let out = henon(dir.path(), &["resonance", "--beta", "0.2", "--out-dir", "e"]);
    assert!(out.status.success());
    let f = rows(&json(dir.path().join("r/resum.json")))[0]["f"].as_f64().unwrap();
    let e = rows(&json(dir.path().join("e/resonance.json")))[0]["re_E"].as_f64().unwrap();
    assert!((f - e).abs() < 1e-4);
    let poles = json(dir.path().join("r/poles.json"));
    assert!(poles["poles"].as_array().unwrap().iter().any(|p| p["on_path"] == true));
}

#[test]
fn config_file_round_trips_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    assert!(henon(dir.path(), &["rspe", "--orders", "3", "--out-dir", "a"]).status.success());
    let out = henon(dir.path(), &["--config", "a/rspe.config.json", "rspe", "--out-dir", "b"]);
    assert!(out.status.success());
    let a = json(dir.path().join("a/rspe.json"));
    let b = json(dir.path().join("b/rspe.json"));
    assert_eq!(a["beta_coeffs"], b["beta_coeffs"]);
    assert_eq!(b["run_config"]["orders"], 3);
    assert_eq!(b["run_config"]["out_dir"], "b");

    fs::write(dir.path().join("bad.json"), "{\"orders\": 2, \"colour\": 1}").unwrap();
    assert_eq!(henon(dir.path(), &["--config", "bad.json", "rspe"]).status.code(), Some(2));
    fs::write(dir.path().join("neg.json"), "{\"orders\": -1}").unwrap();
    assert_eq!(henon(dir.path(), &["--config", "neg.json", "rspe"]).status.code(), Some(2));
    assert_eq!(
        henon(dir.path(), &["--config", "a/rspe.config.json", "verify"]).status.code(),
        Some(2)
    );
    fs::write(dir.path().join("tol.json"), "{\"beta\": [0.1], \"tol\": 0}").unwrap();
    assert_eq!(henon(dir.path(), &["--config", "tol.json", "resonance"]).status.code(), Some(2));
}

#[test]
fn thread_variable_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let run = |v: &str| {
        Command::new(env!("CARGO_BIN_EXE_henon"))
            .current_dir(dir.path())
            .env("HENON_THREADS", v)
            .args(["rspe", "--orders", "2"])
            .output()
            .unwrap()
            .status
            .code()
    };
    assert_eq!(run("2"), Some(0));
    assert_eq!(run("0"), Some(2));
    assert_eq!(run("many"), Some(2));
}

#[test]
fn quick_suite_report_and_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let out = henon(dir.path(), &["verify", "--suite", "quick"]);
    assert!(start.elapsed().as_secs_f64() < 60.0);
    let report = json(dir.path().join("henon-out/verify.json"));
    let all = report["all_passed"].as_bool().unwrap();
    assert_eq!(out.status.code(), Some(if all { 0 } else { 1 }));
    for c in report["checks"].as_array().unwrap() {
        assert!(c["tolerance"].is_number());
        assert!(!c["expectation"].as_str().unwrap().is_empty());
    }
    assert!(report["environment"]["version"].is_string());
    assert_eq!(report["run_config"]["suite"], "quick");
}

#[test]
fn mutated_series_fails_sign_and_cross_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out = henon(dir.path(), &["verify", "--suite", "quick", "--mutate-a2"]);
    assert_eq!(out.status.code(), Some(1));
    let report = json(dir.path().join("henon-out/verify.json"));
    let passed = |name: &str| {
        report["checks"]
            .as_array()
            .unwrap()
            .iter()
            .find(|c| c["name"] == name)
            .unwrap()["passed"]
            .as_bool()
            .unwrap()
    };
    assert!(!passed("constant_signs"));
    assert!(!passed("sum_matches_resonance"));
    assert!(passed("kernel_normalization"));
}
