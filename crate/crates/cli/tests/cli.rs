use std::process::Command;

use defq_cli::{cmd_build, cmd_pair, cmd_verify, Suite, TraceNormalization, U0Convention};
use serde_json::Value;

const FLAT: &str = include_str!("../fixtures/flat_chart.json");
const THETA: &str = include_str!("../fixtures/theta_chart.json");
const BAD: &str = include_str!("../fixtures/bad_chart.json");
const BUMPS: &str = include_str!("../fixtures/bumps.json");
const EQUAL: &str = include_str!("../fixtures/equal_factors.json");

fn rows(csv_text: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(csv_text.as_bytes());
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

fn summary<'a>(table: &'a [Vec<String>], test: &str) -> &'a Vec<String> {
    table.iter().find(|r| r[0] == test).unwrap()
}

#[test]
fn verify_suites_pass_and_list_each_check_once() {
    for suite in [Suite::Moyal, Suite::Cyclic, Suite::Charclass] {
        let out = cmd_verify(suite, 6, 3);
        assert_eq!(out.exit, 0, "{}", out.text);
        let v: Value = serde_json::from_str(&out.text).unwrap();
        let names: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
        let mut unique = names.clone();
        unique.sort();
        unique.dedup();
        assert_eq!(unique.len(), names.len());
        assert_eq!(v["parameters"]["seed"], 3);
    }
}

#[test]
fn build_reports_zero_residuals() {
    let out = cmd_build(FLAT.as_bytes(), 5, None).unwrap();
    assert_eq!(out.exit, 0);
    let v: Value = serde_json::from_str(&out.text).unwrap();
    assert_eq!(v["parameters"]["correction_is_zero"], true);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["status"] == "pass"));

    let out = cmd_build(THETA.as_bytes(), 5, Some(7)).unwrap();
    assert_eq!(out.exit, 0, "{}", out.text);
    let v: Value = serde_json::from_str(&out.text).unwrap();
    assert_eq!(v["parameters"]["J"], 7);
    assert!(v["checks"].as_array().unwrap().iter().any(|c| c["name"] == "curvature_degree_3"));
}

#[test]
fn build_rejects_open_omega() {
    let err = cmd_build(BAD.as_bytes(), 3, None).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("jet order 0"), "{err}");
    assert_eq!(cmd_build(b"{", 3, None).unwrap_err().exit_code(), 2);
}

#[test]
fn pair_fits_linear_order() {
    let out = cmd_pair(BUMPS.as_bytes(), Some(128), 0.1, 3, TraceNormalization::Normalized, U0Convention::Signed).unwrap();
    assert_eq!(out.exit, 0, "{}", out.text);
    let table = rows(&out.text);
    assert_eq!(table.iter().filter(|r| r[0] == "hoved_scaling").count(), 4);
    let order: f64 = summary(&table, "fitted_order")[8].parse().unwrap();
    assert!((order - 1.0).abs() < 0.05);
    assert_eq!(summary(&table, "negative_hbar_powers")[11], "pass");
}

#[test]
fn pair_with_equal_factors_has_vanishing_leading_term() {
    let out = cmd_pair(EQUAL.as_bytes(), None, 0.1, 2, TraceNormalization::Normalized, U0Convention::Signed).unwrap();
    let table = rows(&out.text);
    let first = &table[0];
    let minus_mu: f64 = first[6].parse::<f64>().unwrap().hypot(first[7].parse().unwrap());
    assert!(minus_mu < 1e-12);
    // chi(hbar) / hbar is the same at every hbar: no hbar^0 part
    let slope = |r: &Vec<String>| r[8].parse::<f64>().unwrap() / r[3].parse::<f64>().unwrap();
    assert!((slope(&table[0]) - slope(&table[2])).abs() < 1e-9 * slope(&table[0]));
}

#[test]
fn pair_flags_under_resolved_grids() {
    let out = cmd_pair(BUMPS.as_bytes(), Some(32), 0.1, 3, TraceNormalization::Normalized, U0Convention::Signed).unwrap();
    assert_eq!(out.exit, 3);
    assert_eq!(summary(&rows(&out.text), "spectral_tail")[11], "inconclusive");
}

#[test]
fn pair_with_unsigned_class_fails_the_fit() {
    let out = cmd_pair(BUMPS.as_bytes(), Some(128), 0.1, 3, TraceNormalization::Normalized, U0Convention::Unsigned).unwrap();
    assert_eq!(out.exit, 1);
    assert_eq!(summary(&rows(&out.text), "fitted_order")[11], "fail");
}

#[test]
fn pair_rejects_bad_input() {
    let two = r#"{"L": 10, "G": 32, "K": 1, "N": 1, "bumps": [{"symbol": 1, "center": [0, 0], "width": 1, "matrix": [[1]]}]}"#;
    assert_eq!(cmd_pair(two.as_bytes(), None, 0.1, 1, TraceNormalization::Normalized, U0Convention::Signed).unwrap_err().exit_code(), 2);
    assert!(cmd_pair(BUMPS.as_bytes(), Some(64), -1.0, 1, TraceNormalization::Normalized, U0Convention::Signed).is_err());
}

#[test]
fn binary_writes_reports_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_defq");
    let out = dir.path().join("report.json");
    let status = Command::new(bin).args(["verify", "charclass", "--trials", "3", "--seed", "9", "--out"]).arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let first = std::fs::read(&out).unwrap();
    Command::new(bin).args(["verify", "charclass", "--trials", "3", "--seed", "9", "--out"]).arg(&out).status().unwrap();
    assert_eq!(first, std::fs::read(&out).unwrap());

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, BAD).unwrap();
    let output = Command::new(bin).arg("build").arg(&bad).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("d(omega)"));

    let corpus = dir.path().join("bumps.json");
    std::fs::write(&corpus, BUMPS).unwrap();
    let output = Command::new(bin).arg("pair").arg(&corpus).args(["--grid", "32"]).output().unwrap();
    assert_eq!(output.status.code(), Some(3));
}
