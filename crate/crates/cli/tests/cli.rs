//! End-to-end tests of the scenario runner: exit-code contract, report
//! determinism, and plot-data emission.

use assert_cmd::Command;
use predicates::prelude::*;

fn write(dir: &tempfile::TempDir, name: &str, contents: &str) -> std::path::PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

fn nullinf() -> Command {
    Command::cargo_bin("nullinf").unwrap()
}

const EMPTY: &str = r#"{"version": 1, "checks": []}"#;

/// 2-in/2-out event, a sech pulse, an IR-singular step, and quantized
/// celestial data (c₀₀ = ±√4π gives Q = ±1).
const FULL: &str = r#"{
  "version": 1,
  "order": 12,
  "seed": 7,
  "events": {
    "ev": {
      "incoming": [
        {"charge": 1.0, "beta": [0.3, 0.0, 0.1]},
        {"charge": -1.0, "beta": [-0.2, 0.4, 0.0]}
      ],
      "outgoing": [
        {"charge": 1.0, "beta": [0.0, -0.3, 0.5]},
        {"charge": -1.0, "beta": [0.1, 0.2, -0.4]}
      ]
    }
  },
  "profiles": {
    "pulse": {"family": "sech", "amplitude": [0.4, 0.1, 0.0], "width": 1.0},
    "kick": {"family": "step", "amplitude": [0.2, 0.0, 0.3], "width": 1.0}
  },
  "star_data": {
    "s1": {"d": [[1, 0, 0.3]], "c": [[0, 0, 3.5449077018110318], [1, -1, 0.4]], "e": 1.0},
    "s2": {"d": [[1, 1, -0.2]], "c": [[1, 0, 0.5]], "e": 1.0},
    "s3": {"d": [[2, 2, 0.25]], "c": [[0, 0, -3.5449077018110318]], "e": 1.0}
  },
  "checks": [
    {"check": "gauss_constraint", "event": "ev", "samples": 500, "tolerance": 1e-12},
    {"check": "matching_verify", "event": "ev", "profile": "pulse", "tolerance": 1e-8},
    {"check": "ir_scan", "profile": "kick", "tolerance": 0.05},
    {"check": "charge_round_trip", "star": "s1", "beta": [0.2, 0.0, 0.3], "tolerance": 1e-6},
    {"check": "weyl_cocycle", "stars": ["s1", "s2", "s3"], "tolerance": 1e-10},
    {"check": "casimir_value", "z": 0.25, "expected_value": 0.4375, "expected_nu": 0.5, "tolerance": 1e-12}
  ]
}"#;

#[test]
fn empty_check_list_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(&dir, "s.json", EMPTY);
    let report = dir.path().join("r.json");
    nullinf()
        .args(["run"])
        .arg(&scenario)
        .arg("--report")
        .arg(&report)
        .assert()
        .success();
    let rep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(rep["rows"].as_array().unwrap().len(), 0);
}

#[test]
fn full_scenario_passes_with_every_row_present() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(&dir, "s.json", FULL);
    let report = dir.path().join("r.json");
    nullinf()
        .args(["run"])
        .arg(&scenario)
        .arg("--report")
        .arg(&report)
        .assert()
        .success()
        .stdout(predicate::str::contains("PASS matching_verify"));
    let rep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let rows = rep["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    for row in rows {
        assert!(row["pass"].as_bool().unwrap(), "failing row: {row}");
        assert!(row["residual"].as_f64().unwrap() < row["tolerance"].as_f64().unwrap());
    }
}

#[test]
fn malformed_json_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(&dir, "s.json", "{\"version\": 1, \"checks\": [");
    nullinf()
        .args(["run"])
        .arg(&scenario)
        .assert()
        .code(2)
        .stderr(predicate::str::contains("parsing"));
}

#[test]
fn undefined_profile_reference_exits_two_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(
        &dir,
        "s.json",
        r#"{"version": 1, "checks": [{"check": "ir_scan", "profile": "nope", "tolerance": 0.05}]}"#,
    );
    nullinf()
        .args(["run"])
        .arg(&scenario)
        .assert()
        .code(2)
        .stderr(predicate::str::contains("checks[0]").and(predicate::str::contains("nope")));
}

#[test]
fn failing_tolerance_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(
        &dir,
        "s.json",
        r#"{
          "version": 1,
          "profiles": {"kick": {"family": "step", "amplitude": [0.2, 0.0, 0.3], "width": 1.0}},
          "checks": [{"check": "ir_scan", "profile": "kick", "tolerance": 1e-12}]
        }"#,
    );
    nullinf()
        .args(["run"])
        .arg(&scenario)
        .assert()
        .code(1)
        .stdout(predicate::str::contains("FAIL ir_scan"));
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(&dir, "s.json", FULL);
    let (r1, r2) = (dir.path().join("r1.json"), dir.path().join("r2.json"));
    for r in [&r1, &r2] {
        nullinf()
            .args(["run"])
            .arg(&scenario)
            .arg("--report")
            .arg(r)
            .assert()
            .success();
    }
    assert_eq!(std::fs::read(&r1).unwrap(), std::fs::read(&r2).unwrap());
}

#[test]
fn plot_emission_and_selection() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(&dir, "s.json", FULL);
    let report = dir.path().join("r.json");
    let plots = dir.path().join("plots");
    nullinf()
        .args(["run"])
        .arg(&scenario)
        .arg("--report")
        .arg(&report)
        .arg("--plot-dir")
        .arg(&plots)
        .assert()
        .success();
    let dat = std::fs::read_to_string(plots.join("ir_scan.dat")).unwrap();
    assert!(dat.starts_with("# series: ir_scan\n# ln_inv_omega_min value\n"));
    assert!(dat.lines().count() > 5);
    // selection through the plot subcommand matches the emitted file
    nullinf()
        .args(["plot"])
        .arg(&report)
        .arg("ir_scan")
        .assert()
        .success()
        .stdout(predicate::eq(dat));
    // unknown selection lists what exists
    nullinf()
        .args(["plot"])
        .arg(&report)
        .arg("mystery")
        .assert()
        .code(2)
        .stderr(predicate::str::contains("available: ir_scan"));
}
