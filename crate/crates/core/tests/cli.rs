use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(command: &str, config: &str, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_interpol-lab"))
        .arg(command)
        .arg("--config")
        .arg(fixture(config))
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs")
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

#[test]
fn every_command_passes_on_its_fixture() {
    let cases = [
        ("kfun", "kfun.toml"),
        ("norm", "norm.toml"),
        ("sweep", "shear_sweep.toml"),
        ("cancel", "cancel.toml"),
        ("distance", "distance.toml"),
        ("solve-analytic", "solve_analytic.toml"),
        ("lattice-sweep", "lattice_sweep.toml"),
        ("spectrum", "spectrum.toml"),
        ("verify-all", "verify_small.toml"),
    ];
    let dir = tempfile::tempdir().unwrap();
    for (command, config) in cases {
        let out = dir.path().join(command);
        let o = run(command, config, &out, &[]);
        assert_eq!(o.status.code(), Some(0), "{command}: {}", String::from_utf8_lossy(&o.stderr));
        let r = report(&out);
        assert_eq!(r["command"], command);
        assert_eq!(r["passed"], true);
        assert!(r["timestamp"].is_string());
    }
}

#[test]
fn identity_sweep_is_one_interval_with_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("sweep", "identity_sweep.toml", dir.path(), &["--emit-plot-data"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(report(dir.path())["results"]["intervals"], serde_json::json!([[0.0, 1.0]]));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("theta,inv_norm_lower,inv_norm_upper,invertible"));
    assert_eq!(lines.count(), 99);
}

#[test]
fn kfun_csv_columns_and_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("kfun", "kfun.toml", dir.path(), &["--emit-plot-data"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("kfun_1.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,K_lower,K_upper"));
    // Weighted l1 against weighted l_inf at t = 1e-3: only the x_1 part is cheap,
    // K = t‖x‖_1 = 1e-3 · max(0.5·0.3, 4·0.7).
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((first[1] - 2.8e-3).abs() < 1e-15 && (first[2] - 2.8e-3).abs() < 1e-15, "{first:?}");
}

#[test]
fn zero_weight_is_an_input_error_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("sweep", "bad_weight.toml", dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("couple.w0[1]"));
    assert!(!dir.path().join("report.json").exists());
}

#[test]
fn failed_verdict_exits_one_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("distance", "distance_strict.toml", dir.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
    let r = report(dir.path());
    assert_eq!(r["passed"], false);
    assert!(r["verdicts"][0]["witness"].is_object());
}

#[test]
fn missed_precision_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("norm", "norm.toml", dir.path(), &["--tol", "1e-30"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn seed_override_is_echoed_and_reports_repeat() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run("cancel", "cancel.toml", &a, &["--seed", "9"]);
    run("cancel", "cancel.toml", &b, &["--seed", "9"]);
    let (mut ra, mut rb) = (report(&a), report(&b));
    assert_eq!(ra["seed"], 9);
    ra["timestamp"] = Value::Null;
    rb["timestamp"] = Value::Null;
    assert_eq!(ra, rb);
}

#[test]
fn thread_cap_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_interpol-lab"))
        .args(["verify-all", "--config"])
        .arg(fixture("verify_small.toml"))
        .arg("--out")
        .arg(dir.path())
        .env("INTERPOL_LAB_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}
