//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always reach the output.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use interpol_lab::verdict::CheckReport;
use interpol_lab::verify::{self, VerifyOptions};

const SEED: u64 = 42;

struct Line {
    id: usize,
    name: &'static str,
    passed: bool,
    detail: String,
}

fn from_report(id: usize, name: &'static str, r: interpol_lab::Result<CheckReport>) -> Line {
    match r {
        Ok(r) => {
            let mut detail = format!("{} cases, {} failures", r.cases, r.failures);
            if let Some(w) = &r.witness {
                detail.push_str(&format!("; first failure {w}"));
            }
            Line {
                id,
                name,
                passed: r.passed,
                detail,
            }
        }
        Err(e) => Line {
            id,
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Runs the binary and returns its exit code.
fn run_cli(args: &[&str], out: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_interpol-lab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
        .status
        .code()
        .unwrap_or(-1)
}

fn without_timestamp(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap_or_default()
        .lines()
        .filter(|l| !l.trim_start().starts_with("\"timestamp\""))
        .collect::<Vec<_>>()
        .join("\n")
}

fn cli_determinism_and_exit_codes() -> Line {
    let dir = tempfile::tempdir().expect("temp dir");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let seed = SEED.to_string();
    let code_a = run_cli(&["verify-all", "--seed", &seed], &a);
    let code_b = run_cli(&["verify-all", "--seed", &seed], &b);
    let (ra, rb) = (without_timestamp(&a.join("report.json")), without_timestamp(&b.join("report.json")));
    let identical = !ra.is_empty() && ra == rb;

    let exit_cases = [
        (vec!["sweep", "--config"], "identity_sweep.toml", 0),
        (vec!["distance", "--config"], "distance_strict.toml", 1),
        (vec!["sweep", "--config"], "bad_weight.toml", 2),
        (vec!["norm", "--tol", "1e-30", "--config"], "norm.toml", 3),
    ];
    let mut codes = Vec::new();
    for (i, (args, file, expected)) in exit_cases.iter().enumerate() {
        let path = fixture(file);
        let mut full: Vec<&str> = args.clone();
        full.push(path.to_str().unwrap());
        let got = run_cli(&full, &dir.path().join(format!("exit{i}")));
        codes.push((*file, *expected, got));
    }
    let codes_ok = code_a == 0 && code_b == 0 && codes.iter().all(|(_, e, g)| e == g);
    Line {
        id: 12,
        name: "cli-determinism",
        passed: identical && codes_ok,
        detail: format!(
            "verify-all exits ({code_a}, {code_b}), reports identical modulo timestamp: {identical}; exit codes {:?}",
            codes.iter().map(|(f, e, g)| format!("{f}: expected {e} got {g}")).collect::<Vec<_>>()
        ),
    }
}

fn main() {
    let opts = VerifyOptions { seed: SEED, scale: 1.0 };
    let mut lines = Vec::new();
    for (i, (name, check)) in verify::CRITERIA.iter().enumerate() {
        let start = Instant::now();
        let mut line = from_report(i + 1, name, check(&opts));
        line.detail.push_str(&format!(" [{:.1}s]", start.elapsed().as_secs_f64()));
        lines.push(line);
    }
    lines.push(cli_determinism_and_exit_codes());

    println!();
    for l in &lines {
        println!("{} {:>2} {:<18} {}", if l.passed { "PASS" } else { "FAIL" }, l.id, l.name, l.detail);
    }
    let failed = lines.iter().filter(|l| !l.passed).count();
    println!("\nacceptance: {} passed, {} failed\n", lines.len() - failed, failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
