//! Batch front end: `interpol-lab <command> --config <path>`.
//!
//! Exit codes: 0 all verdicts pass, 1 some verdict fails, 2 input or
//! configuration error, 3 a solver missed its precision target.

pub mod config;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::ckmr::{kernel_distance_probe, LaurentElement, ProbeConfig, PseudolatticeCouple};
use crate::error::LabError;
use crate::functors::{real_norm_to_tolerance, FunctorKind, FunctorSpec};
use crate::kfunctional::k_functional;
use crate::lattice::{lattice_transfer_check, order_iso_sweep, ConeSampling};
use crate::operators::CoupleOperator;
use crate::stability::{solve_analytic_equation, sweep, AnalyticSolverConfig};
use crate::verdict::CheckReport;
use crate::verify::{cancellation_batch, verify_all, VerifyOptions, CRITERIA};

pub use config::{ConfigError, ProblemConfig};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_PRECISION: i32 = 3;

/// Environment variable capping the worker threads.
pub const THREADS_VAR: &str = "INTERPOL_LAB_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// K-functional table over a t grid.
    Kfun,
    /// Interpolated norms of the configured vectors.
    Norm,
    /// Invertibility sweep with stability verdicts.
    Sweep,
    /// Cancellation suite on random kernel elements.
    Cancel,
    /// Transport certificate and distance estimate between two points.
    Distance,
    /// Power-series solution of the analytic equation.
    SolveAnalytic,
    /// Order-isomorphism propagation on the positive cone.
    LatticeSweep,
    /// Eigenvalues and resolvent norms on a grid.
    Spectrum,
    /// The full acceptance suite.
    VerifyAll,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Kfun => "kfun",
            Command::Norm => "norm",
            Command::Sweep => "sweep",
            Command::Cancel => "cancel",
            Command::Distance => "distance",
            Command::SolveAnalytic => "solve-analytic",
            Command::LatticeSweep => "lattice-sweep",
            Command::Spectrum => "spectrum",
            Command::VerifyAll => "verify-all",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "interpol-lab", version, about = "Numerical checks for interpolation of finite-dimensional Banach couples")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Problem file (TOML). Optional for verify-all.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for report.json and CSV files.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the seed in the problem file.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write CSV plot data next to the report.
    #[arg(long)]
    pub emit_plot_data: bool,
    /// Overrides the tolerance in the problem file.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error at {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Lab(#[from] LabError),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_INPUT,
            CliError::Lab(e) => match e {
                LabError::Solver { .. } | LabError::Precision { .. } | LabError::Numeric(_) => EXIT_PRECISION,
                LabError::Input(_) | LabError::Dimension { .. } | LabError::NotInvertible { .. } | LabError::Precondition(_) => EXIT_INPUT,
            },
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// A CSV file with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(file: impl Into<String>, header: &[&'static str]) -> Self {
        Table {
            file: file.into(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn write(&self, dir: &Path) -> CliResult<()> {
        let io = |e: csv::Error| CliError::Io(e.to_string());
        let mut w = csv::Writer::from_path(dir.join(&self.file)).map_err(io)?;
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::Io(e.to_string()))
    }
}

/// Result of one command before it is written out.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub verdicts: Vec<CheckReport>,
    pub results: Value,
    pub tables: Vec<Table>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }
}

/// The JSON report. `timestamp` is the only field that varies between
/// identical runs.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Command,
    pub timestamp: String,
    pub seed: u64,
    pub inputs: ProblemConfig,
    pub passed: bool,
    pub verdicts: Vec<CheckReport>,
    pub results: Value,
}

fn fmt(v: f64) -> String {
    format!("{v:e}")
}

fn bracket_json(lower: f64, upper: f64) -> Value {
    json!({"lower": lower, "upper": upper, "exact": lower == upper})
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

/// Keeps only the verdicts named in `checks` (all when empty).
fn select(verdicts: Vec<CheckReport>, checks: &[String]) -> Vec<CheckReport> {
    if checks.is_empty() {
        return verdicts;
    }
    verdicts.into_iter().filter(|v| checks.iter().any(|c| c.eq_ignore_ascii_case(&v.name))).collect()
}

fn seed_of(cfg: &ProblemConfig) -> u64 {
    cfg.seed.unwrap_or(0)
}

fn kfun(cfg: &ProblemConfig, tol: f64) -> CliResult<Outcome> {
    let couple = cfg.couple()?;
    let xs = cfg.vectors(couple.dim())?;
    let grid = cfg.kfun.clone().unwrap_or_default().grid()?;
    let mut tables = Vec::new();
    let mut rows = Vec::new();
    let mut report = CheckReport::new("KFUN");
    for (i, x) in xs.iter().enumerate() {
        let mut table = Table::new(format!("kfun_{i}.csv"), &["t", "K_lower", "K_upper"]);
        let mut values = Vec::new();
        for &t in &grid {
            let k = k_functional(t, x, &couple, tol)?;
            let (lo, up) = (k.lower(), k.upper());
            report.record(up - lo <= tol * up.max(f64::MIN_POSITIVE), || json!({"vector": i, "t": t, "K": bracket_json(lo, up)}));
            table.push(vec![fmt(t), fmt(lo), fmt(up)]);
            values.push(json!({"t": t, "K": bracket_json(lo, up), "method": k.method}));
        }
        tables.push(table);
        rows.push(json!({"vector": i, "values": values}));
    }
    Ok(Outcome {
        verdicts: vec![report],
        results: json!({"tolerance": tol, "vectors": rows}),
        tables,
    })
}

/// With a tolerance, real-method brackets are refined until their relative
/// width meets it, or the command fails with a precision error.
fn norm(cfg: &ProblemConfig, tol: Option<f64>) -> CliResult<Outcome> {
    let couple = cfg.couple()?;
    let xs = cfg.vectors(couple.dim())?;
    let f = cfg.functor()?;
    let family = f.family()?;
    let thetas = f.thetas()?;
    let mut rows = Vec::new();
    let mut report = CheckReport::new("NORM");
    for (i, x) in xs.iter().enumerate() {
        for &theta in &thetas {
            let kind = family.at(theta);
            let b = match (kind, tol) {
                (FunctorKind::Real { q, .. }, Some(rel)) => real_norm_to_tolerance(x, &couple, theta, q, &f.quadrature, rel, 4)?,
                _ => FunctorSpec {
                    kind,
                    quadrature: f.quadrature,
                }
                .norm(x, &couple)?,
            };
            report.record(b.lower <= b.upper && b.upper.is_finite(), || json!({"vector": i, "theta": theta, "norm": b}));
            rows.push(json!({"vector": i, "theta": theta, "norm": b}));
        }
    }
    Ok(Outcome {
        verdicts: vec![report],
        results: json!({"family": family, "norms": rows}),
        tables: Vec::new(),
    })
}

fn operator(cfg: &ProblemConfig, square: bool) -> CliResult<CoupleOperator> {
    let m = cfg.matrix(square)?;
    Ok(CoupleOperator::new(m, cfg.couple()?, cfg.codomain()?)?)
}

fn sweep_cmd(cfg: &ProblemConfig, tol: f64) -> CliResult<Outcome> {
    let t = operator(cfg, true)?;
    let f = cfg.functor()?;
    let rep = sweep(&t, f.family()?, &f.thetas()?, tol)?;
    let mut table = Table::new("sweep.csv", &["theta", "inv_norm_lower", "inv_norm_upper", "invertible"]);
    for p in &rep.points {
        let (lo, up) = p.inverse_norm.map_or((f64::NAN, f64::INFINITY), |b| (b.lower, b.upper));
        table.push(vec![fmt(p.theta), fmt(lo), fmt(up), p.invertible.to_string()]);
    }
    let results = json!({
        "family": rep.family,
        "intervals": rep.intervals,
        "points": rep.points,
    });
    Ok(Outcome {
        verdicts: rep.verdicts,
        results,
        tables: vec![table],
    })
}

fn cancel(cfg: &ProblemConfig) -> CliResult<Outcome> {
    let spec = cfg.cancel.clone().unwrap_or_default();
    let points = spec.points()?;
    let report = cancellation_batch(seed_of(cfg), spec.samples, spec.dim, spec.support, &points)?;
    let s: Vec<Value> = points.iter().map(|p| complex_json(p.value())).collect();
    Ok(Outcome {
        verdicts: vec![report],
        results: json!({"samples": spec.samples, "s": s}),
        tables: Vec::new(),
    })
}

fn distance(cfg: &ProblemConfig, tol: f64) -> CliResult<Outcome> {
    let couple = cfg.couple()?;
    let spec = cfg.section(&cfg.distance, "distance")?;
    let (s, omega) = spec.points()?;
    let probe = ProbeConfig {
        samples: spec.samples,
        seed: seed_of(cfg),
        support: spec.support,
        tol,
        slack: spec.slack,
    };
    let report = kernel_distance_probe(&spec.pseudolattice(), &couple, &s, &omega, &probe)?;
    Ok(Outcome {
        verdicts: vec![report],
        results: json!({"s": complex_json(s.value()), "omega": complex_json(omega.value()), "probe": probe}),
        tables: Vec::new(),
    })
}

fn solve_analytic(cfg: &ProblemConfig) -> CliResult<Outcome> {
    let t = operator(cfg, true)?;
    let spec = cfg.section(&cfg.analytic, "analytic")?;
    let s = spec.s_point()?;
    let k = LaurentElement::new(spec.k_lo, spec.coefficients(t.domain().dim())?)?;
    let solver = AnalyticSolverConfig {
        c1: spec.c1,
        c: spec.c,
        max_terms: spec.max_terms,
        targets: spec.targets.iter().map(|e| e.value()).collect(),
        residual_tol: spec.residual_tol,
        pseudolattice: PseudolatticeCouple::new(spec.q0, spec.q1),
    };
    let out = solve_analytic_equation(&t, &k, &s, &solver)?;
    let mut report = CheckReport::new("CONVERGED");
    for tr in &out.targets {
        report.record(tr.converged, || json!({"omega": complex_json(tr.omega), "residuals": tr.residuals}));
    }
    Ok(Outcome {
        verdicts: vec![report],
        results: serde_json::to_value(&out).map_err(|e| CliError::Io(e.to_string()))?,
        tables: Vec::new(),
    })
}

fn lattice_sweep(cfg: &ProblemConfig) -> CliResult<Outcome> {
    let t = operator(cfg, false)?;
    let f = cfg.functor()?;
    let grid = f.thetas()?;
    let spec = cfg.section(&cfg.lattice, "lattice")?;
    let sampling = ConeSampling {
        combinations: spec.combinations,
        seed: seed_of(cfg),
    };
    let mut verdicts = vec![order_iso_sweep(&t, spec.theta0, &grid, &sampling)?];
    if let Some(theta) = spec.transfer_theta {
        verdicts.push(lattice_transfer_check(&t, theta, &grid, &spec.transfer_q, &sampling)?);
    }
    Ok(Outcome {
        verdicts,
        results: json!({"theta0": spec.theta0, "grid": grid}),
        tables: Vec::new(),
    })
}

fn spectrum(cfg: &ProblemConfig) -> CliResult<Outcome> {
    let t = operator(cfg, true)?;
    let f = cfg.functor()?;
    let family = f.family()?;
    let thetas = f.thetas()?;
    let spec = cfg.section(&cfg.spectrum, "spectrum")?;
    let lambdas = spec.lambdas()?;
    let eig = t.spectrum()?;
    let profile = t.resolvent_profile(&lambdas, &thetas, family)?;
    let mut report = CheckReport::new("RESOLVENT_DISTANCE");
    let mut table = Table::new("resolvent.csv", &["lambda_re", "lambda_im", "theta", "resolvent_lower", "resolvent_upper", "singular"]);
    for p in &profile {
        let lambda = Complex64::new(p.lambda_re, p.lambda_im);
        let dist = eig.iter().map(|z| (z - lambda).norm()).fold(f64::INFINITY, f64::min);
        if let Some(b) = p.bracket {
            report.record(b.lower >= (1.0 / dist) * (1.0 - 1e-9), || json!({"lambda": complex_json(lambda), "theta": p.theta, "bracket": b}));
        }
        let (lo, up) = p.bracket.map_or((f64::INFINITY, f64::INFINITY), |b| (b.lower, b.upper));
        table.push(vec![fmt(p.lambda_re), fmt(p.lambda_im), fmt(p.theta), fmt(lo), fmt(up), p.singular.to_string()]);
    }
    let eigen: Vec<Value> = eig.iter().map(|z| complex_json(*z)).collect();
    Ok(Outcome {
        verdicts: vec![report],
        results: json!({"eigenvalues": eigen, "family": family, "thetas": thetas, "grid_points": lambdas.len()}),
        tables: vec![table],
    })
}

fn verify(cfg: &ProblemConfig) -> CliResult<Outcome> {
    let opts = VerifyOptions {
        seed: cfg.seed.unwrap_or(VerifyOptions::default().seed),
        scale: cfg.verify.map_or(1.0, |v| v.scale),
    };
    let reports = verify_all(&opts)?;
    let names: Vec<&str> = CRITERIA.iter().map(|(n, _)| *n).collect();
    Ok(Outcome {
        verdicts: reports,
        results: json!({"options": opts, "criteria": names}),
        tables: Vec::new(),
    })
}

/// Runs `command` on a parsed configuration.
pub fn execute(command: Command, cfg: &ProblemConfig) -> CliResult<Outcome> {
    let tol = cfg.tol;
    let mut out = match command {
        Command::Kfun => kfun(cfg, tol.unwrap_or(1e-10))?,
        Command::Norm => norm(cfg, tol)?,
        Command::Sweep => sweep_cmd(cfg, tol.unwrap_or(1e-6))?,
        Command::Cancel => cancel(cfg)?,
        Command::Distance => distance(cfg, tol.unwrap_or(1e-6))?,
        Command::SolveAnalytic => solve_analytic(cfg)?,
        Command::LatticeSweep => lattice_sweep(cfg)?,
        Command::Spectrum => spectrum(cfg)?,
        Command::VerifyAll => verify(cfg)?,
    };
    out.verdicts = select(out.verdicts, &cfg.checks);
    Ok(out)
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_VAR).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        // Fails only if a pool already exists, which leaves the earlier setting in place.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Parses, runs and writes the report; returns the report on success.
pub fn run(cli: &Cli) -> CliResult<Report> {
    configure_threads();
    let mut cfg = match &cli.config {
        Some(path) => ProblemConfig::load(path)?,
        None if cli.command == Command::VerifyAll => ProblemConfig::default(),
        None => return Err(ConfigError::new("--config", "a problem file is required for this command").into()),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    }
    if let Some(tol) = cli.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(ConfigError::new("--tol", format!("must be positive, got {tol}")).into());
        }
        cfg.tol = Some(tol);
    }
    if cli.emit_plot_data {
        cfg.output.emit_plot_data = true;
    }
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));

    let outcome = execute(cli.command, &cfg)?;
    let report = Report {
        tool: "interpol-lab",
        version: env!("CARGO_PKG_VERSION"),
        command: cli.command,
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        seed: seed_of(&cfg),
        passed: outcome.passed(),
        inputs: cfg.clone(),
        verdicts: outcome.verdicts,
        results: outcome.results,
    };
    fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
    fs::write(dir.join("report.json"), text + "\n").map_err(|e| CliError::Io(e.to_string()))?;
    if cfg.output.emit_plot_data {
        for table in &outcome.tables {
            table.write(&dir)?;
        }
    }
    Ok(report)
}

/// Entry point for the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
        }
    };
    match run(&cli) {
        Ok(report) => {
            for v in &report.verdicts {
                println!("{} {} ({} cases, {} failures)", if v.passed { "PASS" } else { "FAIL" }, v.name, v.cases, v.failures);
            }
            if report.passed {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
