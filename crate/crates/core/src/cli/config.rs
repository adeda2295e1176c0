//! Problem files: TOML, validated field by field before any computation.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ckmr::{AnnulusPoint, PseudolatticeCouple};
use crate::functors::{FamilyKind, QuadratureConfig};
use crate::operators::{matrix_from_rows, Matrix};
use crate::spaces::{BanachCouple, Exponent, WeightedSpace};

/// A configuration problem, reported with the offending field path.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            path: path.into(),
            message: message.into(),
        }
    }
}

type ConfigResult<T> = std::result::Result<T, ConfigError>;

/// A matrix or vector entry: a real number or an `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    pub fn value(self) -> Complex64 {
        match self {
            Entry::Real(re) => Complex64::new(re, 0.0),
            Entry::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

fn entries(v: &[Entry]) -> Vec<Complex64> {
    v.iter().map(|e| e.value()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoupleSpec {
    pub p0: Exponent,
    pub p1: Exponent,
    pub w0: Vec<f64>,
    pub w1: Vec<f64>,
}

impl CoupleSpec {
    fn build(&self, path: &str) -> ConfigResult<BanachCouple> {
        for (name, w) in [("w0", &self.w0), ("w1", &self.w1)] {
            if w.is_empty() {
                return Err(ConfigError::new(format!("{path}.{name}"), "weight vector is empty"));
            }
            for (i, v) in w.iter().enumerate() {
                if !(v.is_finite() && *v > 0.0) {
                    return Err(ConfigError::new(
                        format!("{path}.{name}[{i}]"),
                        format!("weights must be positive and finite, got {v}"),
                    ));
                }
            }
        }
        if self.w0.len() != self.w1.len() {
            return Err(ConfigError::new(
                format!("{path}.w1"),
                format!("length {} differs from w0 length {}", self.w1.len(), self.w0.len()),
            ));
        }
        Ok(BanachCouple {
            space0: WeightedSpace {
                p: self.p0,
                weights: self.w0.clone(),
            },
            space1: WeightedSpace {
                p: self.p1,
                weights: self.w1.clone(),
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    /// Rows of real numbers or `[re, im]` pairs.
    pub matrix: Vec<Vec<Entry>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Real,
    Calderon,
}

/// `start, start + step, …` up to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridSpec {
    fn points(&self, path: &str) -> ConfigResult<Vec<f64>> {
        if !(self.step > 0.0 && self.start.is_finite() && self.stop.is_finite() && self.start <= self.stop) {
            return Err(ConfigError::new(path, "grid needs start <= stop and step > 0"));
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        Ok((0..=n).map(|k| self.start + k as f64 * self.step).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctorConfig {
    pub method: Method,
    /// Required for the real method.
    pub q: Option<Exponent>,
    /// Explicit θ values; alternative to `theta_grid`.
    pub theta: Option<Vec<f64>>,
    pub theta_grid: Option<GridSpec>,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
}

impl FunctorConfig {
    pub fn family(&self) -> ConfigResult<FamilyKind> {
        match (self.method, self.q) {
            (Method::Calderon, _) => Ok(FamilyKind::Calderon),
            (Method::Real, Some(q)) => Ok(FamilyKind::Real { q }),
            (Method::Real, None) => Err(ConfigError::new("functor.q", "the real method needs q")),
        }
    }

    /// Strictly increasing θ values in `(0, 1)`.
    pub fn thetas(&self) -> ConfigResult<Vec<f64>> {
        let grid = match (&self.theta, &self.theta_grid) {
            (Some(t), None) => t.clone(),
            (None, Some(g)) => g.points("functor.theta_grid")?,
            (None, None) => return Err(ConfigError::new("functor", "one of theta or theta_grid is required")),
            (Some(_), Some(_)) => return Err(ConfigError::new("functor.theta_grid", "give either theta or theta_grid, not both")),
        };
        let key = if self.theta.is_some() { "functor.theta" } else { "functor.theta_grid" };
        if grid.is_empty() {
            return Err(ConfigError::new(key, "grid is empty"));
        }
        for (i, th) in grid.iter().enumerate() {
            if !(*th > 0.0 && *th < 1.0) {
                return Err(ConfigError::new(format!("{key}[{i}]"), format!("theta must lie in (0, 1), got {th}")));
            }
            if i > 0 && grid[i - 1] >= *th {
                return Err(ConfigError::new(format!("{key}[{i}]"), "grid must be strictly increasing"));
            }
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KfunSpec {
    /// Explicit `t` values; otherwise a log grid.
    pub t: Option<Vec<f64>>,
    #[serde(default = "default_t_min")]
    pub t_min: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_per_decade")]
    pub points_per_decade: u32,
}

fn default_t_min() -> f64 {
    1e-4
}
fn default_t_max() -> f64 {
    1e4
}
fn default_per_decade() -> u32 {
    8
}

impl Default for KfunSpec {
    fn default() -> Self {
        KfunSpec {
            t: None,
            t_min: default_t_min(),
            t_max: default_t_max(),
            points_per_decade: default_per_decade(),
        }
    }
}

impl KfunSpec {
    pub fn grid(&self) -> ConfigResult<Vec<f64>> {
        if let Some(t) = &self.t {
            for (i, v) in t.iter().enumerate() {
                if !(v.is_finite() && *v > 0.0) {
                    return Err(ConfigError::new(format!("kfun.t[{i}]"), format!("t must be positive, got {v}")));
                }
            }
            return Ok(t.clone());
        }
        if !(self.t_min > 0.0 && self.t_min < self.t_max && self.t_max.is_finite()) {
            return Err(ConfigError::new("kfun.t_min", "need 0 < t_min < t_max"));
        }
        if self.points_per_decade == 0 {
            return Err(ConfigError::new("kfun.points_per_decade", "must be positive"));
        }
        let (a, b) = (self.t_min.log10(), self.t_max.log10());
        let n = ((b - a) * self.points_per_decade as f64).ceil() as usize;
        Ok((0..=n).map(|k| 10f64.powf(a + (b - a) * k as f64 / n.max(1) as f64)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CancelSpec {
    #[serde(default = "default_cancel_samples")]
    pub samples: usize,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_support")]
    pub support: (i64, i64),
    /// Points `s`; defaults to `e^{0.3}`, `e^{0.5}e^{0.4i}`, `1.1`.
    pub s: Option<Vec<Entry>>,
}

fn default_cancel_samples() -> usize {
    1000
}
fn default_dim() -> usize {
    2
}
fn default_support() -> (i64, i64) {
    (-4, 4)
}

impl Default for CancelSpec {
    fn default() -> Self {
        CancelSpec {
            samples: default_cancel_samples(),
            dim: default_dim(),
            support: default_support(),
            s: None,
        }
    }
}

fn annulus_point(e: Entry, path: &str) -> ConfigResult<AnnulusPoint> {
    AnnulusPoint::new(e.value()).map_err(|err| ConfigError::new(path, err.to_string()))
}

fn check_support(support: (i64, i64), path: &str) -> ConfigResult<()> {
    if support.0 > support.1 {
        return Err(ConfigError::new(path, "support must satisfy lo <= hi"));
    }
    Ok(())
}

impl CancelSpec {
    pub fn points(&self) -> ConfigResult<Vec<AnnulusPoint>> {
        check_support(self.support, "cancel.support")?;
        if self.dim == 0 {
            return Err(ConfigError::new("cancel.dim", "must be positive"));
        }
        match &self.s {
            None => Ok(crate::verify::cancellation_points()),
            Some(v) if v.is_empty() => Err(ConfigError::new("cancel.s", "list is empty")),
            Some(v) => v.iter().enumerate().map(|(i, e)| annulus_point(*e, &format!("cancel.s[{i}]"))).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceSpec {
    pub s: Entry,
    pub omega: Entry,
    pub q0: Exponent,
    pub q1: Exponent,
    #[serde(default = "default_distance_samples")]
    pub samples: usize,
    #[serde(default = "default_support")]
    pub support: (i64, i64),
    #[serde(default = "default_slack")]
    pub slack: f64,
}

fn default_distance_samples() -> usize {
    200
}
fn default_slack() -> f64 {
    1e-8
}

impl DistanceSpec {
    pub fn points(&self) -> ConfigResult<(AnnulusPoint, AnnulusPoint)> {
        check_support(self.support, "distance.support")?;
        Ok((annulus_point(self.s, "distance.s")?, annulus_point(self.omega, "distance.omega")?))
    }

    pub fn pseudolattice(&self) -> PseudolatticeCouple {
        PseudolatticeCouple::new(self.q0, self.q1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticSpec {
    pub s: Entry,
    /// Index of the first coefficient of `k`.
    #[serde(default)]
    pub k_lo: i64,
    /// Coefficients `k_{k_lo}, k_{k_lo + 1}, …`, each a vector.
    pub k: Vec<Vec<Entry>>,
    pub targets: Vec<Entry>,
    #[serde(default = "default_max_terms")]
    pub max_terms: usize,
    #[serde(default = "default_residual_tol")]
    pub residual_tol: f64,
    pub c1: Option<f64>,
    pub c: Option<f64>,
    #[serde(default = "default_q")]
    pub q0: Exponent,
    #[serde(default = "default_q")]
    pub q1: Exponent,
}

fn default_max_terms() -> usize {
    30
}
fn default_residual_tol() -> f64 {
    1e-10
}
fn default_q() -> Exponent {
    Exponent::Infinite
}

impl AnalyticSpec {
    pub fn s_point(&self) -> ConfigResult<AnnulusPoint> {
        annulus_point(self.s, "analytic.s")
    }

    pub fn coefficients(&self, dim: usize) -> ConfigResult<Vec<Vec<Complex64>>> {
        if self.k.is_empty() {
            return Err(ConfigError::new("analytic.k", "at least one coefficient is required"));
        }
        self.k
            .iter()
            .enumerate()
            .map(|(i, v)| {
                if v.len() != dim {
                    return Err(ConfigError::new(format!("analytic.k[{i}]"), format!("expected {dim} entries, got {}", v.len())));
                }
                Ok(entries(v))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub theta0: f64,
    #[serde(default = "default_combinations")]
    pub combinations: usize,
    /// Also run the transfer check at this `θ*`.
    pub transfer_theta: Option<f64>,
    #[serde(default)]
    pub transfer_q: Vec<Exponent>,
}

fn default_combinations() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSpec {
    pub re: (f64, f64),
    pub im: (f64, f64),
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_points() -> usize {
    21
}

impl SpectrumSpec {
    pub fn lambdas(&self) -> ConfigResult<Vec<Complex64>> {
        if self.points < 2 {
            return Err(ConfigError::new("spectrum.points", "need at least 2 points per axis"));
        }
        for (name, (a, b)) in [("re", self.re), ("im", self.im)] {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(ConfigError::new(format!("spectrum.{name}"), "range must satisfy lo < hi"));
            }
        }
        let n = self.points;
        let at = |(a, b): (f64, f64), k: usize| a + (b - a) * k as f64 / (n - 1) as f64;
        Ok((0..n)
            .flat_map(|i| (0..n).map(move |j| Complex64::new(at(self.re, i), at(self.im, j))))
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    #[serde(default = "default_scale")]
    pub scale: f64,
}

fn default_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<String>,
    #[serde(default)]
    pub emit_plot_data: bool,
}

/// Every section is optional; commands ask for the ones they need.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub couple: Option<CoupleSpec>,
    /// Defaults to `couple`.
    pub codomain: Option<CoupleSpec>,
    pub operator: Option<OperatorSpec>,
    pub functor: Option<FunctorConfig>,
    /// Verdict names to keep; empty keeps all.
    #[serde(default)]
    pub checks: Vec<String>,
    #[serde(default)]
    pub vectors: Vec<Vec<Entry>>,
    pub kfun: Option<KfunSpec>,
    pub cancel: Option<CancelSpec>,
    pub distance: Option<DistanceSpec>,
    pub analytic: Option<AnalyticSpec>,
    pub lattice: Option<LatticeSpec>,
    pub spectrum: Option<SpectrumSpec>,
    pub verify: Option<VerifySpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ProblemConfig {
    pub fn from_toml(text: &str) -> ConfigResult<Self> {
        let value: toml::Value = toml::from_str(text).map_err(|e| ConfigError::new("<file>", e.to_string().trim().to_string()))?;
        let cfg: ProblemConfig = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            ConfigError::new(if path == "." { "<root>".to_string() } else { path }, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> ConfigResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new(path.display().to_string(), e.to_string()))?;
        Self::from_toml(&text)
    }

    /// Checks that do not depend on the command.
    fn validate(&self) -> ConfigResult<()> {
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(ConfigError::new("tol", format!("must be positive, got {tol}")));
            }
        }
        if let Some(c) = &self.couple {
            c.build("couple")?;
        }
        if let Some(c) = &self.codomain {
            c.build("codomain")?;
        }
        if let Some(f) = &self.functor {
            f.family()?;
            if f.theta.is_some() || f.theta_grid.is_some() {
                f.thetas()?;
            }
            f.quadrature.validate().map_err(|e| ConfigError::new("functor.quadrature", e.to_string()))?;
        }
        if let Some(op) = &self.operator {
            self.matrix_of(op)?;
        }
        if let Some(v) = &self.verify {
            if !(v.scale > 0.0 && v.scale.is_finite()) {
                return Err(ConfigError::new("verify.scale", "must be positive"));
            }
        }
        Ok(())
    }

    fn matrix_of(&self, op: &OperatorSpec) -> ConfigResult<Matrix> {
        if op.matrix.is_empty() {
            return Err(ConfigError::new("operator.matrix", "matrix has no rows"));
        }
        let cols = op.matrix[0].len();
        for (i, row) in op.matrix.iter().enumerate() {
            if row.len() != cols {
                return Err(ConfigError::new(format!("operator.matrix[{i}]"), format!("expected {cols} entries, got {}", row.len())));
            }
        }
        let rows: Vec<Vec<Complex64>> = op.matrix.iter().map(|r| entries(r)).collect();
        matrix_from_rows(&rows).map_err(|e| ConfigError::new("operator.matrix", e.to_string()))
    }

    pub fn couple(&self) -> ConfigResult<BanachCouple> {
        self.couple.as_ref().ok_or_else(|| ConfigError::new("couple", "section is required"))?.build("couple")
    }

    pub fn codomain(&self) -> ConfigResult<BanachCouple> {
        match &self.codomain {
            Some(c) => c.build("codomain"),
            None => self.couple(),
        }
    }

    /// The operator matrix with its shape checked against the couples.
    pub fn matrix(&self, square: bool) -> ConfigResult<Matrix> {
        let op = self.operator.as_ref().ok_or_else(|| ConfigError::new("operator", "section is required"))?;
        let m = self.matrix_of(op)?;
        if square && m.nrows() != m.ncols() {
            return Err(ConfigError::new("operator.matrix", format!("must be square, got {}x{}", m.nrows(), m.ncols())));
        }
        let (dom, cod) = (self.couple()?, self.codomain()?);
        if m.ncols() != dom.dim() {
            return Err(ConfigError::new("operator.matrix", format!("has {} columns but couple has dimension {}", m.ncols(), dom.dim())));
        }
        if m.nrows() != cod.dim() {
            return Err(ConfigError::new("operator.matrix", format!("has {} rows but codomain has dimension {}", m.nrows(), cod.dim())));
        }
        Ok(m)
    }

    pub fn functor(&self) -> ConfigResult<&FunctorConfig> {
        self.functor.as_ref().ok_or_else(|| ConfigError::new("functor", "section is required"))
    }

    /// Input vectors, each checked against `dim`.
    pub fn vectors(&self, dim: usize) -> ConfigResult<Vec<Vec<Complex64>>> {
        if self.vectors.is_empty() {
            return Err(ConfigError::new("vectors", "at least one vector is required"));
        }
        self.vectors
            .iter()
            .enumerate()
            .map(|(i, v)| {
                if v.len() != dim {
                    return Err(ConfigError::new(format!("vectors[{i}]"), format!("expected {dim} entries, got {}", v.len())));
                }
                Ok(entries(v))
            })
            .collect()
    }

    pub fn section<'a, T>(&self, value: &'a Option<T>, name: &str) -> ConfigResult<&'a T> {
        value.as_ref().ok_or_else(|| ConfigError::new(name, "section is required"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
        seed = 7
        [couple]
        p0 = 2
        p1 = "inf"
        w0 = [1.0, 2.0]
        w1 = [1.0, 0.5]
        [operator]
        matrix = [[1.0, [0.0, 1.0]], [0.0, 1.0]]
        [functor]
        method = "real"
        q = 2
        theta_grid = { start = 0.1, stop = 0.9, step = 0.1 }
    "#;

    #[test]
    fn parses_complex_entries_and_grids() {
        let cfg = ProblemConfig::from_toml(BASE).unwrap();
        let m = cfg.matrix(true).unwrap();
        assert_eq!(m[(0, 1)], Complex64::new(0.0, 1.0));
        let th = cfg.functor().unwrap().thetas().unwrap();
        assert_eq!(th.len(), 9);
        assert!((th[8] - 0.9).abs() < 1e-12);
        assert_eq!(cfg.couple().unwrap().space1.p, Exponent::Infinite);
    }

    #[test]
    fn zero_weight_reports_field_path() {
        let err = ProblemConfig::from_toml(&BASE.replace("w0 = [1.0, 2.0]", "w0 = [1.0, 0.0]")).unwrap_err();
        assert_eq!(err.path, "couple.w0[1]");
    }

    #[test]
    fn type_errors_report_field_path() {
        let err = ProblemConfig::from_toml(&BASE.replace("p1 = \"inf\"", "p1 = 0.5")).unwrap_err();
        assert_eq!(err.path, "couple.p1");
        let err = ProblemConfig::from_toml(&BASE.replace("method = \"real\"", "method = \"bogus\"")).unwrap_err();
        assert_eq!(err.path, "functor.method");
    }

    #[test]
    fn ragged_matrix_is_rejected() {
        let err = ProblemConfig::from_toml(&BASE.replace("], [0.0, 1.0]]", "], [0.0]]")).unwrap_err();
        assert_eq!(err.path, "operator.matrix[1]");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ProblemConfig::from_toml(&format!("{BASE}\nbogus = 1\n")).unwrap_err();
        assert!(err.message.contains("bogus"), "{err}");
    }
}
