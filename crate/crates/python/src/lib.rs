//! Python bindings: couples, operators, the annulus toolkit and the check suites.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use interpol_lab::ckmr::{self, AnnulusPoint, LaurentElement, PseudolatticeCouple};
use interpol_lab::functors::{real_norm, FamilyKind, FunctorSpec, QuadratureConfig};
use interpol_lab::kfunctional::k_functional;
use interpol_lab::operators::{matrix_from_rows, CoupleOperator};
use interpol_lab::spaces::{BanachCouple, Exponent, WeightedSpace};
use interpol_lab::stability;
use interpol_lab::verify::{self, VerifyOptions};
use interpol_lab::LabError;

create_exception!(pyinterpol, SolverError, PyException, "A solver missed its precision target.");

fn to_py(e: LabError) -> PyErr {
    match e {
        LabError::Solver { .. } | LabError::Precision { .. } | LabError::Numeric(_) => SolverError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for interpol_lab::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

/// Accepts a number (including `float('inf')`) or the string `"inf"`.
fn exponent(p: &Bound<'_, PyAny>) -> PyResult<Exponent> {
    if let Ok(v) = p.extract::<f64>() {
        return Exponent::new(v).py();
    }
    let s: String = p.extract()?;
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" => Ok(Exponent::Infinite),
        other => Exponent::new(other.parse().map_err(|_| PyValueError::new_err(format!("invalid exponent '{s}'")))?).py(),
    }
}

fn family(method: &str, q: Option<&Bound<'_, PyAny>>) -> PyResult<FamilyKind> {
    match (method, q) {
        ("calderon", _) => Ok(FamilyKind::Calderon),
        ("real", Some(q)) => Ok(FamilyKind::Real { q: exponent(q)? }),
        ("real", None) => Err(PyValueError::new_err("the real method needs q")),
        (other, _) => Err(PyValueError::new_err(format!("unknown method '{other}', expected 'real' or 'calderon'"))),
    }
}

fn annulus(s: Complex64) -> PyResult<AnnulusPoint> {
    AnnulusPoint::new(s).py()
}

/// Serializes through JSON into plain Python objects.
fn to_object<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// A couple of weighted `ℓ_p` spaces on `C^n`.
#[pyclass(frozen, module = "pyinterpol")]
pub struct Couple {
    inner: BanachCouple,
}

#[pymethods]
impl Couple {
    #[new]
    fn new(p0: &Bound<'_, PyAny>, p1: &Bound<'_, PyAny>, w0: Vec<f64>, w1: Vec<f64>) -> PyResult<Self> {
        let inner = BanachCouple::new(WeightedSpace::new(exponent(p0)?, w0).py()?, WeightedSpace::new(exponent(p1)?, w1).py()?).py()?;
        Ok(Couple { inner })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// `(lower, upper)` bracket for `K(t, x)`.
    #[pyo3(signature = (t, x, tol = 1e-10))]
    fn k_functional(&self, t: f64, x: Vec<Complex64>, tol: f64) -> PyResult<(f64, f64)> {
        let k = k_functional(t, &x, &self.inner, tol).py()?;
        Ok((k.lower(), k.upper()))
    }

    /// `(lower, upper)` bracket for the real-method norm `‖x‖_{θ,q}`.
    fn real_norm(&self, x: Vec<Complex64>, theta: f64, q: &Bound<'_, PyAny>) -> PyResult<(f64, f64)> {
        let b = real_norm(&x, &self.inner, theta, exponent(q)?, &QuadratureConfig::default()).py()?;
        Ok((b.lower, b.upper))
    }

    /// Norm in the complex (Calderón) space at `θ`; exact.
    fn calderon_norm(&self, x: Vec<Complex64>, theta: f64) -> PyResult<f64> {
        Ok(FunctorSpec::new(FamilyKind::Calderon.at(theta)).norm(&x, &self.inner).py()?.upper)
    }

    /// `j` norm of the Laurent element with coefficients starting at index `lo`.
    #[pyo3(signature = (coeffs, lo, q0 = None, q1 = None))]
    fn j_norm(&self, coeffs: Vec<Vec<Complex64>>, lo: i64, q0: Option<&Bound<'_, PyAny>>, q1: Option<&Bound<'_, PyAny>>) -> PyResult<f64> {
        let q = |v: Option<&Bound<'_, PyAny>>| v.map_or(Ok(Exponent::Infinite), exponent);
        let p = PseudolatticeCouple::new(q(q0)?, q(q1)?);
        ckmr::j_norm(&LaurentElement::new(lo, coeffs).py()?, &p, &self.inner).py()
    }

    fn __repr__(&self) -> String {
        let (a, b) = (&self.inner.space0, &self.inner.space1);
        format!("Couple(p0={}, p1={}, w0={:?}, w1={:?})", a.p, b.p, a.weights, b.weights)
    }
}

/// A matrix acting between two couples.
#[pyclass(frozen, module = "pyinterpol")]
pub struct Operator {
    inner: CoupleOperator,
}

#[pymethods]
impl Operator {
    /// `matrix` is a list of rows of (complex) numbers; `codomain` defaults to `domain`.
    #[new]
    #[pyo3(signature = (matrix, domain, codomain = None))]
    fn new(matrix: Vec<Vec<Complex64>>, domain: &Couple, codomain: Option<&Couple>) -> PyResult<Self> {
        let m = matrix_from_rows(&matrix).py()?;
        let codomain = codomain.unwrap_or(domain).inner.clone();
        Ok(Operator {
            inner: CoupleOperator::new(m, domain.inner.clone(), codomain).py()?,
        })
    }

    /// `(lower, upper)` bracket for `‖T‖` on the interpolation spaces at `θ`.
    #[pyo3(signature = (theta, method = "calderon", q = None))]
    fn norm(&self, theta: f64, method: &str, q: Option<&Bound<'_, PyAny>>) -> PyResult<(f64, f64)> {
        let b = self.inner.interpolated_norm(family(method, q)?.at(theta)).py()?.bracket;
        Ok((b.lower, b.upper))
    }

    /// `(lower, upper)` bracket for `‖T^{-1}‖` at `θ`.
    #[pyo3(signature = (theta, method = "calderon", q = None))]
    fn inverse_norm(&self, theta: f64, method: &str, q: Option<&Bound<'_, PyAny>>) -> PyResult<(f64, f64)> {
        let b = self.inner.interpolated_inverse_norm(family(method, q)?.at(theta)).py()?.bracket;
        Ok((b.lower, b.upper))
    }

    fn spectrum(&self) -> PyResult<Vec<Complex64>> {
        self.inner.spectrum().py()
    }

    /// Invertibility sweep over `thetas`; returns the report as a dict.
    #[pyo3(signature = (thetas, method = "calderon", q = None, slack = 1e-6))]
    fn sweep(&self, py: Python<'_>, thetas: Vec<f64>, method: &str, q: Option<&Bound<'_, PyAny>>, slack: f64) -> PyResult<Py<PyAny>> {
        let report = stability::sweep(&self.inner, family(method, q)?, &thetas, slack).py()?;
        to_object(py, &report)
    }
}

/// `δ(s)` for a point of the annulus `1 < |s| < e`.
#[pyfunction]
fn delta_constant(s: Complex64) -> PyResult<f64> {
    Ok(ckmr::delta_constant(&annulus(s)?))
}

/// Divides a Laurent element with `f(s) = 0` by `z − s`; returns `(lo, coeffs)`.
#[pyfunction]
fn cancel_divide(coeffs: Vec<Vec<Complex64>>, lo: i64, s: Complex64) -> PyResult<(i64, Vec<Vec<Complex64>>)> {
    let g = ckmr::cancel_divide(&LaurentElement::new(lo, coeffs).py()?, &annulus(s)?).py()?;
    Ok((g.lo(), g.coeffs().to_vec()))
}

/// Names of the acceptance criteria, in order.
#[pyfunction]
fn criteria() -> Vec<&'static str> {
    verify::CRITERIA.iter().map(|(n, _)| *n).collect()
}

/// Runs one named criterion and returns its report as a dict.
#[pyfunction]
#[pyo3(signature = (name, seed = 42, scale = 1.0))]
fn run_criterion(py: Python<'_>, name: &str, seed: u64, scale: f64) -> PyResult<Py<PyAny>> {
    let (_, check) = verify::CRITERIA
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown criterion '{name}'")))?;
    let opts = VerifyOptions { seed, scale };
    let report = py.detach(|| check(&opts)).py()?;
    to_object(py, &report)
}

/// Runs the command-line tool in-process; returns its exit code.
#[pyfunction]
fn run_cli(py: Python<'_>, args: Vec<String>) -> i32 {
    let argv: Vec<String> = std::iter::once("interpol-lab".to_string()).chain(args).collect();
    py.detach(|| interpol_lab::cli::main_with_args(argv))
}

#[pymodule]
fn pyinterpol(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Couple>()?;
    m.add_class::<Operator>()?;
    m.add_function(wrap_pyfunction!(delta_constant, m)?)?;
    m.add_function(wrap_pyfunction!(cancel_divide, m)?)?;
    m.add_function(wrap_pyfunction!(criteria, m)?)?;
    m.add_function(wrap_pyfunction!(run_criterion, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    m.add("SolverError", m.py().get_type::<SolverError>())?;
    Ok(())
}
