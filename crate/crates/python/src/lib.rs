//! Python bindings: a `SpdMatrix` class plus the means, the divergence, the
//! barycenter solver and the verification suites as module functions.
//!
//! Matrices cross the boundary as nested lists of `complex` (or `float`)
//! in row-major order.

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use spectral_means::barycenter::{self, BarycenterProblem, SolverConfig, WeightVector};
use spectral_means::divergence;
use spectral_means::means::{MeanKind, MeanParams};
use spectral_means::suite::{run_suite, SuiteConfig, SuiteKind};
use spectral_means::{Complex64, Error, HermitianMatrix};

/// Hermiticity tolerance applied to matrices built from Python lists.
const HERMITIAN_TOL: f64 = 1e-12;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::IllConditioned { .. }
        | Error::ConvergenceFailure { .. }
        | Error::NegativityViolation { .. }
        | Error::QuadratureNotConverged { .. } => PyArithmeticError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn rows_of(h: &HermitianMatrix) -> Vec<Vec<Complex64>> {
    let n = h.dim();
    (0..n).map(|i| (0..n).map(|j| h.entry(i, j)).collect()).collect()
}

fn hermitian_from_rows(rows: Vec<Vec<Complex64>>) -> PyResult<HermitianMatrix> {
    let n = rows.len();
    if let Some(r) = rows.iter().find(|r| r.len() != n) {
        return Err(PyValueError::new_err(format!("expected {n} columns per row, got {}", r.len())));
    }
    let entries: Vec<Complex64> = rows.into_iter().flatten().collect();
    HermitianMatrix::from_entries(n, &entries, HERMITIAN_TOL).map_err(to_py)
}

/// A Hermitian positive definite matrix.
#[pyclass(frozen, from_py_object, name = "SpdMatrix", module = "spectral_means_py")]
#[derive(Clone)]
pub struct SpdMatrix {
    inner: spectral_means::SpdMatrix,
}

impl From<spectral_means::SpdMatrix> for SpdMatrix {
    fn from(inner: spectral_means::SpdMatrix) -> Self {
        Self { inner }
    }
}

#[pymethods]
impl SpdMatrix {
    #[new]
    fn new(rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        let h = hermitian_from_rows(rows)?;
        spectral_means::SpdMatrix::new(h).map(Self::from).map_err(to_py)
    }

    #[staticmethod]
    fn diag(values: Vec<f64>) -> PyResult<Self> {
        spectral_means::SpdMatrix::diag(&values).map(Self::from).map_err(to_py)
    }

    #[staticmethod]
    fn identity(dim: usize) -> Self {
        spectral_means::SpdMatrix::identity(dim).into()
    }

    /// Haar-rotated matrix with log-uniform spectrum in `[cond^-1/2, cond^1/2]`.
    #[staticmethod]
    #[pyo3(signature = (dim, cond = 10.0, seed = 0))]
    fn random(dim: usize, cond: f64, seed: u64) -> PyResult<Self> {
        spectral_means::random_spd(dim, cond, seed).map(Self::from).map_err(to_py)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.eigenvalues().to_vec()
    }

    fn trace(&self) -> f64 {
        self.inner.trace()
    }

    fn condition_number(&self) -> f64 {
        self.inner.condition_number()
    }

    fn power(&self, p: f64) -> PyResult<Self> {
        spectral_means::spectral_power(&self.inner, p).map(Self::from).map_err(to_py)
    }

    fn inverse(&self) -> PyResult<Self> {
        self.inner.inverse().map(Self::from).map_err(to_py)
    }

    fn to_list(&self) -> Vec<Vec<Complex64>> {
        rows_of(self.inner.as_hermitian())
    }

    fn __len__(&self) -> usize {
        self.inner.dim()
    }

    fn __repr__(&self) -> String {
        let rows: Vec<String> = self
            .to_list()
            .iter()
            .map(|r| {
                let cells: Vec<String> = r.iter().map(|z| format!("{:.6}{:+.6}j", z.re, z.im)).collect();
                format!("[{}]", cells.join(", "))
            })
            .collect();
        format!("SpdMatrix([{}])", rows.join(", "))
    }
}

/// Any two-variable mean by name: arithmetic, harmonic, geometric, spectral,
/// f, renyi (needs `z`), wasserstein or logeuclidean.
#[pyfunction]
#[pyo3(signature = (kind, a, b, t, z = None))]
fn mean(kind: &str, a: &SpdMatrix, b: &SpdMatrix, t: f64, z: Option<f64>) -> PyResult<SpdMatrix> {
    let kind: MeanKind = kind.parse().map_err(to_py)?;
    let params = MeanParams::new(t, z).map_err(to_py)?;
    kind.compute(&a.inner, &b.inner, &params).map(SpdMatrix::from).map_err(to_py)
}

#[pyfunction]
fn f_mean(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> PyResult<SpdMatrix> {
    spectral_means::means::f_mean(&a.inner, &b.inner, t).map(SpdMatrix::from).map_err(to_py)
}

#[pyfunction]
fn renyi_quantity(a: &SpdMatrix, b: &SpdMatrix, t: f64, z: f64) -> PyResult<SpdMatrix> {
    spectral_means::means::renyi_quantity(&a.inner, &b.inner, t, z).map(SpdMatrix::from).map_err(to_py)
}

/// `tr[(1-t) A + t B - F_t(A, B)]`.
#[pyfunction]
fn phi(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> PyResult<f64> {
    divergence::phi(&a.inner, &b.inner, t).map(|v| v.value).map_err(to_py)
}

/// Gradient of `phi` in its second argument, as nested lists.
#[pyfunction]
fn phi_gradient(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> PyResult<Vec<Vec<Complex64>>> {
    divergence::phi_gradient_b(&a.inner, &b.inner, t).map(|g| rows_of(&g)).map_err(to_py)
}

fn problem(matrices: Vec<SpdMatrix>, t: f64, weights: Option<Vec<f64>>) -> PyResult<BarycenterProblem> {
    let n = matrices.len();
    let w = match weights {
        Some(w) => WeightVector::new(w),
        None => WeightVector::uniform(n),
    }
    .map_err(to_py)?;
    BarycenterProblem::new(matrices.into_iter().map(|m| m.inner).collect(), w, t).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (matrices, t, x, weights = None))]
fn barycenter_objective(matrices: Vec<SpdMatrix>, t: f64, x: &SpdMatrix, weights: Option<Vec<f64>>) -> PyResult<f64> {
    barycenter::objective(&problem(matrices, t, weights)?, &x.inner).map_err(to_py)
}

/// Solve for the barycenter. Returns `(X, report)` where `report` is a dict
/// with `iterations`, `final_grad_norm`, `converged`, `stop_reason` and
/// `objective_trace`. Not converging is reported, not raised.
#[pyfunction]
#[pyo3(signature = (matrices, t, weights = None, max_iters = 500, grad_tol = 1e-9))]
fn solve_barycenter<'py>(
    py: Python<'py>,
    matrices: Vec<SpdMatrix>,
    t: f64,
    weights: Option<Vec<f64>>,
    max_iters: usize,
    grad_tol: f64,
) -> PyResult<(SpdMatrix, Bound<'py, PyDict>)> {
    let p = problem(matrices, t, weights)?;
    let cfg = SolverConfig {
        max_iters,
        grad_tol,
        ..SolverConfig::default()
    };
    cfg.validate().map_err(to_py)?;
    let (x, r) = py.detach(|| barycenter::solve(&p, &cfg)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("iterations", r.iterations)?;
    d.set_item("final_grad_norm", r.final_grad_norm)?;
    d.set_item("converged", r.converged)?;
    d.set_item("stop_reason", r.stop_reason.to_string())?;
    d.set_item("objective_trace", r.objective_trace)?;
    Ok((x.into(), d))
}

/// Run a verification suite. Returns one dict per property.
#[pyfunction]
#[pyo3(signature = (suite = "all", dims = vec![2, 3, 4, 5, 6], samples = 200, seed = 0))]
fn verify<'py>(py: Python<'py>, suite: &str, dims: Vec<usize>, samples: usize, seed: u64) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let kind: SuiteKind = suite.parse().map_err(to_py)?;
    let cfg = SuiteConfig::new(dims, samples, seed);
    let report = py.detach(|| run_suite(kind, &cfg)).map_err(to_py)?;
    report
        .properties
        .iter()
        .map(|p| {
            let d = PyDict::new(py);
            d.set_item("property", &p.name)?;
            d.set_item("suite", p.suite.name())?;
            d.set_item("passed", p.passed)?;
            d.set_item("skipped", p.skipped)?;
            d.set_item("violations", p.violations)?;
            d.set_item("worst_margin", p.worst_score)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn spectral_means_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<SpdMatrix>()?;
    m.add_function(wrap_pyfunction!(mean, m)?)?;
    m.add_function(wrap_pyfunction!(f_mean, m)?)?;
    m.add_function(wrap_pyfunction!(renyi_quantity, m)?)?;
    m.add_function(wrap_pyfunction!(phi, m)?)?;
    m.add_function(wrap_pyfunction!(phi_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(barycenter_objective, m)?)?;
    m.add_function(wrap_pyfunction!(solve_barycenter, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
