//! Python bindings for the cyclic Lie group toolkit.
//!
//! The module mirrors the library's main entry points with plain-data
//! arguments: structure constants as an n×n×n nested list (`c[i][j][k]` is
//! the coefficient of `e_k` in `[e_i, e_j]`), matrices as lists of rows.
//! Reports come back as dictionaries. Validation problems raise
//! `ValueError`; a failed internal cross-check raises `RuntimeError`.

use nalgebra::DMatrix;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use cyclic_lie::algebra::{LieAlgebra, MetricLieAlgebra};
use cyclic_lie::connection::CurvatureReport;
use cyclic_lie::error::Error;
use cyclic_lie::gqp::{self, OmegaMatrix};
use cyclic_lie::sl2::{self, Sl2CyclicMetric};
use cyclic_lie::tolerance::ToleranceConfig;
use cyclic_lie::{decompose, linalg};

fn to_py_err(err: Error) -> PyErr {
    if err.exit_code() == 4 {
        PyRuntimeError::new_err(err.to_string())
    } else {
        PyValueError::new_err(err.to_string())
    }
}

fn build_tolerances(tol: Option<f64>) -> PyResult<ToleranceConfig> {
    let cfg = match tol {
        Some(eps) => ToleranceConfig::with_eps_eq(eps),
        None => ToleranceConfig::default(),
    };
    cfg.validate().map_err(to_py_err)?;
    Ok(cfg)
}

fn parse_matrix(rows: &[Vec<f64>], what: &str) -> PyResult<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return Err(PyValueError::new_err(format!("{what} must be non-empty")));
    }
    if rows.iter().any(|row| row.len() != ncols) {
        return Err(PyValueError::new_err(format!(
            "{what} rows have unequal lengths"
        )));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn parse_algebra(
    structure_constants: Vec<Vec<Vec<f64>>>,
    gram: Option<Vec<Vec<f64>>>,
) -> PyResult<MetricLieAlgebra> {
    let n = structure_constants.len();
    if structure_constants
        .iter()
        .any(|plane| plane.len() != n || plane.iter().any(|row| row.len() != n))
    {
        return Err(PyValueError::new_err(
            "structure constants must form an n×n×n array",
        ));
    }
    let algebra = LieAlgebra::from_components(n, |i, j, k| structure_constants[i][j][k])
        .map_err(to_py_err)?;
    match gram {
        Some(rows) => {
            let g = parse_matrix(&rows, "gram matrix")?;
            MetricLieAlgebra::new(algebra, g).map_err(to_py_err)
        }
        None => Ok(MetricLieAlgebra::with_identity_gram(algebra)),
    }
}

/// Curvature report of the metric Lie algebra: cyclic verdict, structural
/// flags, Ricci data, and the parallelism norms.
#[pyfunction]
#[pyo3(signature = (structure_constants, gram=None, tol=None))]
fn analyze<'py>(
    py: Python<'py>,
    structure_constants: Vec<Vec<Vec<f64>>>,
    gram: Option<Vec<Vec<f64>>>,
    tol: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = build_tolerances(tol)?;
    let mla = parse_algebra(structure_constants, gram)?;
    let scale = mla.scale();
    let jacobi = mla.algebra().jacobi_residual();
    if jacobi > cfg.eps_eq * scale * scale {
        return Err(PyValueError::new_err(format!(
            "Jacobi identity fails (residual {jacobi:.3e})"
        )));
    }
    let report = CurvatureReport::compute(&mla, &cfg).map_err(to_py_err)?;
    let flags = mla.structural_flags(&cfg);
    let (eigenvalues, _) = {
        let (_, inv_sqrt) = linalg::spd_sqrt_inv_sqrt(mla.gram()).map_err(to_py_err)?;
        linalg::sym_eigen_sorted(&(&inv_sqrt * &report.ricci * &inv_sqrt))
    };
    let out = PyDict::new(py);
    out.set_item("dim", mla.dim())?;
    out.set_item("cyclic", mla.check_cyclic(&cfg))?;
    out.set_item("cyclic_residual", mla.cyclic_residual())?;
    out.set_item("abelian", flags.abelian)?;
    out.set_item("nilpotent", flags.nilpotent)?;
    out.set_item("solvable", flags.solvable)?;
    out.set_item("ricci", matrix_rows(&report.ricci))?;
    out.set_item(
        "ricci_eigenvalues",
        eigenvalues.iter().copied().collect::<Vec<f64>>(),
    )?;
    out.set_item("scalar", report.scalar)?;
    out.set_item("nabla_ricci_max", report.nabla_ricci.max_abs())?;
    out.set_item("nabla_curvature_max", report.nabla_curvature.max_abs())?;
    Ok(out)
}

/// Closed-form report for the solvable model with weight matrix `omega`,
/// cross-checked against the generic pipeline.
#[pyfunction]
#[pyo3(signature = (omega, tol=None))]
fn gqp_report<'py>(
    py: Python<'py>,
    omega: Vec<Vec<f64>>,
    tol: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = build_tolerances(tol)?;
    let omega = OmegaMatrix::from_rows(&omega).map_err(to_py_err)?;
    let closed = gqp::closed_forms(&omega);
    let mla = gqp::build(&omega);
    let report = CurvatureReport::compute(&mla, &cfg).map_err(to_py_err)?;
    let discrepancy = closed.discrepancy(&report);
    let flags = gqp::classify(&omega, &cfg);
    let out = PyDict::new(py);
    out.set_item("q", omega.q())?;
    out.set_item("p", omega.p())?;
    out.set_item("ricci", matrix_rows(&report.ricci))?;
    out.set_item("scalar", report.scalar)?;
    out.set_item("constant_curvature", flags.constant_curvature)?;
    out.set_item("negative_sectional", flags.negative_sectional)?;
    out.set_item("negative_ricci", flags.negative_ricci)?;
    out.set_item("einstein", flags.einstein)?;
    out.set_item("ricci_parallel", flags.ricci_parallel)?;
    out.set_item("locally_symmetric", flags.locally_symmetric)?;
    out.set_item("vectorial", flags.vectorial)?;
    out.set_item("discrepancy_rel_nonzero", discrepancy.rel_nonzero)?;
    out.set_item("discrepancy_abs_zero", discrepancy.abs_zero)?;
    Ok(out)
}

/// Report for the simple factor sl(2,ℝ) with metric parameters `mu > nu > 0`.
#[pyfunction]
#[pyo3(signature = (mu, nu, tol=None))]
fn sl2_report<'py>(
    py: Python<'py>,
    mu: f64,
    nu: f64,
    tol: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = build_tolerances(tol)?;
    let metric = Sl2CyclicMetric::new(mu, nu).map_err(to_py_err)?;
    let mla = sl2::build_sl2(&metric);
    let report = CurvatureReport::compute(&mla, &cfg).map_err(to_py_err)?;
    let (closed_ricci, closed_scalar) = sl2::sl2_closed_ricci(&metric);
    let out = PyDict::new(py);
    out.set_item("mu", mu)?;
    out.set_item("nu", nu)?;
    out.set_item("gram", matrix_rows(mla.gram()))?;
    out.set_item("ricci", matrix_rows(&report.ricci))?;
    out.set_item("scalar", report.scalar)?;
    out.set_item("closed_ricci", matrix_rows(&closed_ricci))?;
    out.set_item("closed_scalar", closed_scalar)?;
    Ok(out)
}

/// Split a cyclic metric Lie algebra into its abelian, solvable-model, and
/// simple blocks; returns the canonical parameters and the adapted basis.
#[pyfunction]
#[pyo3(signature = (structure_constants, gram=None, seed=0, tol=None))]
fn decompose_algebra<'py>(
    py: Python<'py>,
    structure_constants: Vec<Vec<Vec<f64>>>,
    gram: Option<Vec<Vec<f64>>>,
    seed: u64,
    tol: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = build_tolerances(tol)?;
    let mla = parse_algebra(structure_constants, gram)?;
    let dec = decompose::decompose(&mla, &cfg, seed).map_err(to_py_err)?;
    let out = PyDict::new(py);
    out.set_item("r", dec.spec.r)?;
    out.set_item(
        "omega",
        dec.spec.omega.as_ref().map(|o| matrix_rows(o.entries())),
    )?;
    let factors = PyList::empty(py);
    for factor in &dec.spec.sl2_factors {
        let item = PyDict::new(py);
        item.set_item("mu", factor.mu())?;
        item.set_item("nu", factor.nu())?;
        factors.append(item)?;
    }
    out.set_item("sl2_factors", factors)?;
    out.set_item("change_of_basis", matrix_rows(&dec.change_of_basis))?;
    out.set_item("residual", dec.residual)?;
    Ok(out)
}

/// Search for `Q` orthogonal and a column permutation with `A = Q·B·P`.
/// Returns the witness as a dictionary, or `None` when the two weight
/// matrices describe non-isometric models.
#[pyfunction]
#[pyo3(signature = (a, b, tol=None))]
fn is_isometric<'py>(
    py: Python<'py>,
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    tol: Option<f64>,
) -> PyResult<Option<Bound<'py, PyDict>>> {
    let cfg = build_tolerances(tol)?;
    let a = OmegaMatrix::from_rows(&a).map_err(to_py_err)?;
    let b = OmegaMatrix::from_rows(&b).map_err(to_py_err)?;
    let witness = gqp::isometric(&a, &b, &cfg).map_err(to_py_err)?;
    witness
        .map(|w| {
            let out = PyDict::new(py);
            out.set_item("q_matrix", matrix_rows(&w.q_matrix))?;
            out.set_item("permutation", w.permutation.clone())?;
            out.set_item("residual", w.residual(&a, &b))?;
            Ok(out)
        })
        .transpose()
}

/// List the cyclic families of the given dimension (2 through 5).
#[pyfunction]
fn catalog(py: Python<'_>, dim: usize) -> PyResult<Bound<'_, PyList>> {
    let entries = decompose::catalog(dim).map_err(to_py_err)?;
    let out = PyList::empty(py);
    for entry in &entries {
        let item = PyDict::new(py);
        item.set_item("dim", entry.dim)?;
        item.set_item("r", entry.r)?;
        item.set_item("q", entry.q)?;
        item.set_item("p", entry.p)?;
        item.set_item("sl2_count", entry.sl2_count)?;
        item.set_item("label", entry.label.clone())?;
        item.set_item("constraints", entry.constraints.clone())?;
        out.append(item)?;
    }
    Ok(out)
}

#[pymodule]
fn cyclic_lie_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(gqp_report, m)?)?;
    m.add_function(wrap_pyfunction!(sl2_report, m)?)?;
    m.add_function(wrap_pyfunction!(decompose_algebra, m)?)?;
    m.add_function(wrap_pyfunction!(is_isometric, m)?)?;
    m.add_function(wrap_pyfunction!(catalog, m)?)?;
    Ok(())
}
