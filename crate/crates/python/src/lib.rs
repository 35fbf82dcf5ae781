//! Python module `prodsys`: the experiment runner and the closed-form index
//! computations.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use prodsys_core::index::{self, CovKernel, ExpUnit};
use prodsys_core::{CMatrix, CVector, Tolerance, C64};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn tolerance(rank_eps: Option<f64>, residual_eps: Option<f64>) -> Tolerance {
    let d = Tolerance::default();
    Tolerance { rank_eps: rank_eps.unwrap_or(d.rank_eps), residual_eps: residual_eps.unwrap_or(d.residual_eps) }
}

fn square(rows: Vec<Vec<C64>>) -> PyResult<CMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Runs `check`, `index` or `powers` on a JSON experiment and returns
/// `(passed, report_json)`. Configuration errors raise `ValueError`.
#[pyfunction]
#[pyo3(signature = (command, config_json, depth=None, tol=None))]
fn run(command: &str, config_json: &str, depth: Option<u32>, tol: Option<f64>) -> PyResult<(bool, String)> {
    let cfg = prodsys_cli::config::parse(config_json, "<string>").map_err(value_err)?;
    let settings = prodsys_cli::Settings::new(&cfg, depth, tol).map_err(value_err)?;
    let report = prodsys_cli::execute(command, &cfg, settings).map_err(value_err)?;
    Ok((report.passed, report.to_json()))
}

/// Exponential-unit covariance `conj(q1) + q2 + <x1, x2>`.
#[pyfunction]
fn exp_cov(q1: C64, x1: Vec<C64>, q2: C64, x2: Vec<C64>) -> PyResult<C64> {
    index::exp_cov(&ExpUnit::new(q1, CVector::from_vec(x1)), &ExpUnit::new(q2, CVector::from_vec(x2))).map_err(value_err)
}

/// Index of the Fock subsystem generated by exponential units with these
/// vector parts.
#[pyfunction]
#[pyo3(signature = (vectors, rank_eps=None))]
fn fock_index(vectors: Vec<Vec<C64>>, rank_eps: Option<f64>) -> PyResult<usize> {
    let set: Vec<CVector> = vectors.into_iter().map(CVector::from_vec).collect();
    index::fock_generated_index(&set, &tolerance(rank_eps, None)).map_err(value_err)
}

/// Index estimate of a covariance kernel given as a square matrix.
#[pyfunction]
#[pyo3(signature = (gamma, accuracy=0.0, rank_eps=None, residual_eps=None))]
fn kernel_index(gamma: Vec<Vec<C64>>, accuracy: f64, rank_eps: Option<f64>, residual_eps: Option<f64>) -> PyResult<usize> {
    let gamma = square(gamma)?;
    let labels = (0..gamma.nrows()).map(|i| i.to_string()).collect();
    let kernel = CovKernel::new(labels, gamma, accuracy).map_err(value_err)?;
    index::index_estimate(&kernel, &tolerance(rank_eps, residual_eps)).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// The defect `p = -(Re gamma(u0, u0) + Re gamma(v0, v0))`.
#[pyfunction]
fn defect_p(gamma_u0: C64, gamma_v0: C64) -> PyResult<f64> {
    index::defect_p(gamma_u0, gamma_v0, &Tolerance::default()).map_err(value_err)
}

/// `ind_e + ind_f + [p > tol]`.
#[pyfunction]
#[pyo3(signature = (ind_e, ind_f, p, tol=1e-8))]
fn predicted_amalgam_index(ind_e: usize, ind_f: usize, p: f64, tol: f64) -> usize {
    index::predicted_amalgam_index(ind_e, ind_f, p, tol)
}

#[pymodule]
fn prodsys(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(exp_cov, m)?)?;
    m.add_function(wrap_pyfunction!(fock_index, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_index, m)?)?;
    m.add_function(wrap_pyfunction!(defect_p, m)?)?;
    m.add_function(wrap_pyfunction!(predicted_amalgam_index, m)?)?;
    Ok(())
}
