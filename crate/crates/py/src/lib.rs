//! Python bindings for the `bgw` crate.

use bgw::bayes::{ge_estimate, run_mcmc, McmcOptions, PriorConfig};
use bgw::copula::{
    blest_b, copula_cdf, dependence_series_control, footrule_phi, kendall_tau_formula, kendall_tau_quadrature,
    regression_dependence_r, spearman_rho, tail_dependence,
};
use bgw::harness::real_data_pipeline;
use bgw::mle::{fit_mle, log_likelihood, FitOptions};
use bgw::moments::{correlation, moment_series_control};
use bgw::sampling::sample_n;
use bgw::{BgwError, BivariateSample, Margin, RngHandle};
use pyo3::exceptions::{PyArithmeticError, PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: BgwError) -> PyErr {
    match e {
        BgwError::InvalidParameter(_) | BgwError::Domain(_) | BgwError::Data(_) | BgwError::Csv(_) => {
            PyValueError::new_err(e.to_string())
        }
        BgwError::NonConvergence { .. } | BgwError::Numerical(_) => PyArithmeticError::new_err(e.to_string()),
        BgwError::Io(_) => PyIOError::new_err(e.to_string()),
    }
}

fn margin(which: &str) -> PyResult<Margin> {
    match which {
        "x" | "X" => Ok(Margin::X),
        "y" | "Y" => Ok(Margin::Y),
        _ => Err(PyValueError::new_err(format!("margin must be 'x' or 'y', got '{which}'"))),
    }
}

fn sample_from(xs: Vec<f64>, ys: Vec<f64>) -> PyResult<BivariateSample> {
    if xs.len() != ys.len() {
        return Err(PyValueError::new_err("xs and ys differ in length"));
    }
    BivariateSample::new(xs.into_iter().zip(ys).collect()).map_err(to_py)
}

/// Parameters (a, b1, b2, theta) of the bivariate generalized Weibull law.
#[pyclass(name = "BgwParams", frozen)]
struct PyBgwParams {
    inner: bgw::BgwParams,
}

#[pymethods]
impl PyBgwParams {
    #[new]
    fn new(a: f64, b1: f64, b2: f64, theta: f64) -> PyResult<Self> {
        Ok(Self { inner: bgw::BgwParams::new(a, b1, b2, theta).map_err(to_py)? })
    }

    #[getter]
    fn a(&self) -> f64 {
        self.inner.a()
    }
    #[getter]
    fn b1(&self) -> f64 {
        self.inner.b1()
    }
    #[getter]
    fn b2(&self) -> f64 {
        self.inner.b2()
    }
    #[getter]
    fn theta(&self) -> f64 {
        self.inner.theta()
    }

    fn cdf(&self, x: f64, y: f64) -> PyResult<f64> {
        self.inner.cdf(x, y).map_err(to_py)
    }

    fn survival(&self, x: f64, y: f64) -> PyResult<f64> {
        self.inner.survival(x, y).map_err(to_py)
    }

    fn pdf(&self, x: f64, y: f64) -> PyResult<f64> {
        self.inner.pdf(x, y).map_err(to_py)
    }

    #[pyo3(signature = (t, which = "x"))]
    fn marginal_cdf(&self, t: f64, which: &str) -> PyResult<f64> {
        self.inner.marginal(margin(which)?).cdf(t).map_err(to_py)
    }

    #[pyo3(signature = (t, which = "x"))]
    fn marginal_pdf(&self, t: f64, which: &str) -> PyResult<f64> {
        self.inner.marginal(margin(which)?).pdf(t).map_err(to_py)
    }

    /// E(Y | X = x).
    fn regression(&self, x: f64) -> PyResult<f64> {
        self.inner.regression(x, &moment_series_control()).map_err(to_py)
    }

    fn hazard_gradient(&self, x: f64, y: f64) -> PyResult<(f64, f64)> {
        self.inner.hazard_gradient(x, y).map_err(to_py)
    }

    fn local_dependence(&self, x: f64, y: f64) -> PyResult<f64> {
        self.inner.local_dependence(x, y).map_err(to_py)
    }

    fn correlation(&self) -> PyResult<f64> {
        correlation(&self.inner, &moment_series_control()).map_err(to_py)
    }

    /// `n` pairs as a list of (x, y) tuples.
    #[pyo3(signature = (n, seed = 1))]
    fn sample(&self, n: usize, seed: u64) -> PyResult<Vec<(f64, f64)>> {
        Ok(sample_n(&self.inner, n, &mut RngHandle::new(seed)).map_err(to_py)?.pairs().to_vec())
    }

    fn log_likelihood(&self, xs: Vec<f64>, ys: Vec<f64>) -> PyResult<f64> {
        Ok(log_likelihood(&self.inner, &sample_from(xs, ys)?))
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!("BgwParams(a={}, b1={}, b2={}, theta={})", p.a(), p.b1(), p.b2(), p.theta())
    }
}

/// Maximum-likelihood fit; returns a dict with the fitted parameters and
/// loglik, aic, bic, converged, n_iter.
#[pyfunction]
#[pyo3(signature = (xs, ys, fix_a = None, starts = 5, seed = 1))]
fn fit<'py>(
    py: Python<'py>,
    xs: Vec<f64>,
    ys: Vec<f64>,
    fix_a: Option<f64>,
    starts: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let data = sample_from(xs, ys)?;
    let f = py
        .detach(|| fit_mle(&data, None, &FitOptions { fix_a, starts, seed }))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("params", PyBgwParams { inner: f.params })?;
    d.set_item("loglik", f.log_lik)?;
    d.set_item("aic", f.aic)?;
    d.set_item("bic", f.bic)?;
    d.set_item("converged", f.converged)?;
    d.set_item("n_iter", f.n_iter)?;
    Ok(d)
}

/// Random-walk Metropolis-Hastings run; returns general-entropy estimates
/// at loss parameter `c` and the acceptance rates.
#[pyfunction]
#[pyo3(signature = (xs, ys, prior = None, c = 0.5, iters = 10_000, burnin = 2_000, seed = 1))]
#[allow(clippy::too_many_arguments)]
fn bayes<'py>(
    py: Python<'py>,
    xs: Vec<f64>,
    ys: Vec<f64>,
    prior: Option<[f64; 8]>,
    c: f64,
    iters: usize,
    burnin: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let data = sample_from(xs, ys)?;
    let prior = match prior {
        Some(h) => PriorConfig::new(h),
        None => PriorConfig::uniform(1.5),
    }
    .map_err(to_py)?;
    let opts = McmcOptions { iterations: iters, burn_in: burnin, seed, ..Default::default() };
    let (est, rates) = py
        .detach(|| {
            let chain = run_mcmc(&data, &prior, &opts)?;
            Ok((ge_estimate(&chain, c)?, chain.acceptance_rates))
        })
        .map_err(to_py)?;
    let d = PyDict::new(py);
    for (k, name) in ["a", "b1", "b2", "theta"].iter().enumerate() {
        d.set_item(*name, est[k])?;
    }
    d.set_item("acceptance_rates", rates.to_vec())?;
    Ok(d)
}

/// Copula dependence measures at `theta`.
#[pyfunction]
fn dependence(py: Python<'_>, theta: f64) -> PyResult<Bound<'_, PyDict>> {
    let ctrl = dependence_series_control();
    let d = PyDict::new(py);
    d.set_item("rho", spearman_rho(theta, &ctrl).map_err(to_py)?)?;
    d.set_item("tau_quadrature", kendall_tau_quadrature(theta).map_err(to_py)?)?;
    d.set_item("tau_formula", kendall_tau_formula(theta).map_err(to_py)?)?;
    d.set_item("phi", footrule_phi(theta, &ctrl).map_err(to_py)?)?;
    d.set_item("blest", blest_b(theta, &ctrl).map_err(to_py)?)?;
    d.set_item("r", regression_dependence_r(theta, &ctrl).map_err(to_py)?)?;
    let (lo, up) = tail_dependence(theta).map_err(to_py)?;
    d.set_item("tail_lower", lo)?;
    d.set_item("tail_upper", up)?;
    Ok(d)
}

#[pyfunction]
fn copula(theta: f64, s: f64, t: f64) -> PyResult<f64> {
    copula_cdf(theta, s, t).map_err(to_py)
}

/// The bundled 42-pair football data as (x, y) tuples.
#[pyfunction]
fn football() -> Vec<(f64, f64)> {
    BivariateSample::football().pairs().to_vec()
}

/// Fits the three models and returns (name, loglik, aic, bic) per model.
#[pyfunction]
#[pyo3(signature = (xs, ys, scale = 0.1, seed = 1))]
fn compare_models(
    py: Python<'_>,
    xs: Vec<f64>,
    ys: Vec<f64>,
    scale: f64,
    seed: u64,
) -> PyResult<Vec<(String, f64, f64, f64)>> {
    let data = sample_from(xs, ys)?;
    let report = py.detach(|| real_data_pipeline(&data, scale, seed)).map_err(to_py)?;
    Ok(report.models.into_iter().map(|m| (m.model, m.loglik, m.aic, m.bic)).collect())
}

#[pymodule]
fn bgw_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBgwParams>()?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(bayes, m)?)?;
    m.add_function(wrap_pyfunction!(dependence, m)?)?;
    m.add_function(wrap_pyfunction!(copula, m)?)?;
    m.add_function(wrap_pyfunction!(football, m)?)?;
    m.add_function(wrap_pyfunction!(compare_models, m)?)?;
    Ok(())
}
