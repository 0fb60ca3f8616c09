//! Python bindings: the model, closed-form observables, Schmidt spectrum and
//! the grid-oracle probes. Structured results come back as plain dicts.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

use phasent::grid::{GridPlan, GridSpec};
use phasent::{model, observables, scenarios, schmidt};

fn err(e: phasent::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn plan(n: usize, extent: Option<f64>) -> PyResult<GridPlan> {
    Ok(match extent {
        Some(e) => GridPlan::Fixed(GridSpec::new(n, e).map_err(err)?),
        None => GridPlan::Auto { n },
    })
}

/// Breakup state parameters: packet widths `a`, `b`, mass `m` and `hbar`.
#[pyclass(name = "BreakupParams", frozen, from_py_object)]
#[derive(Clone)]
struct PyBreakupParams(model::BreakupParams);

#[pymethods]
impl PyBreakupParams {
    #[new]
    #[pyo3(signature = (a, b, m = 1.0, hbar = 1.0))]
    fn new(a: f64, b: f64, m: f64, hbar: f64) -> PyResult<Self> {
        model::BreakupParams::with_units(a, b, m, hbar).map(Self).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (r, alpha, m = 1.0, hbar = 1.0))]
    fn from_squeezing(r: f64, alpha: f64, m: f64, hbar: f64) -> PyResult<Self> {
        model::BreakupParams::from_squeezing(r, alpha, m, hbar).map(Self).map_err(err)
    }

    #[getter]
    fn a(&self) -> f64 {
        self.0.a()
    }

    #[getter]
    fn b(&self) -> f64 {
        self.0.b()
    }

    #[getter]
    fn m(&self) -> f64 {
        self.0.m()
    }

    #[getter]
    fn hbar(&self) -> f64 {
        self.0.hbar()
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.scales().alpha
    }

    #[getter]
    fn r(&self) -> f64 {
        self.0.scales().r
    }

    #[getter]
    fn t0(&self) -> f64 {
        self.0.scales().t0
    }

    #[getter]
    fn schmidt_number(&self) -> f64 {
        self.0.scales().schmidt_number
    }

    fn swapped(&self) -> Self {
        Self(self.0.swapped())
    }

    fn diffusion_length(&self, t: f64) -> PyResult<f64> {
        model::diffusion_length(t, &self.0).map_err(err)
    }

    fn psi_position(&self, x1: f64, x2: f64, t: f64) -> PyResult<Complex64> {
        model::psi_position(x1, x2, t, &self.0).map_err(err)
    }

    fn psi_momentum(&self, k1: f64, k2: f64, t: f64) -> PyResult<Complex64> {
        model::psi_momentum(k1, k2, t, &self.0).map_err(err)
    }

    fn joint_density(&self, x1: f64, x2: f64, t: f64) -> PyResult<f64> {
        model::joint_density(x1, x2, t, &self.0).map_err(err)
    }

    /// All closed-form variances, ratios and products at time `t`.
    fn variances(&self, py: Python<'_>, t: f64) -> PyResult<Py<PyAny>> {
        to_py(py, &observables::VarianceReport::evaluate(t, &self.0).map_err(err)?)
    }

    fn c_factor(&self, t: f64) -> PyResult<f64> {
        observables::c_factor(t, &self.0).map_err(err)
    }

    fn schmidt_coefficients(&self, count: usize) -> Vec<f64> {
        schmidt::schmidt_coefficients(count, &self.0)
    }

    fn schmidt_partial_sum(&self, n_max: usize, k1: f64, k2: f64, t: f64) -> PyResult<Complex64> {
        schmidt::schmidt_partial_sum(n_max, k1, k2, t, &self.0).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "BreakupParams(a={}, b={}, m={}, hbar={})",
            self.0.a(),
            self.0.b(),
            self.0.m(),
            self.0.hbar()
        )
    }
}

/// Pure-phase entangled state parameters.
#[pyclass(name = "PurePhaseParams", frozen, from_py_object)]
#[derive(Clone)]
struct PyPurePhaseParams(model::PurePhaseParams);

#[pymethods]
impl PyPurePhaseParams {
    #[new]
    fn new(mu: f64, nu: f64) -> PyResult<Self> {
        model::PurePhaseParams::new(mu, nu).map(Self).map_err(err)
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.0.mu()
    }

    #[getter]
    fn nu(&self) -> f64 {
        self.0.nu()
    }

    fn psi(&self, x1: f64, x2: f64) -> Complex64 {
        model::pure_phase_psi(x1, x2, &self.0)
    }

    fn __repr__(&self) -> String {
        format!("PurePhaseParams(mu={}, nu={})", self.0.mu(), self.0.nu())
    }
}

/// Numeric Schmidt spectrum of the evolved state on a grid: `(lambdas, K)`.
#[pyfunction]
#[pyo3(signature = (params, t = 0.0, n = 512, extent = None))]
fn schmidt_svd(params: &PyBreakupParams, t: f64, n: usize, extent: Option<f64>) -> PyResult<(Vec<f64>, f64)> {
    let spec = plan(n, extent)?.resolve(&params.0, t).map_err(err)?;
    let (_, x) = scenarios::evolved_position_grid(&params.0, t, &spec).map_err(err)?;
    let s = x.schmidt_svd().map_err(err)?;
    Ok((s.lambdas, s.k_numeric))
}

#[pyfunction]
fn figure1(py: Python<'_>, r_values: Vec<f64>, t_over_t0: Vec<f64>) -> PyResult<Py<PyAny>> {
    to_py(py, &scenarios::figure1(&r_values, &t_over_t0).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (params, times, n = 512, extent = None))]
fn analytic_vs_oracle(
    py: Python<'_>,
    params: &PyBreakupParams,
    times: Vec<f64>,
    n: usize,
    extent: Option<f64>,
) -> PyResult<Py<PyAny>> {
    let cmp = scenarios::analytic_vs_oracle(&params.0, &times, &plan(n, extent)?).map_err(err)?;
    to_py(py, &serde_json::json!({ "report": cmp.report, "samples": cmp.samples }))
}

#[pyfunction]
#[pyo3(signature = (params, t = None, n = 512))]
fn factorization_probe(py: Python<'_>, params: &PyBreakupParams, t: Option<f64>, n: usize) -> PyResult<Py<PyAny>> {
    let t = t.unwrap_or(params.0.scales().t0);
    to_py(py, &scenarios::factorization_probe_at(&params.0, t, &GridPlan::Auto { n }).map_err(err)?)
}

#[pyfunction]
fn uncertainty_cases(py: Python<'_>, params: &PyBreakupParams) -> PyResult<Py<PyAny>> {
    to_py(py, &scenarios::uncertainty_cases(&params.0).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (params, n = 512))]
fn pure_phase_probe(py: Python<'_>, params: &PyPurePhaseParams, n: usize) -> PyResult<Py<PyAny>> {
    let probe = scenarios::pure_phase_probe(&params.0, &GridPlan::Auto { n }).map_err(err)?;
    to_py(
        py,
        &serde_json::json!({
            "report": probe.report,
            "k_numeric": probe.k_numeric,
            "lambdas": probe.lambdas,
            "ridge": probe.ridge,
        }),
    )
}

#[pymodule]
#[pyo3(name = "phasent")]
fn phasent_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBreakupParams>()?;
    m.add_class::<PyPurePhaseParams>()?;
    m.add_function(wrap_pyfunction!(schmidt_svd, m)?)?;
    m.add_function(wrap_pyfunction!(figure1, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_vs_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(factorization_probe, m)?)?;
    m.add_function(wrap_pyfunction!(uncertainty_cases, m)?)?;
    m.add_function(wrap_pyfunction!(pure_phase_probe, m)?)?;
    Ok(())
}
