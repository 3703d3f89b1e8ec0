//! Python extension module exposing the core model, the solvers, and the
//! accuracy metrics.
//!
//! Build with `cargo build -p dqssa-py --release`, then import the
//! produced `libdqssa.so` as the module `dqssa` (rename or symlink to
//! `dqssa.so`); see `python/smoke_test.py`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use dqssa_core as core;

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// The fifteen kinetic parameters; defaults are the reference values.
#[pyclass(name = "RateConstants", skip_from_py_object)]
#[derive(Clone)]
struct PyRateConstants {
    inner: core::RateConstants,
}

#[pymethods]
impl PyRateConstants {
    #[new]
    #[pyo3(signature = (alpha_a=50.0, alpha_a_p=500.0, alpha_r=0.01, alpha_r_p=50.0,
                        beta_a=50.0, beta_r=5.0, gamma_a=1.0, gamma_r=1.0, gamma_c=2.0,
                        delta_a=1.0, delta_r=0.2, delta_ma=10.0, delta_mr=0.5,
                        theta_a=50.0, theta_r=100.0))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        alpha_a: f64,
        alpha_a_p: f64,
        alpha_r: f64,
        alpha_r_p: f64,
        beta_a: f64,
        beta_r: f64,
        gamma_a: f64,
        gamma_r: f64,
        gamma_c: f64,
        delta_a: f64,
        delta_r: f64,
        delta_ma: f64,
        delta_mr: f64,
        theta_a: f64,
        theta_r: f64,
    ) -> PyResult<Self> {
        let inner = core::RateConstants {
            alpha_a,
            alpha_a_p,
            alpha_r,
            alpha_r_p,
            beta_a,
            beta_r,
            gamma_a,
            gamma_r,
            gamma_c,
            delta_a,
            delta_r,
            delta_ma,
            delta_mr,
            theta_a,
            theta_r,
        };
        inner.validate().map_err(value_err)?;
        Ok(Self { inner })
    }

    /// `{name: value}` for all parameters.
    fn as_dict(&self) -> std::collections::BTreeMap<&'static str, f64> {
        self.inner.fields().into_iter().collect()
    }

    fn __repr__(&self) -> String {
        let fields: Vec<String> = self
            .inner
            .fields()
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        format!("RateConstants({})", fields.join(", "))
    }

    #[getter]
    fn alpha_a(&self) -> f64 {
        self.inner.alpha_a
    }

    #[getter]
    fn alpha_a_p(&self) -> f64 {
        self.inner.alpha_a_p
    }

    #[getter]
    fn alpha_r(&self) -> f64 {
        self.inner.alpha_r
    }

    #[getter]
    fn alpha_r_p(&self) -> f64 {
        self.inner.alpha_r_p
    }

    #[getter]
    fn beta_a(&self) -> f64 {
        self.inner.beta_a
    }

    #[getter]
    fn beta_r(&self) -> f64 {
        self.inner.beta_r
    }

    #[getter]
    fn gamma_a(&self) -> f64 {
        self.inner.gamma_a
    }

    #[getter]
    fn gamma_r(&self) -> f64 {
        self.inner.gamma_r
    }

    #[getter]
    fn gamma_c(&self) -> f64 {
        self.inner.gamma_c
    }

    #[getter]
    fn delta_a(&self) -> f64 {
        self.inner.delta_a
    }

    #[getter]
    fn delta_r(&self) -> f64 {
        self.inner.delta_r
    }

    #[getter]
    fn delta_ma(&self) -> f64 {
        self.inner.delta_ma
    }

    #[getter]
    fn delta_mr(&self) -> f64 {
        self.inner.delta_mr
    }

    #[getter]
    fn theta_a(&self) -> f64 {
        self.inner.theta_a
    }

    #[getter]
    fn theta_r(&self) -> f64 {
        self.inner.theta_r
    }
}

/// Fixed-step solver settings.
#[pyclass(name = "SolverConfig", skip_from_py_object)]
#[derive(Clone)]
struct PySolverConfig {
    inner: core::SolverConfig,
}

#[pymethods]
impl PySolverConfig {
    #[new]
    #[pyo3(signature = (dt=1e-3, t_end=300.0, newton_tol=1e-10, max_iters=50, stride=10))]
    fn new(dt: f64, t_end: f64, newton_tol: f64, max_iters: usize, stride: usize) -> PyResult<Self> {
        let inner = core::SolverConfig {
            dt,
            t_end,
            newton_tol,
            max_iters,
            stride,
        };
        inner.validate().map_err(value_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.inner.dt
    }

    #[getter]
    fn t_end(&self) -> f64 {
        self.inner.t_end
    }

    #[getter]
    fn newton_tol(&self) -> f64 {
        self.inner.newton_tol
    }

    #[getter]
    fn max_iters(&self) -> usize {
        self.inner.max_iters
    }

    #[getter]
    fn stride(&self) -> usize {
        self.inner.stride
    }

    fn __repr__(&self) -> String {
        format!(
            "SolverConfig(dt={}, t_end={}, newton_tol={}, max_iters={}, stride={})",
            self.inner.dt,
            self.inner.t_end,
            self.inner.newton_tol,
            self.inner.max_iters,
            self.inner.stride
        )
    }
}

/// Timestamped samples of one simulated system.
#[pyclass(name = "Trajectory")]
struct PyTrajectory {
    inner: core::Trajectory,
}

#[pymethods]
impl PyTrajectory {
    /// Sample times, hours.
    fn times(&self) -> Vec<f64> {
        self.inner.times().to_vec()
    }

    /// Component names in column order.
    fn components(&self) -> Vec<String> {
        self.inner.components().iter().map(|c| c.to_string()).collect()
    }

    /// One component's series.
    fn component(&self, name: &str) -> PyResult<Vec<f64>> {
        self.inner
            .component(name)
            .ok_or_else(|| value_err(format!("no component named '{name}'")))
    }

    /// State vector at sample `i`.
    fn row(&self, i: usize) -> PyResult<Vec<f64>> {
        if i >= self.inner.len() {
            return Err(value_err(format!(
                "sample {i} out of range ({} samples)",
                self.inner.len()
            )));
        }
        Ok(self.inner.row(i).to_vec())
    }

    fn system(&self) -> String {
        self.inner.meta.system.to_string()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Trajectory(system='{}', samples={}, components={:?})",
            self.inner.meta.system,
            self.inner.len(),
            self.inner.components()
        )
    }
}

/// Accuracy of one approximation against the original system.
#[pyclass(name = "ErrorReport", skip_from_py_object)]
#[derive(Clone)]
struct PyErrorReport {
    inner: core::ErrorReport,
}

#[pymethods]
impl PyErrorReport {
    #[getter]
    fn system(&self) -> String {
        self.inner.system.to_string()
    }

    #[getter]
    fn p_orig(&self) -> f64 {
        self.inner.p_orig
    }

    #[getter]
    fn p_approx(&self) -> f64 {
        self.inner.p_approx
    }

    #[getter]
    fn rel_err_period(&self) -> f64 {
        self.inner.rel_err_period
    }

    #[getter]
    fn rel_err_l2(&self) -> f64 {
        self.inner.rel_err_l2
    }

    #[getter]
    fn window(&self) -> (f64, f64) {
        self.inner.window
    }

    fn __repr__(&self) -> String {
        format!(
            "ErrorReport(system='{}', p_orig={:.4}, p_approx={:.4}, rel_err_period={:.4}, rel_err_l2={:.4})",
            self.inner.system,
            self.inner.p_orig,
            self.inner.p_approx,
            self.inner.rel_err_period,
            self.inner.rel_err_l2
        )
    }
}

fn parse_system(name: &str) -> PyResult<core::SystemId> {
    name.parse().map_err(value_err)
}

fn rates_or_default(params: Option<&PyRateConstants>) -> core::RateConstants {
    params.map(|p| p.inner).unwrap_or_default()
}

fn cfg_or_default(config: Option<&PySolverConfig>) -> core::SolverConfig {
    config.map(|c| c.inner).unwrap_or_default()
}

/// Simulates one system ("original", "qss", "dqss-derived",
/// "dqss-simplified" or "dqss-constant") and returns all nine components.
#[pyfunction]
#[pyo3(signature = (system, params=None, config=None))]
fn simulate(
    system: &str,
    params: Option<&PyRateConstants>,
    config: Option<&PySolverConfig>,
) -> PyResult<PyTrajectory> {
    let traj = core::simulate_nine(
        parse_system(system)?,
        &rates_or_default(params),
        &cfg_or_default(config),
    )
    .map_err(runtime_err)?;
    Ok(PyTrajectory { inner: traj })
}

/// Oscillation period of one trajectory component after skipping the
/// transient; returns `(period, peak_times)`.
#[pyfunction]
#[pyo3(signature = (traj, component="R", skip=100.0))]
fn detect_period(traj: &PyTrajectory, component: &str, skip: f64) -> PyResult<(f64, Vec<f64>)> {
    let est = core::detect_period(&traj.inner, component, skip).map_err(runtime_err)?;
    Ok((est.period, est.peak_times))
}

/// Runs the original system and one approximation, returning the error
/// report.
#[pyfunction]
#[pyo3(signature = (system, params=None, config=None, skip=100.0))]
fn compare(
    system: &str,
    params: Option<&PyRateConstants>,
    config: Option<&PySolverConfig>,
    skip: f64,
) -> PyResult<PyErrorReport> {
    let p = rates_or_default(params);
    let cfg = cfg_or_default(config);
    let f = core::simulate_nine(core::SystemId::Original, &p, &cfg).map_err(runtime_err)?;
    let est_f = core::detect_period(&f, "R", skip).map_err(runtime_err)?;
    let g = core::simulate_nine(parse_system(system)?, &p, &cfg).map_err(runtime_err)?;
    let rep = core::error_report(&f, &est_f, &g, skip).map_err(runtime_err)?;
    Ok(PyErrorReport { inner: rep })
}

/// Runs all five systems and returns the four approximation reports.
#[pyfunction]
#[pyo3(signature = (params=None, config=None, skip=100.0))]
fn table1(
    params: Option<&PyRateConstants>,
    config: Option<&PySolverConfig>,
    skip: f64,
) -> PyResult<Vec<PyErrorReport>> {
    let table = core::build_table1(&rates_or_default(params), &cfg_or_default(config), skip)
        .map_err(runtime_err)?;
    Ok(table
        .reports
        .into_iter()
        .map(|inner| PyErrorReport { inner })
        .collect())
}

/// Quasi-steady activator level as a function of the repressor level.
#[pyfunction]
#[pyo3(signature = (r, params=None))]
fn a_tilde_s(r: f64, params: Option<&PyRateConstants>) -> f64 {
    core::a_tilde_s(r, &rates_or_default(params))
}

/// The four algebraic steady states at a given activator level, as
/// `{"D_A": .., "D_R": .., "M_A": .., "M_R": ..}`.
#[pyfunction]
#[pyo3(signature = (a, params=None))]
fn steady_states(
    a: f64,
    params: Option<&PyRateConstants>,
) -> std::collections::BTreeMap<&'static str, f64> {
    let p = rates_or_default(params);
    [
        ("D_A", core::steady_da(a, &p)),
        ("D_R", core::steady_dr(a, &p)),
        ("M_A", core::steady_ma(a, &p)),
        ("M_R", core::steady_mr(a, &p)),
    ]
    .into_iter()
    .collect()
}

/// The five delays of a variant ("derived", "simplified", "constant") as
/// `{"D_A": .., "D_R": .., "M_A": .., "M_R": .., "A": ..}`. The delayed
/// gene levels enter only the derived activator delay.
#[pyfunction]
#[pyo3(signature = (variant, r, d_a_tau=1.0, d_r_tau=1.0, params=None))]
fn delays(
    variant: &str,
    r: f64,
    d_a_tau: f64,
    d_r_tau: f64,
    params: Option<&PyRateConstants>,
) -> PyResult<std::collections::BTreeMap<&'static str, f64>> {
    let v = match variant {
        "derived" => core::DelayVariant::Derived,
        "simplified" => core::DelayVariant::Simplified,
        "constant" => core::DelayVariant::Constant,
        other => {
            return Err(value_err(format!(
                "unknown variant '{other}' (expected derived, simplified or constant)"
            )))
        }
    };
    let d = core::delays_at(v, r, d_a_tau, d_r_tau, &rates_or_default(params));
    Ok([
        ("D_A", d.d_a),
        ("D_R", d.d_r),
        ("M_A", d.m_a),
        ("M_R", d.m_r),
        ("A", d.a),
    ]
    .into_iter()
    .collect())
}

/// Finite-horizon delay and weight of the one-point rule that integrates
/// linear functions against the decay kernel exactly; returns `(tau, w)`.
#[pyfunction]
fn exact_tau_w(delta: f64, t: f64) -> PyResult<(f64, f64)> {
    let rule = core::exact_tau_w(delta, t).map_err(value_err)?;
    Ok((rule.tau, rule.w))
}

/// Large-time limit of `exact_tau_w`: `(1/delta, 1/delta)`.
#[pyfunction]
fn limit_tau_w(delta: f64) -> PyResult<(f64, f64)> {
    if delta <= 0.0 {
        return Err(value_err(format!("delta must be positive, got {delta}")));
    }
    let rule = core::limit_tau_w(delta);
    Ok((rule.tau, rule.w))
}

#[pymodule]
fn dqssa(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyRateConstants>()?;
    m.add_class::<PySolverConfig>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_class::<PyErrorReport>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(detect_period, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(table1, m)?)?;
    m.add_function(wrap_pyfunction!(a_tilde_s, m)?)?;
    m.add_function(wrap_pyfunction!(steady_states, m)?)?;
    m.add_function(wrap_pyfunction!(delays, m)?)?;
    m.add_function(wrap_pyfunction!(exact_tau_w, m)?)?;
    m.add_function(wrap_pyfunction!(limit_tau_w, m)?)?;
    Ok(())
}
