//! Python bindings for `frozen-er`.

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use ::frozen_er as core;
use core::coalescent::ParticleSystem;
use core::graph::GraphState;
use core::limit::{diagnostics_at, simulate_path, LimitConfig};
use core::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Domain(_) | Error::Config(_) | Error::Ordering(_) | Error::Json(_) => {
            PyValueError::new_err(e.to_string())
        }
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        Error::Numeric { .. } | Error::Statistics(_) => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Density of the stable-like law at time 1.
#[pyfunction]
fn p1(x: f64) -> PyResult<f64> {
    core::special::p1(x).map_err(to_py)
}

#[pyfunction]
fn log_p1(x: f64) -> PyResult<f64> {
    core::special::log_p1(x).map(|v| v.log_p1).map_err(to_py)
}

/// `log p1(x - y) - log p1(x)` for `y >= 0`.
#[pyfunction]
fn p1_ratio_log(x: f64, y: f64) -> PyResult<f64> {
    core::special::p1_ratio_log(x, y).map_err(to_py)
}

/// `(I1, I2, I3, I1 truncated)` at `x`.
#[pyfunction]
#[pyo3(signature = (x, tol = 1e-14))]
fn kernel_integrals(x: f64, tol: f64) -> PyResult<(f64, f64, f64, f64)> {
    let k = core::special::kernel_integrals(x, tol).map_err(to_py)?;
    Ok((k.i1, k.i2, k.i3, k.i1_trunc))
}

/// `(x_max, p1(x_max))`.
#[pyfunction]
fn find_xmax() -> PyResult<(f64, f64)> {
    let m = core::special::find_xmax().map_err(to_py)?;
    Ok((m.x_max, m.p1_at_max))
}

#[pyfunction]
#[pyo3(signature = (t, x, p, delta = 0.0))]
fn jump_rate(t: f64, x: f64, p: f64, delta: f64) -> PyResult<f64> {
    core::special::jump_rate(t, x, p, delta).map_err(to_py)
}

/// Frozen graph observables `(m, frozen_mass_rescaled, largest_frozen,
/// largest_standard)` at each time.
#[pyfunction]
#[pyo3(signature = (n, p, times, seed = 0))]
fn simulate_graph(
    n: u32,
    p: f64,
    times: Vec<f64>,
    seed: u64,
) -> PyResult<Vec<(u64, f64, u32, u32)>> {
    let mut g = GraphState::new(n, p, seed).map_err(to_py)?;
    times
        .iter()
        .map(|&t| {
            g.run_to_time(t).map_err(to_py)?;
            Ok((
                g.m(),
                g.frozen_mass_rescaled(),
                g.largest_frozen(),
                g.largest_standard(),
            ))
        })
        .collect()
}

/// `(t, X, compensator, M, QV)`.
type DiagnosticRow = (f64, f64, f64, f64, f64);

/// Limit process diagnostics `(t, X, compensator, M, QV)` at each time.
#[pyfunction]
#[pyo3(signature = (p, times, seed = 0, t0 = 0.0, x0 = 0.0, delta = None))]
fn simulate_limit(
    p: f64,
    times: Vec<f64>,
    seed: u64,
    t0: f64,
    x0: f64,
    delta: Option<f64>,
) -> PyResult<Vec<DiagnosticRow>> {
    let t_end = times.iter().copied().fold(t0, f64::max);
    let mut cfg = LimitConfig::new(p, t_end, seed).with_start(t0, x0);
    if let Some(d) = delta {
        cfg = cfg.with_delta(d);
    }
    let path = simulate_path(&cfg).map_err(to_py)?;
    Ok(diagnostics_at(&path, &times)
        .map_err(to_py)?
        .into_iter()
        .map(|d| {
            (
                d.t,
                d.value,
                d.compensator,
                d.martingale,
                d.quadratic_variation,
            )
        })
        .collect())
}

/// Run the coalescent to `t_end` and return `(time, standard, frozen)`.
#[pyfunction]
#[pyo3(signature = (standard, frozen, p, t_end = f64::INFINITY, seed = 0))]
fn simulate_coalescent(
    standard: Vec<f64>,
    frozen: Vec<f64>,
    p: f64,
    t_end: f64,
    seed: u64,
) -> PyResult<(f64, Vec<f64>, Vec<f64>)> {
    use rand::SeedableRng;
    let mut s = ParticleSystem::new(standard, frozen, p).map_err(to_py)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    s.run_until(t_end, &mut rng).map_err(to_py)?;
    Ok((s.time, s.standard, s.frozen))
}

#[pyfunction]
fn ks_statistic(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    core::harness::ks_statistic(&a, &b).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (samples, q_lo = 0.9, q_hi = 0.995))]
fn tail_cubic_fit(samples: Vec<f64>, q_lo: f64, q_hi: f64) -> PyResult<f64> {
    core::harness::tail_cubic_fit(&samples, (q_lo, q_hi)).map_err(to_py)
}

/// Run a named experiment; returns the result (rows included) as JSON.
#[pyfunction]
#[pyo3(signature = (name, config = None))]
fn run_experiment(py: Python<'_>, name: &str, config: Option<&str>) -> PyResult<String> {
    let cfg = match config {
        Some(s) => serde_json::from_str(s).map_err(|e| to_py(e.into()))?,
        None => serde_json::Value::Null,
    };
    let result = py
        .detach(|| core::harness::run_experiment(name, &cfg))
        .map_err(to_py)?;
    serde_json::to_string(&result).map_err(|e| to_py(e.into()))
}

#[pyfunction]
fn experiments() -> Vec<&'static str> {
    core::harness::EXPERIMENTS.to_vec()
}

#[pymodule]
fn frozen_er(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(p1, m)?)?;
    m.add_function(wrap_pyfunction!(log_p1, m)?)?;
    m.add_function(wrap_pyfunction!(p1_ratio_log, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_integrals, m)?)?;
    m.add_function(wrap_pyfunction!(find_xmax, m)?)?;
    m.add_function(wrap_pyfunction!(jump_rate, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_graph, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_limit, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_coalescent, m)?)?;
    m.add_function(wrap_pyfunction!(ks_statistic, m)?)?;
    m.add_function(wrap_pyfunction!(tail_cubic_fit, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(experiments, m)?)?;
    Ok(())
}
