//! Python bindings for `slms_rl1`.
//!
//! Algorithms are passed by name (`"LMS"`, `"SLMS"`, `"LMS_RL1"`,
//! `"SLMS_RL1"`). Experiment entry points take an optional TOML string with
//! any subset of the config keys.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use slms_rl1::channel::generate_channel as core_generate_channel;
use slms_rl1::filters::{self, Sample};
use slms_rl1::harness::{self, Axis, CellSummary, ExperimentConfig, RunSpec, SeedSchedule};
use slms_rl1::metrics::steady_state;
use slms_rl1::noise::{self, GmmParams};
use slms_rl1::{Algorithm, Error};

create_exception!(slms_rl1, SelectionInfeasible, PyRuntimeError);

fn to_py(err: Error) -> PyErr {
    match err {
        Error::SelectionInfeasible { .. } => SelectionInfeasible::new_err(err.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn algorithm(name: &str) -> PyResult<Algorithm> {
    name.parse().map_err(to_py)
}

fn config(toml: Option<&str>) -> PyResult<ExperimentConfig> {
    let cfg = match toml {
        Some(text) => ExperimentConfig::from_toml(text).map_err(to_py)?,
        None => ExperimentConfig::default(),
    };
    cfg.validate().map_err(to_py)?;
    Ok(cfg)
}

#[pyclass(name = "FilterConfig", frozen)]
struct PyFilterConfig {
    inner: filters::FilterConfig,
}

#[pymethods]
impl PyFilterConfig {
    #[new]
    #[pyo3(signature = (algorithm, mu, lambda_=0.0, delta_r=0.05))]
    fn new(algorithm: &str, mu: f64, lambda_: f64, delta_r: f64) -> PyResult<Self> {
        let alg = self::algorithm(algorithm)?;
        let inner = filters::FilterConfig::new(alg, mu, lambda_, delta_r).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn algorithm(&self) -> &'static str {
        self.inner.algorithm().name()
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.inner.mu()
    }

    #[getter]
    fn lambda_(&self) -> f64 {
        self.inner.lambda()
    }

    #[getter]
    fn delta_r(&self) -> f64 {
        self.inner.delta_r()
    }

    #[getter]
    fn rho(&self) -> f64 {
        self.inner.rho()
    }

    fn __repr__(&self) -> String {
        format!(
            "FilterConfig({}, mu={}, lambda_={}, delta_r={})",
            self.algorithm(),
            self.mu(),
            self.lambda_(),
            self.delta_r()
        )
    }
}

#[pyclass(name = "AdaptiveFilter")]
struct PyAdaptiveFilter {
    inner: filters::AdaptiveFilter,
}

#[pymethods]
impl PyAdaptiveFilter {
    #[new]
    fn new(config: &PyFilterConfig, taps: usize) -> Self {
        Self {
            inner: filters::AdaptiveFilter::new(config.inner, taps),
        }
    }

    /// One update; returns the a priori error.
    fn adapt(&mut self, x: Vec<f64>, d: f64) -> PyResult<f64> {
        self.inner.adapt(&x, d).map_err(to_py)
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }

    #[getter]
    fn previous(&self) -> Vec<f64> {
        self.inner.state().previous().to_vec()
    }

    fn reset(&mut self) {
        self.inner.reset();
    }
}

fn state(current: Vec<f64>, previous: Vec<f64>) -> PyResult<filters::FilterState> {
    filters::FilterState::from_parts(current, previous).map_err(to_py)
}

#[pyfunction]
fn sgn(v: f64) -> f64 {
    filters::sgn(v)
}

#[pyfunction]
fn reweight(previous: Vec<f64>, delta_r: f64) -> PyResult<Vec<f64>> {
    filters::reweight(&previous, delta_r).map_err(to_py)
}

#[pyfunction]
fn cost(
    current: Vec<f64>,
    previous: Vec<f64>,
    x: Vec<f64>,
    d: f64,
    config: &PyFilterConfig,
) -> PyResult<f64> {
    let s = state(current, previous)?;
    filters::cost(&s, Sample::new(&x, d), &config.inner).map_err(to_py)
}

/// Returns `(w(n+1), w(n))`.
#[pyfunction]
fn step(
    current: Vec<f64>,
    previous: Vec<f64>,
    x: Vec<f64>,
    d: f64,
    config: &PyFilterConfig,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let s = state(current, previous)?;
    let next = filters::step(&s, Sample::new(&x, d), &config.inner).map_err(to_py)?;
    Ok(next.into_parts())
}

#[pyfunction]
fn sigma_from_snr(snr_db: f64) -> f64 {
    noise::sigma_from_snr(snr_db)
}

#[pyfunction]
fn analytic_variance(phi: f64, sigma_n_sq: f64, strength: f64) -> PyResult<f64> {
    Ok(GmmParams::new(phi, sigma_n_sq, strength)
        .map_err(to_py)?
        .analytic_variance())
}

/// `count` mixture draws and their impulsive-component labels.
#[pyfunction]
fn gmm_sample(
    phi: f64,
    sigma_n_sq: f64,
    strength: f64,
    count: usize,
    seed: u64,
) -> PyResult<(Vec<f64>, Vec<bool>)> {
    let sampler = GmmParams::new(phi, sigma_n_sq, strength)
        .map_err(to_py)?
        .sampler();
    let mut rng = SeedSchedule::common(seed).rng(0);
    Ok((0..count).map(|_| sampler.sample_labeled(&mut rng)).unzip())
}

#[pyfunction]
fn generate_channel(n: usize, k: usize, seed: u64) -> PyResult<Vec<f64>> {
    let mut rng = SeedSchedule::common(seed).rng(0);
    let ch = core_generate_channel(n, k, &mut rng).map_err(to_py)?;
    Ok(ch.taps().to_vec())
}

fn spec(
    cfg: &ExperimentConfig,
    alg: &str,
    lambda_: Option<f64>,
    k: Option<usize>,
    t: Option<f64>,
) -> PyResult<RunSpec> {
    Ok(RunSpec::from_config(
        cfg,
        algorithm(alg)?,
        lambda_.unwrap_or(cfg.lambda),
        k.unwrap_or(cfg.fixed_k),
        t.unwrap_or(cfg.fixed_t),
    ))
}

/// Linear normalized deviation of a single run, one value per iteration.
#[pyfunction]
#[pyo3(signature = (algorithm, run_index=0, lambda_=None, k=None, t=None, config=None))]
fn run_once(
    py: Python<'_>,
    algorithm: &str,
    run_index: u64,
    lambda_: Option<f64>,
    k: Option<usize>,
    t: Option<f64>,
    config: Option<&str>,
) -> PyResult<(Vec<f64>, bool)> {
    let cfg = self::config(config)?;
    let spec = spec(&cfg, algorithm, lambda_, k, t)?;
    let seeds = harness::run_single_seeds(&cfg, spec.algorithm);
    let trace = py
        .detach(|| harness::run_once(&spec, &mut seeds.rng(run_index)))
        .map_err(to_py)?;
    Ok((trace.values, trace.diverged))
}

/// Averaged dB curve over `config.runs` runs.
#[pyfunction]
#[pyo3(signature = (algorithm, lambda_=None, k=None, t=None, config=None))]
fn monte_carlo(
    py: Python<'_>,
    algorithm: &str,
    lambda_: Option<f64>,
    k: Option<usize>,
    t: Option<f64>,
    config: Option<&str>,
) -> PyResult<Vec<f64>> {
    let cfg = self::config(config)?;
    let spec = spec(&cfg, algorithm, lambda_, k, t)?;
    let seeds = harness::run_single_seeds(&cfg, spec.algorithm);
    let curve = py
        .detach(|| harness::monte_carlo(&spec, cfg.runs, seeds, cfg.exclude_diverged))
        .map_err(to_py)?;
    Ok(curve.mse_db)
}

/// Picks λ from `(lambda, k, steady_state_db, stable)` tuples.
#[pyfunction]
fn select_lambda(cells: Vec<(f64, usize, f64, bool)>) -> PyResult<f64> {
    let cells: Vec<CellSummary> = cells
        .into_iter()
        .map(|(lambda, k, steady_state, stable)| CellSummary {
            lambda,
            k,
            steady_state,
            stable,
        })
        .collect();
    harness::select_lambda(&cells).map_err(to_py)
}

/// Runs the λ sweep. Returns `{"selected_lambda": float, "cells": [...]}`.
#[pyfunction]
#[pyo3(signature = (config=None))]
fn repa_sweep<'py>(py: Python<'py>, config: Option<&str>) -> PyResult<Bound<'py, PyDict>> {
    let cfg = self::config(config)?;
    let result = py.detach(|| harness::repa_sweep(&cfg)).map_err(to_py)?;
    let cells = result
        .cells
        .iter()
        .map(|c| {
            let d = PyDict::new(py);
            d.set_item("lambda", c.summary.lambda)?;
            d.set_item("k", c.summary.k)?;
            d.set_item("steady_state", c.summary.steady_state)?;
            d.set_item("stable", c.summary.stable)?;
            d.set_item("mse_db", c.curve.mse_db.clone())?;
            Ok(d)
        })
        .collect::<PyResult<Vec<_>>>()?;
    let out = PyDict::new(py);
    out.set_item("selected_lambda", result.selected_lambda)?;
    out.set_item("cells", cells)?;
    Ok(out)
}

/// Runs every algorithm along `axis` ("T" or "K"). Returns
/// `{label: {"steady_state": float, "mse_db": [...]}}`.
#[pyfunction]
#[pyo3(signature = (axis, config=None))]
fn compare_algorithms<'py>(
    py: Python<'py>,
    axis: &str,
    config: Option<&str>,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = self::config(config)?;
    let axis: Axis = axis.parse().map_err(to_py)?;
    let cmp = py
        .detach(|| harness::compare_algorithms(&cfg, axis))
        .map_err(to_py)?;
    let out = PyDict::new(py);
    for c in &cmp.curves {
        let d = PyDict::new(py);
        d.set_item(
            "steady_state",
            steady_state(&c.curve, cfg.tail_fraction).map_err(to_py)?,
        )?;
        d.set_item("mse_db", c.curve.mse_db.clone())?;
        out.set_item(&c.label, d)?;
    }
    Ok(out)
}

#[pymodule]
#[pyo3(name = "slms_rl1")]
pub fn slms_rl1_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFilterConfig>()?;
    m.add_class::<PyAdaptiveFilter>()?;
    m.add(
        "SelectionInfeasible",
        m.py().get_type::<SelectionInfeasible>(),
    )?;
    m.add_function(wrap_pyfunction!(sgn, m)?)?;
    m.add_function(wrap_pyfunction!(reweight, m)?)?;
    m.add_function(wrap_pyfunction!(cost, m)?)?;
    m.add_function(wrap_pyfunction!(step, m)?)?;
    m.add_function(wrap_pyfunction!(sigma_from_snr, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_variance, m)?)?;
    m.add_function(wrap_pyfunction!(gmm_sample, m)?)?;
    m.add_function(wrap_pyfunction!(generate_channel, m)?)?;
    m.add_function(wrap_pyfunction!(run_once, m)?)?;
    m.add_function(wrap_pyfunction!(monte_carlo, m)?)?;
    m.add_function(wrap_pyfunction!(select_lambda, m)?)?;
    m.add_function(wrap_pyfunction!(repa_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(compare_algorithms, m)?)?;
    Ok(())
}
