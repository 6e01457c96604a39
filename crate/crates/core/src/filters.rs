//! Adaptive update rules for sparse FIR channel estimation.
//!
//! Four variants share one update skeleton:
//!
//! ```text
//! e(n)     = d(n) - w(n)ᵀ x(n)
//! g(n)     = e(n)            (LMS, LMS-RL1)
//!          = sgn(e(n))       (SLMS, SLMS-RL1)
//! w(n+1)   = w(n) + μ g(n) x(n) - ρ sgn(w(n)) / (δ_r + |w(n-1)|)     (RL1 variants)
//! ρ        = μ λ
//! ```
//!
//! The zero-attractor weights use the estimate from the *previous* iteration,
//! so a [`FilterState`] always carries two iterates.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Which update rule a filter runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "LMS")]
    Lms,
    #[serde(rename = "SLMS")]
    Slms,
    #[serde(rename = "LMS_RL1")]
    LmsRl1,
    #[serde(rename = "SLMS_RL1")]
    SlmsRl1,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Lms,
        Algorithm::Slms,
        Algorithm::LmsRl1,
        Algorithm::SlmsRl1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Lms => "LMS",
            Algorithm::Slms => "SLMS",
            Algorithm::LmsRl1 => "LMS_RL1",
            Algorithm::SlmsRl1 => "SLMS_RL1",
        }
    }

    /// Whether the error enters the update through its sign only.
    pub fn uses_sign_error(self) -> bool {
        matches!(self, Algorithm::Slms | Algorithm::SlmsRl1)
    }

    /// Whether the reweighted L1 zero-attractor is applied.
    pub fn uses_reweighting(self) -> bool {
        matches!(self, Algorithm::LmsRl1 | Algorithm::SlmsRl1)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let normalized = s.trim().to_ascii_uppercase().replace('-', "_");
        match normalized.as_str() {
            "LMS" => Ok(Algorithm::Lms),
            "SLMS" => Ok(Algorithm::Slms),
            "LMS_RL1" | "RL1_LMS" => Ok(Algorithm::LmsRl1),
            "SLMS_RL1" | "RL1_SLMS" => Ok(Algorithm::SlmsRl1),
            _ => Err(Error::param(
                "algorithm",
                format!("unknown algorithm `{s}`"),
            )),
        }
    }
}

/// Algorithm choice plus its scalar parameters.
///
/// `rho = mu * lambda` is always derived, never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterConfig {
    algorithm: Algorithm,
    mu: f64,
    lambda: f64,
    delta_r: f64,
}

impl FilterConfig {
    pub fn new(algorithm: Algorithm, mu: f64, lambda: f64, delta_r: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::param("mu", format!("must be positive, got {mu}")));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::param(
                "lambda",
                format!("must be non-negative, got {lambda}"),
            ));
        }
        if !(delta_r.is_finite() && delta_r > 0.0) {
            return Err(Error::param(
                "delta_r",
                format!("must be positive, got {delta_r}"),
            ));
        }
        Ok(Self {
            algorithm,
            mu,
            lambda,
            delta_r,
        })
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn delta_r(&self) -> f64 {
        self.delta_r
    }

    pub fn rho(&self) -> f64 {
        self.mu * self.lambda
    }
}

/// Current estimate `w(n)` and the one before it, `w(n-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    current: Vec<f64>,
    previous: Vec<f64>,
}

impl FilterState {
    /// Fresh state: both iterates are zero.
    pub fn zeros(len: usize) -> Self {
        Self {
            current: vec![0.0; len],
            previous: vec![0.0; len],
        }
    }

    pub fn from_parts(current: Vec<f64>, previous: Vec<f64>) -> Result<Self> {
        check_len(current.len(), previous.len())?;
        Ok(Self { current, previous })
    }

    pub fn current(&self) -> &[f64] {
        &self.current
    }

    pub fn previous(&self) -> &[f64] {
        &self.previous
    }

    pub fn len(&self) -> usize {
        self.current.len()
    }

    pub fn is_empty(&self) -> bool {
        self.current.is_empty()
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.current, self.previous)
    }

    /// In-place version of [`step`]. Returns the a-priori error `e(n)`.
    ///
    /// On `Err(Error::NonFinite)` raised after the update has started, the
    /// state contents are unspecified; callers are expected to discard it.
    pub fn update(&mut self, sample: Sample<'_>, config: &FilterConfig) -> Result<f64> {
        check_len(self.len(), sample.x.len())?;
        if !sample.d.is_finite() || !all_finite(sample.x) {
            return Err(Error::NonFinite);
        }
        if !all_finite(&self.current) || !all_finite(&self.previous) {
            return Err(Error::NonFinite);
        }

        let e = error(self, sample)?;
        let algorithm = config.algorithm;
        let drive = if algorithm.uses_sign_error() {
            sgn(e)
        } else {
            e
        };
        let mu = config.mu;
        let rho = config.rho();
        let delta_r = config.delta_r;
        let penalized = algorithm.uses_reweighting();

        // After the swap `previous` holds w(n) and `current` still holds w(n-1),
        // which is overwritten element by element with w(n+1).
        std::mem::swap(&mut self.current, &mut self.previous);
        let mut finite = true;
        for ((next, &w), &x) in self
            .current
            .iter_mut()
            .zip(self.previous.iter())
            .zip(sample.x)
        {
            let older = *next;
            let mut delta = mu * x * drive;
            if penalized {
                delta -= rho * sgn(w) / (delta_r + older.abs());
            }
            *next = w + delta;
            finite &= next.is_finite();
        }
        if finite {
            Ok(e)
        } else {
            Err(Error::NonFinite)
        }
    }
}

/// One observation: regressor `x(n)` (newest sample first) and `d(n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<'a> {
    pub x: &'a [f64],
    pub d: f64,
}

impl<'a> Sample<'a> {
    pub fn new(x: &'a [f64], d: f64) -> Self {
        Self { x, d }
    }
}

/// Sign with `sgn(0) = 0`.
pub fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// A-priori estimation error `d(n) - w(n)ᵀ x(n)`.
pub fn error(state: &FilterState, sample: Sample<'_>) -> Result<f64> {
    check_len(state.len(), sample.x.len())?;
    Ok(sample.d - dot(&state.current, sample.x))
}

/// Reweighting vector `f_i = 1 / (delta_r + |previous_i|)`; every entry is
/// strictly positive.
pub fn reweight(previous: &[f64], delta_r: f64) -> Result<Vec<f64>> {
    if !(delta_r > 0.0) {
        return Err(Error::param(
            "delta_r",
            format!("must be positive, got {delta_r}"),
        ));
    }
    Ok(previous.iter().map(|p| 1.0 / (delta_r + p.abs())).collect())
}

/// Instantaneous cost `|e(n)| + lambda * sum_i f_i |w_i(n)|`, with `f` built
/// from `state.previous`.
pub fn cost(state: &FilterState, sample: Sample<'_>, config: &FilterConfig) -> Result<f64> {
    let e = error(state, sample)?;
    if config.lambda == 0.0 {
        return Ok(e.abs());
    }
    let weights = reweight(&state.previous, config.delta_r)?;
    let penalty: f64 = weights
        .iter()
        .zip(&state.current)
        .map(|(f, w)| (f * w).abs())
        .sum();
    Ok(e.abs() + config.lambda * penalty)
}

/// Pure single update. The returned state has `previous == state.current`.
pub fn step(state: &FilterState, sample: Sample<'_>, config: &FilterConfig) -> Result<FilterState> {
    let mut next = state.clone();
    next.update(sample, config)?;
    Ok(next)
}

/// A filter bound to one configuration, for streaming use.
#[derive(Debug, Clone)]
pub struct AdaptiveFilter {
    config: FilterConfig,
    state: FilterState,
}

impl AdaptiveFilter {
    pub fn new(config: FilterConfig, len: usize) -> Self {
        Self {
            config,
            state: FilterState::zeros(len),
        }
    }

    pub fn config(&self) -> &FilterConfig {
        &self.config
    }

    pub fn state(&self) -> &FilterState {
        &self.state
    }

    pub fn weights(&self) -> &[f64] {
        self.state.current()
    }

    /// Consumes one observation and returns the a-priori error.
    pub fn adapt(&mut self, x: &[f64], d: f64) -> Result<f64> {
        self.state.update(Sample::new(x, d), &self.config)
    }

    pub fn reset(&mut self) {
        self.state = FilterState::zeros(self.state.len());
    }
}
