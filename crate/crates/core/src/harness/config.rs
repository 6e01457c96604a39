use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::Algorithm;
use crate::metrics::DEFAULT_TAIL_FRACTION;

/// Monte Carlo runs used with `--paper-scale`.
pub const PAPER_SCALE_RUNS: usize = 1000;

/// Full experiment description. Field names double as config-file keys and
/// CLI flag names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Channel length N.
    pub n: usize,
    /// Sparsity levels swept by `sweep` and by `compare --axis K`.
    pub k_set: Vec<usize>,
    pub snr_db: f64,
    /// Mixture probability of the impulsive component.
    pub phi: f64,
    /// Impulsive strengths swept by `compare --axis T`.
    pub t_set: Vec<f64>,
    pub mu: f64,
    pub delta_r: f64,
    /// Candidate regularization weights for `sweep`; strictly increasing.
    pub lambda_grid: Vec<f64>,
    /// Regularization weight used by `compare` and `run`.
    pub lambda: f64,
    /// Sparsity held fixed when the other axis is swept.
    pub fixed_k: usize,
    /// Impulsive strength held fixed when the other axis is swept.
    pub fixed_t: f64,
    pub algorithms: Vec<Algorithm>,
    pub iterations: usize,
    pub runs: usize,
    pub root_seed: u64,
    pub tail_fraction: f64,
    pub exclude_diverged: bool,
    pub normalize_channel_per_run: bool,
    pub common_random_numbers: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 80,
            k_set: vec![4, 8, 16],
            snr_db: 10.0,
            phi: 0.1,
            t_set: vec![200.0, 400.0, 600.0],
            mu: 0.01,
            delta_r: 0.05,
            lambda_grid: default_lambda_grid(),
            lambda: 8e-3,
            fixed_k: 8,
            fixed_t: 400.0,
            algorithms: Algorithm::ALL.to_vec(),
            iterations: 20_000,
            runs: 100,
            root_seed: 2016,
            tail_fraction: DEFAULT_TAIL_FRACTION,
            exclude_diverged: false,
            normalize_channel_per_run: false,
            common_random_numbers: false,
        }
    }
}

/// Twelve log-spaced points on `[1e-4, 1e-1]` merged with 8e-3, 4e-2 and 8e-2.
pub fn default_lambda_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (0..12)
        .map(|i| 10f64.powf(-4.0 + 3.0 * i as f64 / 11.0))
        .chain([8e-3, 4e-2, 8e-2])
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n < 1 {
            return fail("n must be >= 1".into());
        }
        if self.k_set.is_empty() {
            return fail("k_set must not be empty".into());
        }
        for &k in self.k_set.iter().chain([&self.fixed_k]) {
            if k < 1 || k > self.n {
                return fail(format!("sparsity {k} outside 1..={}", self.n));
            }
        }
        if !self.snr_db.is_finite() {
            return fail("snr_db must be finite".into());
        }
        if !(0.0..=1.0).contains(&self.phi) {
            return fail(format!("phi must lie in [0, 1], got {}", self.phi));
        }
        if self.t_set.is_empty() {
            return fail("t_set must not be empty".into());
        }
        for &t in self.t_set.iter().chain([&self.fixed_t]) {
            if !(t.is_finite() && t >= 1.0) {
                return fail(format!("impulsive strength must be >= 1, got {t}"));
            }
        }
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return fail(format!("mu must be positive, got {}", self.mu));
        }
        if !(self.delta_r.is_finite() && self.delta_r > 0.0) {
            return fail(format!("delta_r must be positive, got {}", self.delta_r));
        }
        if self.lambda_grid.is_empty() {
            return fail("lambda_grid must not be empty".into());
        }
        if self
            .lambda_grid
            .iter()
            .any(|l| !(l.is_finite() && *l >= 0.0))
        {
            return fail("lambda_grid values must be finite and >= 0".into());
        }
        if self.lambda_grid.windows(2).any(|w| w[0] >= w[1]) {
            return fail("lambda_grid must be strictly increasing".into());
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return fail(format!("lambda must be >= 0, got {}", self.lambda));
        }
        if self.algorithms.is_empty() {
            return fail("algorithms must not be empty".into());
        }
        if self.iterations < 1 {
            return fail("iterations must be >= 1".into());
        }
        if self.runs < 1 {
            return fail("runs must be >= 1".into());
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction < 1.0) {
            return fail(format!(
                "tail_fraction must lie in (0, 1), got {}",
                self.tail_fraction
            ));
        }
        if self.root_seed > i64::MAX as u64 {
            return fail("root_seed must fit in a signed 64-bit integer".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.n, 80);
        assert_eq!(cfg.mu, 0.01);
        assert_eq!(cfg.delta_r, 0.05);
        assert_eq!(cfg.runs, 100);
    }

    #[test]
    fn default_grid_covers_discussed_values() {
        let grid = default_lambda_grid();
        assert_eq!(grid.len(), 15);
        for v in [8e-3, 4e-2, 8e-2] {
            assert!(grid.contains(&v));
        }
        assert!((grid[0] - 1e-4).abs() < 1e-18);
        assert!((grid[grid.len() - 1] - 1e-1).abs() < 1e-15);
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn toml_round_trip_and_partial_files() {
        let cfg = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);

        let partial = ExperimentConfig::from_toml(
            "runs = 7\nk_set = [2, 4]\nalgorithms = [\"SLMS_RL1\", \"LMS\"]\n",
        )
        .unwrap();
        assert_eq!(partial.runs, 7);
        assert_eq!(partial.k_set, vec![2, 4]);
        assert_eq!(partial.algorithms, vec![Algorithm::SlmsRl1, Algorithm::Lms]);
        assert_eq!(partial.n, 80);
    }

    #[test]
    fn rejects_invalid_configs() {
        let bad = [
            "iterations = 0",
            "runs = 0",
            "lambda_grid = [0.1, 0.01]",
            "lambda_grid = [0.01, 0.01]",
            "lambda_grid = [-1.0]",
            "k_set = [81]",
            "phi = 1.5",
            "t_set = [0.5]",
            "mu = 0.0",
            "unknown_key = 3",
            "tail_fraction = 1.0",
        ];
        for text in bad {
            assert!(
                matches!(
                    ExperimentConfig::from_toml(text),
                    Err(Error::InvalidConfig(_))
                ),
                "{text} should be rejected"
            );
        }
    }
}
