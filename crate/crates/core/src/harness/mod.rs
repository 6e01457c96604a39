//! Monte Carlo experiments: single runs, averaged curves, the λ sweep with its
//! selection rule, and algorithm comparisons along the T or K axis.

mod config;
pub mod output;
mod seeding;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

pub use config::{default_lambda_grid, ExperimentConfig, PAPER_SCALE_RUNS};
pub use seeding::{RunRng, SeedSchedule};

use crate::channel::{generate_channel, generate_training, ChannelRealization};
use crate::error::{Error, Result};
use crate::filters::{dot, AdaptiveFilter, Algorithm, FilterConfig};
use crate::metrics::{
    aggregate, format_sig6, run_deviation, steady_state, AggregateCurve, MseTrace,
};
use crate::noise::{sigma_from_snr, GmmParams};

/// Everything one Monte Carlo run needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSpec {
    pub algorithm: Algorithm,
    pub mu: f64,
    pub lambda: f64,
    pub delta_r: f64,
    pub n: usize,
    pub k: usize,
    pub snr_db: f64,
    pub phi: f64,
    /// Impulsive strength `T`.
    pub strength: f64,
    pub iterations: usize,
    pub normalize_channel: bool,
}

impl RunSpec {
    pub fn from_config(
        config: &ExperimentConfig,
        algorithm: Algorithm,
        lambda: f64,
        k: usize,
        strength: f64,
    ) -> Self {
        Self {
            algorithm,
            mu: config.mu,
            lambda,
            delta_r: config.delta_r,
            n: config.n,
            k,
            snr_db: config.snr_db,
            phi: config.phi,
            strength,
            iterations: config.iterations,
            normalize_channel: config.normalize_channel_per_run,
        }
    }

    pub fn filter_config(&self) -> Result<FilterConfig> {
        FilterConfig::new(self.algorithm, self.mu, self.lambda, self.delta_r)
    }

    pub fn noise(&self) -> Result<GmmParams> {
        GmmParams::new(self.phi, sigma_from_snr(self.snr_db), self.strength)
    }

    fn validate(&self) -> Result<(FilterConfig, GmmParams)> {
        if self.iterations < 1 {
            return Err(Error::param("iterations", "must be >= 1"));
        }
        if self.k < 1 || self.k > self.n {
            return Err(Error::param(
                "k",
                format!(
                    "sparsity must satisfy 1 <= k <= n = {}, got {}",
                    self.n, self.k
                ),
            ));
        }
        Ok((self.filter_config()?, self.noise()?))
    }
}

/// Draws the channel a run with this spec sees first on its stream.
pub fn channel_for_run<R: Rng + ?Sized>(spec: &RunSpec, rng: &mut R) -> Result<ChannelRealization> {
    let mut channel = generate_channel(spec.n, spec.k, rng)?;
    if spec.normalize_channel {
        channel.normalize_energy();
    }
    Ok(channel)
}

/// One Monte Carlo run.
///
/// Draw order on `rng`: channel support and taps, then `iterations + n - 1`
/// training symbols, then one noise draw per update. `values[0]` is the
/// deviation of the zero initial estimate; `values[i]` follows `i` updates.
/// Regressors start at time `n - 1` so every one is fully excited.
pub fn run_once<R: Rng + ?Sized>(spec: &RunSpec, rng: &mut R) -> Result<MseTrace> {
    let (filter_config, noise) = spec.validate()?;
    let channel = channel_for_run(spec, rng)?;
    let training = generate_training(spec.iterations + spec.n - 1, rng)?;
    let regressors = training.regressors(spec.n);
    let sampler = noise.sampler();
    let truth = channel.taps();

    let mut filter = AdaptiveFilter::new(filter_config, spec.n);
    let mut values = Vec::with_capacity(spec.iterations);
    values.push(run_deviation(filter.weights(), truth)?);
    let mut diverged = false;
    for i in 1..spec.iterations {
        let x = regressors.at(spec.n - 2 + i)?;
        let d = dot(truth, x) + sampler.sample(rng);
        let deviation = match filter.adapt(x, d) {
            Ok(_) => run_deviation(filter.weights(), truth)?,
            Err(Error::NonFinite) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        if !deviation.is_finite() {
            diverged = true;
            let last = *values.last().expect("trace starts non-empty");
            values.resize(spec.iterations, last);
            break;
        }
        values.push(deviation);
    }
    Ok(MseTrace { values, diverged })
}

/// Runs `runs` independent traces, run `i` drawing from `rng_for(i)`.
/// Traces come back in run-index order whatever the thread count.
pub fn monte_carlo_traces<F, R>(spec: &RunSpec, runs: usize, rng_for: F) -> Result<Vec<MseTrace>>
where
    F: Fn(u64) -> R + Sync,
    R: Rng,
{
    if runs < 1 {
        return Err(Error::param("runs", "must be >= 1"));
    }
    spec.validate()?;
    (0..runs as u64)
        .into_par_iter()
        .map(|i| run_once(spec, &mut rng_for(i)))
        .collect()
}

/// Averaged curve over `runs` runs seeded from `seeds`.
pub fn monte_carlo(
    spec: &RunSpec,
    runs: usize,
    seeds: SeedSchedule,
    exclude_diverged: bool,
) -> Result<AggregateCurve> {
    let traces = monte_carlo_traces(spec, runs, |i| seeds.rng(i))?;
    aggregate(&traces, exclude_diverged)
}

/// Stable iff every point is finite, no run diverged, and the curve does not
/// end above where it started.
pub fn is_stable(curve: &AggregateCurve) -> bool {
    match (curve.initial(), curve.last()) {
        (Some(first), Some(last)) => {
            curve.diverged_runs == 0 && curve.mse_db.iter().all(|v| v.is_finite()) && last <= first
        }
        _ => false,
    }
}

/// Steady-state level and stability verdict of one (λ, K) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSummary {
    pub lambda: f64,
    pub k: usize,
    pub steady_state: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub summary: CellSummary,
    pub curve: AggregateCurve,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub cells: Vec<SweepCell>,
    pub selected_lambda: f64,
}

impl SweepResult {
    pub fn cell(&self, lambda: f64, k: usize) -> Option<&SweepCell> {
        self.cells
            .iter()
            .find(|c| c.summary.lambda == lambda && c.summary.k == k)
    }
}

pub fn lambda_label(lambda: f64) -> String {
    format!("lambda={}", format_sig6(lambda))
}

fn seeds_for(config: &ExperimentConfig, label: &str) -> SeedSchedule {
    if config.common_random_numbers {
        SeedSchedule::common(config.root_seed)
    } else {
        SeedSchedule::keyed(config.root_seed, label)
    }
}

/// Runs SLMS-RL1 for every (λ, K) in `lambda_grid × k_set` at `fixed_t`.
/// Cells are ordered by λ, then by K.
pub fn sweep_cells(config: &ExperimentConfig) -> Result<Vec<SweepCell>> {
    config.validate()?;
    if !config.algorithms.contains(&Algorithm::SlmsRl1) {
        return Err(Error::InvalidConfig(
            "the lambda sweep requires SLMS_RL1 among the algorithms".into(),
        ));
    }
    let mut cells = Vec::with_capacity(config.lambda_grid.len() * config.k_set.len());
    for &lambda in &config.lambda_grid {
        for &k in &config.k_set {
            let spec = RunSpec::from_config(config, Algorithm::SlmsRl1, lambda, k, config.fixed_t);
            let label = format!(
                "sweep|{}|{}|K={k}|T={}",
                spec.algorithm,
                lambda_label(lambda),
                format_sig6(config.fixed_t)
            );
            let curve = monte_carlo(
                &spec,
                config.runs,
                seeds_for(config, &label),
                config.exclude_diverged,
            )?;
            let summary = CellSummary {
                lambda,
                k,
                steady_state: steady_state(&curve, config.tail_fraction)?,
                stable: is_stable(&curve),
            };
            cells.push(SweepCell { summary, curve });
        }
    }
    Ok(cells)
}

/// Picks the λ that is stable for every K and has the lowest worst-case
/// steady-state MSE; ties go to the smaller λ.
pub fn select_lambda(cells: &[CellSummary]) -> Result<f64> {
    if cells.is_empty() {
        return Err(Error::Empty("sweep cells"));
    }
    let ks: BTreeSet<usize> = cells.iter().map(|c| c.k).collect();
    let mut lambdas: Vec<f64> = cells.iter().map(|c| c.lambda).collect();
    lambdas.sort_by(f64::total_cmp);
    lambdas.dedup();

    let mut best: Option<(f64, f64)> = None;
    for &lambda in &lambdas {
        let row: Vec<&CellSummary> = cells.iter().filter(|c| c.lambda == lambda).collect();
        let covered = ks.iter().all(|k| row.iter().any(|c| c.k == *k));
        if !covered || !row.iter().all(|c| c.stable) {
            continue;
        }
        let worst = row
            .iter()
            .map(|c| c.steady_state)
            .fold(f64::NEG_INFINITY, f64::max);
        // strict comparison keeps the smaller λ on ties
        if best.is_none_or(|(_, b)| worst < b) {
            best = Some((lambda, worst));
        }
    }

    best.map(|(lambda, _)| lambda)
        .ok_or_else(|| Error::SelectionInfeasible {
            diagnostic: verdict_table(cells),
        })
}

fn verdict_table(cells: &[CellSummary]) -> String {
    cells
        .iter()
        .map(|c| {
            format!(
                "  {} K={}: {} (steady state {} dB)",
                lambda_label(c.lambda),
                c.k,
                if c.stable { "stable" } else { "unstable" },
                format_sig6(c.steady_state)
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn repa_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    let cells = sweep_cells(config)?;
    let summaries: Vec<CellSummary> = cells.iter().map(|c| c.summary).collect();
    let selected_lambda = select_lambda(&summaries)?;
    Ok(SweepResult {
        cells,
        selected_lambda,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    /// Impulsive strength, values from `t_set`, K held at `fixed_k`.
    T,
    /// Sparsity, values from `k_set`, T held at `fixed_t`.
    K,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::T => "T",
            Axis::K => "K",
        })
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "T" | "t" => Ok(Axis::T),
            "K" | "k" => Ok(Axis::K),
            other => Err(Error::param(
                "axis",
                format!("expected T or K, got `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCurve {
    pub algorithm: Algorithm,
    pub axis_value: f64,
    pub label: String,
    pub curve: AggregateCurve,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub axis: Axis,
    pub curves: Vec<LabeledCurve>,
}

impl Comparison {
    pub fn get(&self, algorithm: Algorithm, axis_value: f64) -> Option<&LabeledCurve> {
        self.curves
            .iter()
            .find(|c| c.algorithm == algorithm && c.axis_value == axis_value)
    }
}

/// Runs every algorithm at every value of `axis`, λ fixed to `config.lambda`.
/// Curves are ordered by axis value, then by algorithm as listed.
pub fn compare_algorithms(config: &ExperimentConfig, axis: Axis) -> Result<Comparison> {
    config.validate()?;
    let points: Vec<(f64, usize, f64)> = match axis {
        Axis::T => config
            .t_set
            .iter()
            .map(|&t| (t, config.fixed_k, t))
            .collect(),
        Axis::K => config
            .k_set
            .iter()
            .map(|&k| (k as f64, k, config.fixed_t))
            .collect(),
    };
    let mut curves = Vec::with_capacity(points.len() * config.algorithms.len());
    for (axis_value, k, strength) in points {
        for &algorithm in &config.algorithms {
            let spec = RunSpec::from_config(config, algorithm, config.lambda, k, strength);
            let label = format!("{algorithm}@{axis}={}", format_sig6(axis_value));
            let seed_label = format!(
                "compare|{label}|K={k}|T={}|{}",
                format_sig6(strength),
                lambda_label(config.lambda)
            );
            let curve = monte_carlo(
                &spec,
                config.runs,
                seeds_for(config, &seed_label),
                config.exclude_diverged,
            )?;
            curves.push(LabeledCurve {
                algorithm,
                axis_value,
                label,
                curve,
            });
        }
    }
    Ok(Comparison { axis, curves })
}

/// Every configured algorithm at `(fixed_k, fixed_t, lambda)`.
pub fn run_single(config: &ExperimentConfig) -> Result<Vec<LabeledCurve>> {
    config.validate()?;
    config
        .algorithms
        .iter()
        .map(|&algorithm| {
            let spec = RunSpec::from_config(
                config,
                algorithm,
                config.lambda,
                config.fixed_k,
                config.fixed_t,
            );
            let label = algorithm.name().to_string();
            let seed_label = format!(
                "run|{label}|K={}|T={}|{}",
                config.fixed_k,
                format_sig6(config.fixed_t),
                lambda_label(config.lambda)
            );
            let curve = monte_carlo(
                &spec,
                config.runs,
                seeds_for(config, &seed_label),
                config.exclude_diverged,
            )?;
            Ok(LabeledCurve {
                algorithm,
                axis_value: config.fixed_t,
                label,
                curve,
            })
        })
        .collect()
}

/// Seed schedule `run_single` uses for `algorithm`, for re-deriving channels.
pub fn run_single_seeds(config: &ExperimentConfig, algorithm: Algorithm) -> SeedSchedule {
    let seed_label = format!(
        "run|{}|K={}|T={}|{}",
        algorithm.name(),
        config.fixed_k,
        format_sig6(config.fixed_t),
        lambda_label(config.lambda)
    );
    seeds_for(config, &seed_label)
}
