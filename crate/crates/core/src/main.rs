use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use slms_rl1::channel::write_channel_dump;
use slms_rl1::filters::Algorithm;
use slms_rl1::harness::{
    self, channel_for_run, output, Axis, CellSummary, ExperimentConfig, RunSpec, PAPER_SCALE_RUNS,
};
use slms_rl1::{selftest, Error};

#[derive(Parser)]
#[command(
    name = "slms-rl1",
    version,
    about = "Sparse channel estimation with sign LMS and reweighted L1 zero-attraction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep λ for SLMS-RL1 over every K and select a stable value
    Sweep(Common),
    /// Compare LMS, SLMS, LMS-RL1 and SLMS-RL1 along the T or K axis
    Compare {
        #[arg(long, value_parser = parse_axis)]
        axis: Axis,
        #[command(flatten)]
        common: Common,
    },
    /// Run every configured algorithm at a single (K, T, λ) point
    Run {
        /// Also write channels.csv with every run's channel per algorithm
        #[arg(long)]
        dump_channels: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Run the built-in invariant checks
    Selftest {
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Args)]
struct Common {
    /// TOML file with any subset of the config keys
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: out/<subcommand>)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; output does not depend on it
    #[arg(long)]
    threads: Option<usize>,
    /// Use M = 1000 Monte Carlo runs
    #[arg(long)]
    paper_scale: bool,
    #[command(flatten)]
    overrides: Overrides,
}

/// Same-named overrides for every config key.
#[derive(Args, Default)]
struct Overrides {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "k_set", alias = "k-set", value_delimiter = ',')]
    k_set: Option<Vec<usize>>,
    #[arg(long = "snr_db", alias = "snr-db", allow_hyphen_values = true)]
    snr_db: Option<f64>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long = "t_set", alias = "t-set", value_delimiter = ',')]
    t_set: Option<Vec<f64>>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long = "delta_r", alias = "delta-r")]
    delta_r: Option<f64>,
    #[arg(long = "lambda_grid", alias = "lambda-grid", value_delimiter = ',')]
    lambda_grid: Option<Vec<f64>>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long = "fixed_k", alias = "fixed-k")]
    fixed_k: Option<usize>,
    #[arg(long = "fixed_t", alias = "fixed-t")]
    fixed_t: Option<f64>,
    #[arg(long, value_delimiter = ',', value_parser = parse_algorithm)]
    algorithms: Option<Vec<Algorithm>>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long = "root_seed", alias = "root-seed")]
    root_seed: Option<u64>,
    #[arg(long = "tail_fraction", alias = "tail-fraction")]
    tail_fraction: Option<f64>,
    #[arg(long = "exclude_diverged", alias = "exclude-diverged")]
    exclude_diverged: bool,
    #[arg(
        long = "normalize_channel_per_run",
        alias = "normalize-channel-per-run"
    )]
    normalize_channel_per_run: bool,
    #[arg(long = "common_random_numbers", alias = "common-random-numbers")]
    common_random_numbers: bool,
}

fn parse_axis(s: &str) -> Result<Axis, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl Overrides {
    fn apply(self, cfg: &mut ExperimentConfig) {
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { cfg.$field = v; })*
            };
        }
        set!(
            n,
            k_set,
            snr_db,
            phi,
            t_set,
            mu,
            delta_r,
            lambda_grid,
            lambda,
            fixed_k,
            fixed_t,
            algorithms,
            iterations,
            runs,
            root_seed,
            tail_fraction
        );
        cfg.exclude_diverged |= self.exclude_diverged;
        cfg.normalize_channel_per_run |= self.normalize_channel_per_run;
        cfg.common_random_numbers |= self.common_random_numbers;
    }
}

impl Common {
    /// Defaults, then the config file, then `--paper-scale`, then flags.
    fn resolve(
        self,
        subcommand: &str,
    ) -> anyhow::Result<(ExperimentConfig, PathBuf, Option<usize>)> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                ExperimentConfig::from_toml(&text)?
            }
            None => ExperimentConfig::default(),
        };
        if self.paper_scale {
            cfg.runs = PAPER_SCALE_RUNS;
        }
        self.overrides.apply(&mut cfg);
        cfg.validate()?;
        let out = self
            .out
            .unwrap_or_else(|| Path::new("out").join(subcommand));
        Ok((cfg, out, self.threads))
    }
}

fn with_threads<T: Send>(
    threads: Option<usize>,
    job: impl FnOnce() -> T + Send,
) -> anyhow::Result<T> {
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
            Ok(pool.install(job))
        }
        None => Ok(job()),
    }
}

fn sweep(common: Common) -> anyhow::Result<ExitCode> {
    let (cfg, out, threads) = common.resolve("sweep")?;
    output::write_config_echo(&out, &cfg)?;
    let cells = with_threads(threads, || harness::sweep_cells(&cfg))??;
    output::write_sweep_csvs(&out, &cells)?;
    let summaries: Vec<CellSummary> = cells.iter().map(|c| c.summary).collect();
    let selection = harness::select_lambda(&summaries);
    output::write_selection(&out, &cells, &selection)?;
    for c in &summaries {
        println!(
            "lambda={:<12} K={:<3} steady={:>9.3} dB  {}",
            c.lambda,
            c.k,
            c.steady_state,
            if c.stable { "stable" } else { "UNSTABLE" }
        );
    }
    match selection {
        Ok(lambda) => {
            println!("selected lambda = {lambda}");
            Ok(ExitCode::SUCCESS)
        }
        Err(e) => Err(e.into()),
    }
}

fn compare(axis: Axis, common: Common) -> anyhow::Result<ExitCode> {
    let (cfg, out, threads) = common.resolve("compare")?;
    output::write_config_echo(&out, &cfg)?;
    let comparison = with_threads(threads, || harness::compare_algorithms(&cfg, axis))??;
    let path = output::write_comparison(&out, &comparison)?;
    for c in &comparison.curves {
        let steady = slms_rl1::metrics::steady_state(&c.curve, cfg.tail_fraction)?;
        println!("{:<22} steady={steady:>9.3} dB", c.label);
    }
    println!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn run(dump_channels: bool, common: Common) -> anyhow::Result<ExitCode> {
    let (cfg, out, threads) = common.resolve("run")?;
    output::write_config_echo(&out, &cfg)?;
    let curves = with_threads(threads, || harness::run_single(&cfg))??;
    let path = output::write_run(&out, &curves)?;
    for c in &curves {
        let steady = slms_rl1::metrics::steady_state(&c.curve, cfg.tail_fraction)?;
        println!("{:<10} steady={steady:>9.3} dB", c.label);
    }
    if dump_channels {
        let mut channels = Vec::new();
        for &algorithm in &cfg.algorithms {
            let spec = RunSpec::from_config(&cfg, algorithm, cfg.lambda, cfg.fixed_k, cfg.fixed_t);
            let seeds = harness::run_single_seeds(&cfg, algorithm);
            for run in 0..cfg.runs as u64 {
                channels.push((run, channel_for_run(&spec, &mut seeds.rng(run))?));
            }
            if cfg.common_random_numbers {
                break;
            }
        }
        let file = std::fs::File::create(out.join("channels.csv"))?;
        write_channel_dump(
            std::io::BufWriter::new(file),
            channels.iter().map(|(run, ch)| (*run, ch)),
        )?;
    }
    println!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn selftest(seed: u64) -> ExitCode {
    let checks = selftest::run_all(seed);
    let mut ok = true;
    for c in &checks {
        println!(
            "[{}] {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
        ok &= c.passed;
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::InvalidConfig(_) | Error::InvalidParameter { .. }) => 2,
        Some(Error::SelectionInfeasible { .. }) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep(common) => sweep(common),
        Command::Compare { axis, common } => compare(axis, common),
        Command::Run {
            dump_channels,
            common,
        } => run(dump_channels, common),
        Command::Selftest { seed } => Ok(selftest(seed)),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
