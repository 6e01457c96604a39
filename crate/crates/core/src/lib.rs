//! Sparse FIR channel estimation under Gaussian-mixture impulsive noise.
//!
//! The crate provides the sign LMS estimator with a reweighted L1
//! zero-attractor (SLMS-RL1) together with the LMS, SLMS and LMS-RL1
//! baselines, the channel and noise simulators they are evaluated against,
//! and a Monte Carlo harness that sweeps the regularization weight λ, picks
//! one that converges stably for every sparsity level, and compares the four
//! estimators.
//!
//! ```
//! use slms_rl1::filters::{step, Algorithm, FilterConfig, FilterState, Sample};
//!
//! let config = FilterConfig::new(Algorithm::SlmsRl1, 0.01, 0.1, 0.05).unwrap();
//! let state = FilterState::from_parts(vec![0.5, -0.2], vec![0.4, -0.1]).unwrap();
//! let next = step(&state, Sample::new(&[1.0, -1.0], 0.4), &config).unwrap();
//! assert!((next.current()[0] - 0.487778).abs() < 1e-6);
//! ```

pub mod channel;
pub mod error;
pub mod filters;
pub mod harness;
pub mod metrics;
pub mod noise;
pub mod selftest;

pub use error::{Error, Result};
pub use filters::{AdaptiveFilter, Algorithm, FilterConfig, FilterState, Sample};
pub use harness::ExperimentConfig;
