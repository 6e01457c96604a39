//! Fast invariant checks run by the `selftest` subcommand.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::generate_channel;
use crate::filters::{cost, reweight, sgn, step, Algorithm, FilterConfig, FilterState, Sample};
use crate::harness::{monte_carlo, RunSpec, SeedSchedule};
use crate::metrics::{aggregate, MseTrace};
use crate::noise::GmmParams;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name,
        passed,
        detail: detail.into(),
    }
}

fn random_state(rng: &mut ChaCha8Rng, n: usize) -> FilterState {
    let current = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let previous = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    FilterState::from_parts(current, previous).expect("equal lengths")
}

fn reduction_identity(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 16;
    let pairs = [
        (Algorithm::SlmsRl1, Algorithm::Slms),
        (Algorithm::LmsRl1, Algorithm::Lms),
    ];
    for (penalized, plain) in pairs {
        let a_cfg = FilterConfig::new(penalized, 0.01, 0.0, 0.05).expect("valid");
        let b_cfg = FilterConfig::new(plain, 0.01, 0.0, 0.05).expect("valid");
        let mut a = FilterState::zeros(n);
        let mut b = FilterState::zeros(n);
        for _ in 0..200 {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let d = rng.random_range(-2.0..2.0);
            a.update(Sample::new(&x, d), &a_cfg).expect("finite");
            b.update(Sample::new(&x, d), &b_cfg).expect("finite");
            if a != b {
                return check(
                    "reduction identities",
                    false,
                    format!("{penalized} with lambda=0 departed from {plain}"),
                );
            }
        }
    }
    check("reduction identities", true, "200 steps, N=16")
}

fn worked_step() -> Check {
    let cfg = FilterConfig::new(Algorithm::SlmsRl1, 0.01, 0.1, 0.05).expect("valid");
    let state = FilterState::from_parts(vec![0.5, -0.2], vec![0.4, -0.1]).expect("valid");
    let next = step(&state, Sample::new(&[1.0, -1.0], 0.4), &cfg).expect("finite");
    let expected = [0.5 - 0.01 - 0.001 / 0.45, -0.2 + 0.01 + 0.001 / 0.15];
    let err = next
        .current()
        .iter()
        .zip(expected)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    check(
        "worked SLMS-RL1 step",
        err < 1e-12,
        format!("max abs error {err:.3e}"),
    )
}

fn reweight_positivity(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<f64> = (0..1000).map(|_| rng.random_range(-5.0..5.0)).collect();
    let prev: Vec<f64> = (0..1000).map(|_| rng.random_range(-5.0..5.0)).collect();
    let f = reweight(&prev, 0.05).expect("valid threshold");
    let ok =
        f.iter().all(|&v| v > 0.0) && f.iter().zip(&w).all(|(fi, wi)| sgn(fi * wi) == sgn(*wi));
    check("reweight positivity", ok, "1000 random entries")
}

fn subgradient(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = FilterConfig::new(Algorithm::SlmsRl1, 0.01, 0.1, 0.05).expect("valid");
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let state = random_state(&mut rng, 8);
        let x: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let d = rng.random_range(-3.0..3.0);
        let next = step(&state, Sample::new(&x, d), &cfg).expect("finite");
        let mut diff = 0.0;
        let mut norm = 0.0;
        for i in 0..8 {
            let probe = |delta: f64| {
                let mut w = state.current().to_vec();
                w[i] += delta;
                let s = FilterState::from_parts(w, state.previous().to_vec()).expect("valid");
                cost(&s, Sample::new(&x, d), &cfg).expect("valid")
            };
            let grad = (probe(h) - probe(-h)) / (2.0 * h);
            let direction = next.current()[i] - state.current()[i];
            diff += (direction + cfg.mu() * grad).powi(2);
            norm += direction.powi(2);
        }
        worst = worst.max((diff / norm).sqrt());
    }
    check(
        "subgradient consistency",
        worst < 1e-4,
        format!("worst relative error {worst:.3e}"),
    )
}

fn gmm_variance(seed: u64) -> Check {
    let params = GmmParams::new(0.1, 0.1, 400.0).expect("valid");
    let sampler = params.sampler();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws = 1_000_000;
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..draws {
        let z = sampler.sample(&mut rng);
        s += z;
        s2 += z * z;
    }
    let mean = s / draws as f64;
    let var = s2 / draws as f64 - mean * mean;
    let rel = (var / params.analytic_variance() - 1.0).abs();
    check(
        "GMM variance",
        rel < 0.03,
        format!("empirical {var:.4} vs 4.09"),
    )
}

fn channel_energy(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reps = 20_000;
    let mut energy = 0.0;
    for _ in 0..reps {
        let ch = generate_channel(80, 8, &mut rng).expect("valid");
        if ch.taps().iter().filter(|&&w| w != 0.0).count() != 8 {
            return check("channel generator", false, "wrong nonzero count");
        }
        energy += ch.energy();
    }
    let mean = energy / reps as f64;
    check(
        "channel generator",
        (mean - 1.0).abs() < 0.03,
        format!("mean energy {mean:.4}"),
    )
}

fn metrics_exactness() -> Check {
    let a = MseTrace::new(vec![1.0, 0.37, 0.021]);
    let single = aggregate(std::slice::from_ref(&a), false).expect("non-empty");
    let double = aggregate(&[a.clone(), a], false).expect("non-empty");
    let pair =
        aggregate(&[MseTrace::new(vec![0.1]), MseTrace::new(vec![0.3])], false).expect("non-empty");
    let ok = single.mse_db == double.mse_db && (pair.mse_db[0] - -6.9897).abs() < 1e-4;
    check(
        "metrics exactness",
        ok,
        format!("two-run mean {:.5} dB", pair.mse_db[0]),
    )
}

fn determinism(seed: u64) -> Check {
    let spec = RunSpec {
        algorithm: Algorithm::SlmsRl1,
        mu: 0.01,
        lambda: 8e-3,
        delta_r: 0.05,
        n: 16,
        k: 2,
        snr_db: 10.0,
        phi: 0.1,
        strength: 400.0,
        iterations: 500,
        normalize_channel: false,
    };
    let seeds = SeedSchedule::keyed(seed, "selftest");
    let a = monte_carlo(&spec, 8, seeds, false);
    let b = monte_carlo(&spec, 8, seeds, false);
    let ok = matches!((&a, &b), (Ok(x), Ok(y)) if x == y);
    check(
        "Monte Carlo determinism",
        ok,
        "8 runs x 500 iterations, twice",
    )
}

pub fn run_all(seed: u64) -> Vec<Check> {
    vec![
        reduction_identity(seed),
        worked_step(),
        reweight_positivity(seed),
        subgradient(seed),
        gmm_variance(seed),
        channel_energy(seed),
        metrics_exactness(),
        determinism(seed),
    ]
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_checks_pass() {
        for c in super::run_all(11) {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
