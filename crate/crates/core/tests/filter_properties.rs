use proptest::collection::vec;
use proptest::prelude::*;

use slms_rl1::filters::{cost, reweight, sgn, step, Algorithm, FilterConfig, FilterState, Sample};

const N: usize = 12;

fn coeffs(len: usize) -> impl Strategy<Value = Vec<f64>> {
    vec(-2.0f64..2.0, len)
}

fn state() -> impl Strategy<Value = FilterState> {
    (coeffs(N), coeffs(N)).prop_map(|(c, p)| FilterState::from_parts(c, p).unwrap())
}

/// Central-difference gradient of the cost w.r.t. the current estimate with
/// the reweighting frozen at `state.previous`.
fn numeric_gradient(
    state: &FilterState,
    x: &[f64],
    d: f64,
    cfg: &FilterConfig,
    h: f64,
) -> Vec<f64> {
    (0..state.len())
        .map(|i| {
            let probe = |delta: f64| {
                let mut w = state.current().to_vec();
                w[i] += delta;
                let s = FilterState::from_parts(w, state.previous().to_vec()).unwrap();
                cost(&s, Sample::new(x, d), cfg).unwrap()
            };
            (probe(h) - probe(-h)) / (2.0 * h)
        })
        .collect()
}

proptest! {
    #[test]
    fn unpenalized_rl1_variants_reduce_exactly(
        inputs in vec((coeffs(N), -3.0f64..3.0), 1..60),
        mu in 1e-4f64..0.05,
    ) {
        for (penalized, plain) in [
            (Algorithm::SlmsRl1, Algorithm::Slms),
            (Algorithm::LmsRl1, Algorithm::Lms),
        ] {
            let a_cfg = FilterConfig::new(penalized, mu, 0.0, 0.05).unwrap();
            let b_cfg = FilterConfig::new(plain, mu, 0.0, 0.05).unwrap();
            let mut a = FilterState::zeros(N);
            let mut b = FilterState::zeros(N);
            for (x, d) in &inputs {
                a = step(&a, Sample::new(x, *d), &a_cfg).unwrap();
                b = step(&b, Sample::new(x, *d), &b_cfg).unwrap();
                prop_assert_eq!(a.current(), b.current());
            }
        }
    }

    #[test]
    fn reweighted_product_keeps_sign(w in coeffs(N), prev in coeffs(N), delta in 1e-3f64..1.0) {
        let f = reweight(&prev, delta).unwrap();
        prop_assert_eq!(f.len(), prev.len());
        for ((fi, wi), pi) in f.iter().zip(&w).zip(&prev) {
            prop_assert!(*fi > 0.0);
            prop_assert_eq!(sgn(fi * wi), sgn(*wi));
            prop_assert!((fi - 1.0 / (delta + pi.abs())).abs() < 1e-15 * fi.max(1.0));
        }
    }

    #[test]
    fn zero_attractor_pulls_toward_zero(
        mut current in coeffs(N),
        previous in coeffs(N),
        lambda in 1e-3f64..1.0,
        zeros in vec(any::<bool>(), N),
    ) {
        for (c, z) in current.iter_mut().zip(&zeros) {
            if *z { *c = 0.0; }
        }
        let cfg = FilterConfig::new(Algorithm::SlmsRl1, 0.01, lambda, 0.05).unwrap();
        let s = FilterState::from_parts(current.clone(), previous.clone()).unwrap();
        // no excitation and d = 0 force e = 0
        let next = step(&s, Sample::new(&[0.0; N], 0.0), &cfg).unwrap();
        for i in 0..N {
            let w = current[i];
            let moved = next.current()[i];
            if w == 0.0 {
                prop_assert_eq!(moved, 0.0);
            } else {
                let expected = cfg.rho() / (0.05 + previous[i].abs());
                prop_assert!(((w - moved).abs() - expected).abs() < 1e-14);
                prop_assert_eq!(sgn(w - moved), sgn(w));
            }
        }
    }

    #[test]
    fn slms_rl1_step_is_bounded(
        s in state(),
        x in coeffs(N),
        d in -50.0f64..50.0,
        mu in 1e-4f64..0.1,
        lambda in 0.0f64..2.0,
        delta in 1e-3f64..1.0,
    ) {
        let cfg = FilterConfig::new(Algorithm::SlmsRl1, mu, lambda, delta).unwrap();
        let next = step(&s, Sample::new(&x, d), &cfg).unwrap();
        let x_inf = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let bound = mu * x_inf + cfg.rho() / delta;
        for (a, b) in next.current().iter().zip(s.current()) {
            prop_assert!((a - b).abs() <= bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn step_chains_previous(s in state(), x in coeffs(N), d in -5.0f64..5.0, alg in 0usize..4) {
        let cfg = FilterConfig::new(Algorithm::ALL[alg], 0.01, 0.1, 0.05).unwrap();
        let next = step(&s, Sample::new(&x, d), &cfg).unwrap();
        prop_assert_eq!(next.previous(), s.current());
        let mut in_place = s.clone();
        in_place.update(Sample::new(&x, d), &cfg).unwrap();
        prop_assert_eq!(in_place, next);
    }

    #[test]
    fn cost_is_nonnegative_and_reduces_at_zero_lambda(s in state(), x in coeffs(N), d in -5.0f64..5.0) {
        let cfg = FilterConfig::new(Algorithm::SlmsRl1, 0.01, 0.3, 0.05).unwrap();
        prop_assert!(cost(&s, Sample::new(&x, d), &cfg).unwrap() >= 0.0);
        let plain = FilterConfig::new(Algorithm::SlmsRl1, 0.01, 0.0, 0.05).unwrap();
        let e = slms_rl1::filters::error(&s, Sample::new(&x, d)).unwrap();
        prop_assert_eq!(cost(&s, Sample::new(&x, d), &plain).unwrap(), e.abs());
    }

    #[test]
    fn step_descends_along_cost_subgradient(
        s in state(),
        x in coeffs(N),
        d in -5.0f64..5.0,
        lambda in 1e-3f64..0.5,
    ) {
        prop_assume!(s.current().iter().all(|w| w.abs() > 0.01));
        let e = slms_rl1::filters::error(&s, Sample::new(&x, d)).unwrap();
        prop_assume!(e.abs() > 0.01);
        let cfg = FilterConfig::new(Algorithm::SlmsRl1, 0.01, lambda, 0.05).unwrap();
        let next = step(&s, Sample::new(&x, d), &cfg).unwrap();
        let grad = numeric_gradient(&s, &x, d, &cfg, 1e-6);
        let (mut diff, mut norm) = (0.0, 0.0);
        for i in 0..N {
            let direction = next.current()[i] - s.current()[i];
            diff += (direction + cfg.mu() * grad[i]).powi(2);
            norm += direction.powi(2);
        }
        prop_assert!((diff / norm).sqrt() < 1e-4, "relative error {}", (diff / norm).sqrt());
    }
}
