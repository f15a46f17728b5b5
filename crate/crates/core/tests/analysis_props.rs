use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sicure::analysis::{
    curing_time_ratio, find_mgf_root_using, kl_divergence, min_geometric_param,
    path_reinfection_prob, phase_time_term, required_samples, simulate_path_race,
    simulate_stopped_walk, walk_mgf, walk_mgf_direct, MgfEvaluation, RandomWalkSpec, SampleMode,
};

fn walk_specs() -> impl Strategy<Value = RandomWalkSpec> {
    (1u64..30, 0.01f64..0.9, 0u64..2000, 1e-4f64..0.2)
        .prop_map(|(a, p, b, q)| RandomWalkSpec::new(a, p, b, q).unwrap())
}

proptest! {
    #[test]
    fn mgf_is_one_at_zero(spec in walk_specs()) {
        prop_assert_eq!(walk_mgf(0.0, &spec), 1.0);
        prop_assert_eq!(walk_mgf_direct(0.0, &spec), 1.0);
    }

    // The literal product underflows once (1 - mu)^{r^3/3} leaves double
    // range, so compare in the small-step regime.
    #[test]
    fn root_does_not_depend_on_evaluation(r in 2u64..40, tau in 1e-5f64..1e-3) {
        let spec = RandomWalkSpec::from_budget(r, tau).unwrap();
        let a = find_mgf_root_using(&spec, MgfEvaluation::LogSpace);
        let b = find_mgf_root_using(&spec, MgfEvaluation::Direct);
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert!((a - b).abs() <= 1e-9, "{a} vs {b}"),
            (Err(_), Err(_)) => prop_assert!(spec.drift() >= 0.0),
            (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
        }
    }

    #[test]
    fn kl_vanishes_only_on_the_diagonal(p in 0.0f64..=1.0, q in 0.001f64..0.999) {
        let d = kl_divergence(p, q).unwrap();
        if p == q {
            prop_assert_eq!(d, 0.0);
        } else {
            prop_assert!(d > 0.0);
        }
    }

    #[test]
    fn min_geometric_is_monotone(i in 1u32..50, mu in 0.001f64..0.99) {
        let base = min_geometric_param(i, mu);
        prop_assert!(min_geometric_param(i + 1, mu) >= base);
        prop_assert!(min_geometric_param(i, (mu + 0.005).min(1.0)) >= base);
    }

    #[test]
    fn anchored_path_form_is_mu_times_shorter_plain(m in 0u32..40, mu in 0.001f64..1.0, delta in 0.0f64..1.0) {
        let full = path_reinfection_prob(m, mu, delta).unwrap();
        prop_assert!((full.plain - full.ratio * full.ratio.powi(m as i32)).abs() <= 1e-15);
        if m > 0 {
            let shorter = path_reinfection_prob(m - 1, mu, delta).unwrap();
            prop_assert!((full.start_anchored - mu * shorter.plain).abs() <= 1e-15);
        }
    }

    #[test]
    fn sample_count_scales_inversely_with_divergence(eps in 0.001f64..0.5, d in 0.001f64..1.0) {
        let one = required_samples(eps, d, SampleMode::Single, 1, 1.0).unwrap();
        let half = required_samples(eps, 2.0 * d, SampleMode::Single, 1, 1.0).unwrap();
        prop_assert!(half <= one && one <= 2 * half + 1);
        let trees = required_samples(eps, d, SampleMode::MaxOfTrees, 8, 1.0).unwrap();
        prop_assert!(trees >= one);
    }
}

#[test]
fn kl_is_not_symmetric() {
    let a = kl_divergence(0.6, 0.5).unwrap();
    let b = kl_divergence(0.5, 0.6).unwrap();
    assert!((a - b).abs() > 1e-4);
}

#[test]
fn curing_ratio_increases_from_one_over_r() {
    for r in [0.5, 1.0, 4.0, 16.0] {
        let grid: Vec<f64> = (0..=400).map(|i| i as f64 * 0.005).collect();
        let values: Vec<f64> = grid.iter().map(|&x| curing_time_ratio(x, r)).collect();
        assert!(values.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(values[0], 1.0 / r);
        assert!((curing_time_ratio(1e-9, r) - 1.0 / r).abs() < 1e-6);
    }
}

#[test]
fn path_race_matches_event_race() {
    // Per step a cure comes first with probability delta, otherwise the
    // head moves with probability mu; so each advance beats the cure with
    // probability mu (1 - delta) / (delta + mu (1 - delta)).
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for (m, mu, delta) in [(0u32, 0.3f64, 0.2f64), (2, 0.5, 0.1), (4, 0.2, 0.05)] {
        let ratio = mu * (1.0 - delta) / (delta + mu * (1.0 - delta));
        let exact = ratio.powi(m as i32 + 1);
        let runs = 50_000;
        let hits = (0..runs)
            .filter(|_| simulate_path_race(m, mu, delta, &mut rng))
            .count();
        let p = hits as f64 / runs as f64;
        let sigma = (exact * (1.0 - exact) / runs as f64).sqrt();
        assert!((p - exact).abs() <= 4.0 * sigma, "m={m}: {p} vs {exact}");
        assert!((path_reinfection_prob(m, mu, delta).unwrap().plain - exact).abs() < 1e-15);
    }
}

#[test]
fn phase_terms_sum_to_anchored_series() {
    let (k, mu, delta) = (5u64, 0.3, 0.05);
    let total: f64 = (k..2000).map(|t| phase_time_term(t, k, mu, delta)).sum();
    let ratio = mu * (1.0 - delta) / (delta + mu * (1.0 - delta));
    let series = mu * ratio.powi(k as i32) / (delta + mu * (1.0 - delta));
    assert!(
        (total - series).abs() < 1e-10 * series,
        "{total} vs {series}"
    );
}

#[test]
fn stopped_walk_bookkeeping() {
    let spec = RandomWalkSpec::from_budget(4, 0.01).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..2000 {
        let w = simulate_stopped_walk(&spec, 5, -5, &mut rng).unwrap();
        assert!(w.value >= 5 || w.value <= -5);
        assert_eq!(w.value, w.cures as i64 - w.infections as i64);
        // Each step can move the walk by at most its trial counts.
        assert!(w.cures <= w.steps * spec.cure_trials);
    }
}
