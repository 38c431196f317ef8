mod common;

use ksmatch::analysis::{truncated_poisson_param, truncated_poisson_variance};
use ksmatch::graph_model::{sample_core_degrees, sample_graph};
use ksmatch::ModelParams;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn initial_degree_fractions_follow_poisson_limit() {
    let params = ModelParams::from_alpha(100_000, 0.9, 3, 17).unwrap();
    let g = sample_graph(&params, &mut ChaCha8Rng::seed_from_u64(17));
    let m = params.m as f64;
    let state = g.degree_state();
    let p1 = 0.18145488439732437;
    let p2 = 0.7513396028629259;
    let sigma = |p: f64| (p * (1.0 - p) / m).sqrt();
    assert!((state.v1 as f64 / m - p1).abs() <= 3.0 * sigma(p1));
    assert!((state.v as f64 / m - p2).abs() <= 3.0 * sigma(p2));
    assert_eq!(state.w, 100_000);
    assert_eq!(g.recompute_degree_state(), state);
}

#[test]
fn right_degree_marginal_is_binomial() {
    // Degree of right vertex 0 over many small instances: Binomial(dn, 1/m).
    let params = ModelParams::new(40, 50, 3, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let trials = 4000;
    let total: u64 = (0..trials)
        .map(|_| sample_graph(&params, &mut rng).right_degree(0) as u64)
        .sum();
    let mean = total as f64 / trials as f64;
    let (dn, p) = (120.0, 1.0 / 50.0);
    let sd_of_mean = (dn * p * (1.0 - p) / trials as f64).sqrt();
    assert!((mean - dn * p).abs() <= 3.0 * sd_of_mean, "{mean}");
}

#[test]
fn core_degrees_match_conditioned_poisson_moments() {
    let m = 10_000;
    let degrees = sample_core_degrees(m, 30_000, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
    let mean = degrees.iter().map(|&k| k as f64).sum::<f64>() / m as f64;
    assert_eq!(mean, 3.0);
    let var = degrees.iter().map(|&k| (k as f64 - mean).powi(2)).sum::<f64>() / m as f64;
    // 1.2982515998141251 by direct pmf summation at zeta(3) = 2.1491257999
    let expected = 1.298_251_599_814_125;
    assert!((truncated_poisson_variance(truncated_poisson_param(3.0).unwrap()) - expected).abs() < 1e-9);
    assert!((var - expected).abs() / expected <= 0.05, "{var}");
}

proptest! {
    #[test]
    fn incremental_state_tracks_deletions(
        g in common::small_graph(10, 8),
        order in prop::collection::vec(0usize..10, 0..15),
    ) {
        let mut g = g;
        let d = g.d();
        prop_assert_eq!(g.degree_state(), g.recompute_degree_state());
        for l in order {
            if l < g.num_left() {
                g.delete_left(l);
            }
            prop_assert_eq!(g.degree_state(), g.recompute_degree_state());
            let sum: usize = g.right_degrees().iter().map(|&k| k as usize).sum();
            prop_assert_eq!(sum, d * g.live_left_count());
        }
    }

    #[test]
    fn core_degrees_min_two_exact_sum(m in 1usize..200, extra in 0usize..600, seed in any::<u64>()) {
        let total = 2 * m + extra;
        let degrees = sample_core_degrees(m, total, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(degrees.len(), m);
        prop_assert!(degrees.iter().all(|&k| k >= 2));
        prop_assert_eq!(degrees.iter().map(|&k| k as usize).sum::<usize>(), total);
    }

    #[test]
    fn sampled_blocks_are_in_range(n in 0usize..50, m in 1usize..50, d in 2usize..5, seed in any::<u64>()) {
        let params = ModelParams::new(n, m, d, seed).unwrap();
        let g = sample_graph(&params, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(g.num_left(), n);
        prop_assert_eq!(g.live_left_count(), n);
        prop_assert!(g.edges().all(|(_, r)| r < m));
        prop_assert_eq!(g.edges().count(), n * d);
    }
}
