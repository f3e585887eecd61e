//! CVaR against the sort-and-average tail oracle on large samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weakspot_core::{cvar, SampledRV};

/// Average of the worst (1 - beta) * n samples, by sorting.
fn tail_average_oracle(values: &[f64], beta: f64) -> f64 {
    let n = values.len();
    let m = ((1.0 - beta) * n as f64).round() as usize;
    assert!(m >= 1 && (m as f64 - (1.0 - beta) * n as f64).abs() < 1e-9);
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    sorted[..m].iter().sum::<f64>() / m as f64
}

#[test]
fn cvar_equals_tail_average_on_equal_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..10 {
        let values: Vec<f64> = (0..1000)
            .map(|_| rng.random_range(-10.0..10.0) * (1.0 + trial as f64))
            .collect();
        let rv = SampledRV::equal_weight(values.clone());
        for beta in [0.5, 0.9, 0.95] {
            let (got, _) = cvar(&rv, beta);
            let want = tail_average_oracle(&values, beta);
            assert!(
                (got - want).abs() <= 1e-10,
                "trial {trial}, beta {beta}: got {got}, want {want}"
            );
        }
    }
}

#[test]
fn cvar_equals_tail_average_with_ties() {
    // duplicated values around the quantile
    let mut values: Vec<f64> = (0..500).map(|i| (i / 5) as f64).collect();
    values.extend((0..500).map(|i| (i / 50) as f64));
    let rv = SampledRV::equal_weight(values.clone());
    for beta in [0.5, 0.9, 0.95] {
        let (got, _) = cvar(&rv, beta);
        let want = tail_average_oracle(&values, beta);
        assert!((got - want).abs() <= 1e-10, "beta {beta}: got {got}, want {want}");
    }
}
