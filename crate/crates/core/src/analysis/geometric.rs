use rand::Rng;

/// Parameter of the minimum of `i` independent Geometric(`mu`) variables:
/// `1 - (1 - mu)^i`.
pub fn min_geometric_param(i: u32, mu: f64) -> f64 {
    assert!(i >= 1, "need at least one variable");
    -(i as f64 * (-mu).ln_1p()).exp_m1()
}

/// Expected steps for an infection front to add `k - 1` nodes when the
/// `i`-th addition races `i` edges: `sum_{i=1}^{k-1} 1 / (1 - (1 - mu)^i)`.
/// Behaves like `ln(k) / tau` for small `tau`.
pub fn expected_infection_steps(k: u32, mu: f64) -> f64 {
    (1..k).map(|i| 1.0 / min_geometric_param(i, mu)).sum()
}

/// Expected node-steps of observation produced by newly infected nodes
/// while `k` of them accumulate: `sum_{j=1}^{k-1} j / (1 - (1 - mu)^j)`.
pub fn expected_infected_samples(k: u32, mu: f64) -> f64 {
    (1..k).map(|j| j as f64 / min_geometric_param(j, mu)).sum()
}

/// `x / (1 - exp(-r x))`; increasing in `x` with limit `1 / r` at zero.
pub fn curing_time_ratio(x: f64, r: f64) -> f64 {
    if x == 0.0 {
        1.0 / r
    } else {
        x / -(-r * x).exp_m1()
    }
}

/// Trials up to and including the first success, support `1, 2, ...`.
pub fn sample_geometric<R: Rng + ?Sized>(mu: f64, rng: &mut R) -> u64 {
    let mut k = 1;
    while rng.random::<f64>() >= mu {
        k += 1;
    }
    k
}
