use super::{check_probability, AnalysisError};

/// `x ln(x / y)` with the convention `0 ln(0 / y) = 0`.
fn xlogx_over_y(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if y == 0.0 {
        f64::INFINITY
    } else {
        x * (x / y).ln()
    }
}

/// Kullback-Leibler divergence between Bernoulli(p) and Bernoulli(q), in
/// nats. Returns `f64::INFINITY` when `q` is 0 or 1 and `p` differs.
pub fn kl_divergence(p: f64, q: f64) -> Result<f64, AnalysisError> {
    check_probability("p", p)?;
    check_probability("q", q)?;
    if p == q {
        return Ok(0.0);
    }
    Ok(xlogx_over_y(p, q) + xlogx_over_y(1.0 - p, 1.0 - q))
}
