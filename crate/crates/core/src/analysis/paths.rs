use rand::Rng;
use statrs::function::gamma::ln_gamma;

use super::{check_probability, AnalysisError};
use crate::engine::cure_probability;

/// Lower bounds on the probability that an infection walks down a path of
/// `m` susceptible nodes before the path is cured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathReinfection {
    /// `ratio^{m+1}`.
    pub plain: f64,
    /// `mu * ratio^m`, for a path whose first infection lands on the first
    /// step.
    pub start_anchored: f64,
    /// `mu (1 - delta) / (delta + mu (1 - delta))`: the chance that the head
    /// advances before any cure.
    pub ratio: f64,
}

fn advance_ratio(mu: f64, delta: f64) -> f64 {
    if mu == 0.0 {
        return 0.0;
    }
    let m = mu * (1.0 - delta);
    m / (delta + m)
}

pub fn path_reinfection_prob(
    m: u32,
    mu: f64,
    delta: f64,
) -> Result<PathReinfection, AnalysisError> {
    check_probability("mu", mu)?;
    check_probability("delta", delta)?;
    let ratio = advance_ratio(mu, delta);
    Ok(PathReinfection {
        plain: ratio.powi(m as i32 + 1),
        start_anchored: mu * ratio.powi(m as i32),
        ratio,
    })
}

/// One race along a path: each step the path is cured with probability
/// `delta` (ending the race), otherwise the head advances with probability
/// `mu`. True when `m + 1` advances happen first.
pub fn simulate_path_race<R: Rng + ?Sized>(m: u32, mu: f64, delta: f64, rng: &mut R) -> bool {
    let mut advanced = 0;
    loop {
        if rng.random::<f64>() < delta {
            return false;
        }
        if rng.random::<f64>() < mu {
            advanced += 1;
            if advanced == m + 1 {
                return true;
            }
        }
    }
}

/// `C(t, k) mu^{k+1} (1 - mu)^{t-k} (1 - delta)^t`: probability that a
/// path of `k` nodes fills in exactly `t` steps with no cure. Summing over
/// `t >= k` gives `mu ratio^k / (delta + mu (1 - delta))`.
pub fn phase_time_term(t: u64, k: u64, mu: f64, delta: f64) -> f64 {
    if t < k {
        return 0.0;
    }
    let ln_choose =
        ln_gamma(t as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((t - k) as f64 + 1.0);
    let ln = ln_choose
        + (k as f64 + 1.0) * mu.ln()
        + (t - k) as f64 * (-mu).ln_1p()
        + t as f64 * (-delta).ln_1p();
    ln.exp()
}

/// Inputs to the one-step escape bound on a complete binary tree of `n`
/// nodes with budget `r = ln^alpha n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EscapeParams {
    pub n: usize,
    pub r: f64,
    pub tau: f64,
    pub alpha: f64,
    pub mu: f64,
    pub delta: f64,
}

impl EscapeParams {
    pub fn new(n: usize, alpha: f64, tau: f64) -> Result<Self, AnalysisError> {
        if n < 16 {
            return Err(AnalysisError::InvalidArgument(format!(
                "need ln ln n > 0 for a meaningful bound, got n = {n}"
            )));
        }
        if !(alpha > 0.0 && tau > 0.0) {
            return Err(AnalysisError::InvalidArgument(format!(
                "alpha = {alpha}, tau = {tau}"
            )));
        }
        let r = (n as f64).ln().powf(alpha);
        Ok(Self {
            n,
            r,
            tau,
            alpha,
            mu: cure_probability(1.0, tau),
            delta: cure_probability(r, tau),
        })
    }

    /// Same point with a different total cure probability.
    pub fn with_delta(self, delta: f64) -> Self {
        Self { delta, ..self }
    }

    pub fn ln_ln_n(&self) -> f64 {
        (self.n as f64).ln().ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EscapeBound {
    pub product: f64,
    pub ln_product: f64,
    /// `tau / (2 e^3 e^{12 alpha^2 (ln ln n)^2})`.
    pub tau_limit: f64,
    pub ln_tau_limit: f64,
}

/// Lower bound on the probability that an escape starts at a given step:
/// `mu ratio^{12 alpha ln ln n} g^{3r} / 2` with
/// `g = mu e^{-tau/r} / ((1 - e^{-tau/r}) + mu e^{-tau/r})`.
pub fn escape_one_step_lower_bound(params: &EscapeParams) -> EscapeBound {
    let EscapeParams {
        r,
        tau,
        alpha,
        mu,
        delta,
        ..
    } = *params;
    let lnln = params.ln_ln_n();
    let ratio = advance_ratio(mu, delta);
    let keep = (-tau / r).exp();
    let g = mu * keep / (-(-tau / r).exp_m1() + mu * keep);
    let ln_product =
        mu.ln() + 12.0 * alpha * lnln * ratio.ln() + 3.0 * r * g.ln() - std::f64::consts::LN_2;
    let ln_tau_limit = tau.ln() - std::f64::consts::LN_2 - 3.0 - 12.0 * alpha * alpha * lnln * lnln;
    EscapeBound {
        product: ln_product.exp(),
        ln_product,
        tau_limit: ln_tau_limit.exp(),
        ln_tau_limit,
    }
}
