use rand::Rng;
use rand_distr::{Binomial, Distribution};

use super::{check_probability, AnalysisError};
use crate::engine::cure_probability;

/// Residual tolerance for the MGF root, on `ln M(x)`.
pub const ROOT_TOLERANCE: f64 = 1e-12;
pub const ROOT_MAX_ITERATIONS: usize = 200;

/// Increments `A - B` with `A ~ Bin(cure_trials, cure_prob)` and
/// `B ~ Bin(infect_trials, infect_prob)`: the net number of cures minus
/// infections in one step when the budget is spread over `r` nodes and the
/// cut is about `r^3 / 3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomWalkSpec {
    pub cure_trials: u64,
    pub cure_prob: f64,
    pub infect_trials: u64,
    pub infect_prob: f64,
}

impl RandomWalkSpec {
    pub fn new(
        cure_trials: u64,
        cure_prob: f64,
        infect_trials: u64,
        infect_prob: f64,
    ) -> Result<Self, AnalysisError> {
        check_probability("cure_prob", cure_prob)?;
        check_probability("infect_prob", infect_prob)?;
        Ok(Self {
            cure_trials,
            cure_prob,
            infect_trials,
            infect_prob,
        })
    }

    /// Walk for budget `r` at step `tau`: `r` cure trials at
    /// `delta = 1 - e^{-r tau}` against `floor(r^3 / 3)` infection trials at
    /// `mu = 1 - e^{-tau}`.
    pub fn from_budget(r: u64, tau: f64) -> Result<Self, AnalysisError> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(AnalysisError::InvalidArgument(format!("tau = {tau}")));
        }
        Self::new(
            r,
            cure_probability(r as f64, tau),
            r.pow(3) / 3,
            cure_probability(1.0, tau),
        )
    }

    /// `E[A - B]`.
    pub fn drift(&self) -> f64 {
        self.cure_trials as f64 * self.cure_prob - self.infect_trials as f64 * self.infect_prob
    }
}

/// `ln(1 + p (e^x - 1))`, stable for large `|x|`.
fn log_bernoulli_mgf(p: f64, x: f64) -> f64 {
    if p == 0.0 {
        return 0.0;
    }
    if x > 30.0 {
        x + (p + (1.0 - p) * (-x).exp()).ln()
    } else {
        (p * x.exp_m1()).ln_1p()
    }
}

/// `ln E[e^{x (A - B)}]`.
pub fn walk_log_mgf(x: f64, spec: &RandomWalkSpec) -> f64 {
    spec.cure_trials as f64 * log_bernoulli_mgf(spec.cure_prob, x)
        + spec.infect_trials as f64 * log_bernoulli_mgf(spec.infect_prob, -x)
}

/// `(delta e^x + 1 - delta)^r (mu e^{-x} + 1 - mu)^{infect_trials}`,
/// evaluated in log space. Saturates to infinity rather than overflowing
/// in an intermediate.
pub fn walk_mgf(x: f64, spec: &RandomWalkSpec) -> f64 {
    walk_log_mgf(x, spec).exp()
}

/// Same product evaluated literally, for cross-checks.
pub fn walk_mgf_direct(x: f64, spec: &RandomWalkSpec) -> f64 {
    let cure = spec.cure_prob * x.exp() + (1.0 - spec.cure_prob);
    let infect = spec.infect_prob * (-x).exp() + (1.0 - spec.infect_prob);
    cure.powf(spec.cure_trials as f64) * infect.powf(spec.infect_trials as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MgfEvaluation {
    LogSpace,
    Direct,
}

/// The positive root of `M(x) = 1`.
pub fn find_mgf_root(spec: &RandomWalkSpec) -> Result<f64, AnalysisError> {
    find_mgf_root_using(spec, MgfEvaluation::LogSpace)
}

pub fn find_mgf_root_using(
    spec: &RandomWalkSpec,
    evaluation: MgfEvaluation,
) -> Result<f64, AnalysisError> {
    let drift = spec.drift();
    // With no cures the MGF is below one for every positive x.
    if drift >= 0.0 || spec.cure_trials == 0 || spec.cure_prob == 0.0 {
        return Err(AnalysisError::NoPositiveRoot { drift });
    }
    let f = |x: f64| match evaluation {
        MgfEvaluation::LogSpace => walk_log_mgf(x, spec),
        MgfEvaluation::Direct => walk_mgf_direct(x, spec).ln(),
    };

    let mut hi = 1.0;
    while f(hi) <= 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(AnalysisError::NoConvergence);
        }
    }
    let mut lo = 0.0;
    for _ in 0..ROOT_MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        let v = f(mid);
        if v.abs() <= ROOT_TOLERANCE || hi - lo <= f64::EPSILON * hi {
            return Ok(mid);
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mid = 0.5 * (lo + hi);
    if f(mid).abs() <= ROOT_TOLERANCE {
        Ok(mid)
    } else {
        Err(AnalysisError::NoConvergence)
    }
}

/// `e^{-x* K}`: bound on the probability that the walk reaches `K` before
/// its lower threshold.
pub fn wald_bound(x_star: f64, k: f64) -> f64 {
    assert!(x_star > 0.0 && k >= 0.0, "x* > 0 and K >= 0 required");
    (-x_star * k).exp()
}

/// Where a two-sided walk stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppedWalk {
    /// `S_J`, the value at stopping.
    pub value: i64,
    pub steps: u64,
    pub cures: u64,
    pub infections: u64,
}

impl StoppedWalk {
    pub fn hit_upper(&self, upper: i64) -> bool {
        self.value >= upper
    }
}

/// Runs the walk from zero until it reaches `upper` or drops to `lower`.
pub fn simulate_stopped_walk<R: Rng + ?Sized>(
    spec: &RandomWalkSpec,
    upper: i64,
    lower: i64,
    rng: &mut R,
) -> Result<StoppedWalk, AnalysisError> {
    if !(lower < 0 && upper > 0) {
        return Err(AnalysisError::InvalidArgument(format!(
            "thresholds must bracket zero, got [{lower}, {upper}]"
        )));
    }
    let cure = Binomial::new(spec.cure_trials, spec.cure_prob)
        .map_err(|e| AnalysisError::InvalidArgument(e.to_string()))?;
    let infect = Binomial::new(spec.infect_trials, spec.infect_prob)
        .map_err(|e| AnalysisError::InvalidArgument(e.to_string()))?;
    let mut s = 0i64;
    let mut out = StoppedWalk {
        value: 0,
        steps: 0,
        cures: 0,
        infections: 0,
    };
    while s < upper && s > lower {
        let a = cure.sample(rng);
        let b = infect.sample(rng);
        out.cures += a;
        out.infections += b;
        out.steps += 1;
        s += a as i64 - b as i64;
    }
    out.value = s;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaldEstimate {
    pub upper: i64,
    pub runs: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub sigma: f64,
    pub bound: f64,
}

impl WaldEstimate {
    pub fn within(&self, sigmas: f64) -> bool {
        self.p_hat <= self.bound + sigmas * self.sigma
    }
}

/// Monte-Carlo estimate of `P(S_J >= upper)` against `wald_bound`.
pub fn wald_check<R: Rng + ?Sized>(
    spec: &RandomWalkSpec,
    upper: i64,
    lower: i64,
    runs: u64,
    rng: &mut R,
) -> Result<WaldEstimate, AnalysisError> {
    if runs == 0 {
        return Err(AnalysisError::InvalidArgument(
            "runs must be positive".into(),
        ));
    }
    let x_star = find_mgf_root(spec)?;
    let mut hits = 0;
    for _ in 0..runs {
        if simulate_stopped_walk(spec, upper, lower, rng)?.hit_upper(upper) {
            hits += 1;
        }
    }
    let p_hat = hits as f64 / runs as f64;
    let bound = wald_bound(x_star, upper as f64);
    // The bound's own variance is a floor when no hits are observed.
    let p_ref = p_hat.max(bound);
    Ok(WaldEstimate {
        upper,
        runs,
        hits,
        p_hat,
        sigma: (p_ref * (1.0 - p_ref) / runs as f64).sqrt(),
        bound,
    })
}
