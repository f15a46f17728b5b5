//! Closed-form evaluators and Monte-Carlo helpers for the quantities the
//! curing lower bounds are assembled from.
//!
//! Logarithms are natural unless a function says otherwise, and
//! information is measured in nats.

mod divergence;
mod geometric;
mod hypothesis;
mod paths;
mod ruin;
mod samples;
mod walk;

use thiserror::Error;

pub use divergence::kl_divergence;
pub use geometric::{
    curing_time_ratio, expected_infected_samples, expected_infection_steps, min_geometric_param,
    sample_geometric,
};
pub use hypothesis::{
    detect_infected_tree, fit_half_miss, miss_rate, simulate_sample, Detection, HalfMissFit,
    HypothesisSample, ThresholdPolicy, TreeCounts, DEFAULT_FALSE_ALARM,
};
pub use paths::{
    escape_one_step_lower_bound, path_reinfection_prob, phase_time_term, simulate_path_race,
    EscapeBound, EscapeParams, PathReinfection,
};
pub use ruin::{absorption_prob_solve, gamblers_ruin_up_prob, BirthDeathChain};
pub use samples::{
    count_escape_samples, pure_growth_samples, required_samples, EscapeSampleCounts, EscapeWindow,
    SampleMode, UNBOUNDED_SAMPLES,
};
pub use walk::{
    find_mgf_root, find_mgf_root_using, simulate_stopped_walk, wald_bound, wald_check,
    walk_log_mgf, walk_mgf, walk_mgf_direct, MgfEvaluation, RandomWalkSpec, StoppedWalk,
    WaldEstimate, ROOT_MAX_ITERATIONS, ROOT_TOLERANCE,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("{name} must be a probability in [0, 1], got {value}")]
    NotAProbability { name: &'static str, value: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("walk drift {drift} is not negative: no positive MGF root")]
    NoPositiveRoot { drift: f64 },
    #[error("root search did not converge")]
    NoConvergence,
    #[error("linear system is singular at row {0}")]
    Singular(usize),
    #[error("sample has no trees")]
    EmptySample,
    #[error("window [{start}, {end}) lies outside a trajectory of {steps} steps")]
    WindowOutOfRange { start: u64, end: u64, steps: u64 },
    #[error("trajectory was recorded without per-step events")]
    MissingRecords,
}

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<(), AnalysisError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(AnalysisError::NotAProbability { name, value })
    }
}
