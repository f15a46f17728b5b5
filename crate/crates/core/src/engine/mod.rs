//! The discrete-time controlled SI process.
//!
//! Each step runs a cure phase (infected node `i` recovers with probability
//! `1 - exp(-r_i * tau)`) followed by an infection phase (every edge from a
//! post-cure infected node to a susceptible node transmits with probability
//! `mu = 1 - exp(-tau)`). After the step every node raises a flag with
//! probability `p` if infected and `q` if susceptible.

mod phases;
mod rng;
mod run;
mod trajectory;

use thiserror::Error;

use crate::graph::{GraphError, NodeSet};

pub use phases::{cure_phase, infect_phase, observe, step, Infection, StepOutcome};
pub use rng::{bernoulli, replication_seed, RunStreams, Stream};
pub use run::{run_simulation, InformationAccess, Recording, Strategy, StrategyContext};
pub use trajectory::{StepRecord, TerminalStatus, Trajectory, TRAJECTORY_CSV_HEADER};

/// Time steps at or above this length are rejected: `mu` is then within
/// `5e-5` of one and the small-step model no longer describes anything.
pub const MAX_TAU: f64 = 10.0;

/// Absolute slack, scaled by `max(1, r)`, allowed when comparing an
/// allocation's total against the budget.
pub const BUDGET_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("allocation at step {step} spends {spent} but the budget is {budget}")]
    OverBudget { step: u64, spent: f64, budget: f64 },
    #[error("allocation rate for node {node} is {rate}; rates must be finite and nonnegative")]
    InvalidRate { node: usize, rate: f64 },
    #[error("expected {expected} entries, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },
    #[error("strategy failed: {0}")]
    Strategy(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Model parameters for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Length of one time step.
    pub tau: f64,
    /// Total curing rate available per step.
    pub budget_r: f64,
    /// Flag probability for an infected node.
    pub p_flag: f64,
    /// Flag probability for a susceptible node.
    pub q_flag: f64,
    pub max_steps: u64,
    pub seed: u64,
    /// Replaces the per-edge infection probability derived from `tau`.
    /// Used to switch reinfection off in controlled experiments.
    pub mu_override: Option<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            tau: 0.1,
            budget_r: 1.0,
            p_flag: 1.0,
            q_flag: 0.0,
            max_steps: 100_000,
            seed: 0,
            mu_override: None,
        }
    }
}

/// Per-step infection and maximal cure probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub mu: f64,
    pub delta: f64,
}

/// `1 - exp(-rate * tau)`, evaluated without cancellation for small
/// arguments.
pub fn cure_probability(rate: f64, tau: f64) -> f64 {
    -(-rate * tau).exp_m1()
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |msg: String| Err(EngineError::InvalidConfig(msg));
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad(format!("tau must be positive, got {}", self.tau));
        }
        if self.tau >= MAX_TAU {
            return bad(format!("tau must be below {MAX_TAU}, got {}", self.tau));
        }
        if !(self.budget_r >= 0.0 && self.budget_r.is_finite()) {
            return bad(format!(
                "budget_r must be finite and nonnegative, got {}",
                self.budget_r
            ));
        }
        for (name, v) in [("p_flag", self.p_flag), ("q_flag", self.q_flag)] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        if self.p_flag < self.q_flag {
            return bad(format!(
                "p_flag ({}) must be at least q_flag ({})",
                self.p_flag, self.q_flag
            ));
        }
        if let Some(mu) = self.mu_override {
            if !(0.0..=1.0).contains(&mu) {
                return bad(format!("mu_override must lie in [0, 1], got {mu}"));
            }
        }
        Ok(())
    }

    /// `mu = 1 - exp(-tau)` (or the override) and `delta = 1 - exp(-r tau)`.
    pub fn derive_rates(&self) -> Rates {
        Rates {
            mu: self
                .mu_override
                .unwrap_or_else(|| cure_probability(1.0, self.tau)),
            delta: cure_probability(self.budget_r, self.tau),
        }
    }
}

/// The infected set at a given step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpidemicState {
    pub infected: NodeSet,
    pub step_index: u64,
}

impl EpidemicState {
    pub fn all_infected(node_count: usize) -> Self {
        Self {
            infected: NodeSet::full(node_count),
            step_index: 0,
        }
    }

    pub fn all_susceptible(node_count: usize) -> Self {
        Self {
            infected: NodeSet::empty(node_count),
            step_index: 0,
        }
    }

    pub fn infected_count(&self) -> usize {
        self.infected.len()
    }

    pub fn is_cured(&self) -> bool {
        self.infected.is_empty()
    }
}

/// Curing rates `r_i` for one step.
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetAllocation {
    rates: Vec<f64>,
}

impl BudgetAllocation {
    pub fn zero(node_count: usize) -> Self {
        Self {
            rates: vec![0.0; node_count],
        }
    }

    pub fn from_rates(rates: Vec<f64>) -> Self {
        Self { rates }
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn rate(&self, node: usize) -> f64 {
        self.rates[node]
    }

    pub fn set(&mut self, node: usize, rate: f64) {
        self.rates[node] = rate;
    }

    pub fn add(&mut self, node: usize, rate: f64) {
        self.rates[node] += rate;
    }

    pub fn total(&self) -> f64 {
        self.rates.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    /// Nodes with a strictly positive rate.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.rates
            .iter()
            .enumerate()
            .filter_map(|(i, &r)| (r > 0.0).then_some(i))
    }

    /// Checks size, finiteness, sign and the budget constraint.
    pub fn validate(&self, node_count: usize, budget: f64, step: u64) -> Result<(), EngineError> {
        if self.rates.len() != node_count {
            return Err(EngineError::SizeMismatch {
                expected: node_count,
                actual: self.rates.len(),
            });
        }
        if let Some((node, &rate)) = self
            .rates
            .iter()
            .enumerate()
            .find(|(_, r)| !(r.is_finite() && **r >= 0.0))
        {
            return Err(EngineError::InvalidRate { node, rate });
        }
        let spent = self.total();
        if spent > budget + BUDGET_TOLERANCE * budget.max(1.0) {
            return Err(EngineError::OverBudget {
                step,
                spent,
                budget,
            });
        }
        Ok(())
    }
}

/// One step's flags, indexed by node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlagVector {
    flags: Vec<bool>,
}

impl FlagVector {
    pub fn new(flags: Vec<bool>) -> Self {
        Self { flags }
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    pub fn is_raised(&self, node: usize) -> bool {
        self.flags[node]
    }

    pub fn raised(&self) -> impl Iterator<Item = usize> + '_ {
        self.flags
            .iter()
            .enumerate()
            .filter_map(|(i, &f)| f.then_some(i))
    }

    pub fn raised_count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }
}
