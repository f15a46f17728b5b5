//! Curing policies. Each turns what it is allowed to observe into a budget
//! allocation for the current step.

mod blind_protection;

use rand::seq::index;
use rand_chacha::ChaCha8Rng;

use crate::engine::{BudgetAllocation, EngineError, InformationAccess, Strategy, StrategyContext};
use crate::graph::{Crusade, GraphTopology};

pub use blind_protection::{
    BlindProtection, BlindProtectionParams, BlindProtectionState, BufferStay, LogBase, Phase, Zone,
};

/// Spends nothing. Useful as a control and for pure-growth experiments.
#[derive(Debug, Clone, Default)]
pub struct Idle;

impl Strategy for Idle {
    fn name(&self) -> &str {
        "idle"
    }

    fn access(&self) -> InformationAccess {
        InformationAccess::Blind
    }

    fn allocate(
        &mut self,
        ctx: &StrategyContext<'_>,
        _rng: &mut ChaCha8Rng,
    ) -> Result<BudgetAllocation, EngineError> {
        Ok(BudgetAllocation::zero(ctx.topology.node_count()))
    }
}

/// `r / N` on every node, every step.
pub fn uniform_blind_allocate(node_count: usize, budget: f64) -> BudgetAllocation {
    BudgetAllocation::from_rates(vec![budget / node_count as f64; node_count])
}

#[derive(Debug, Clone, Default)]
pub struct UniformBlind;

impl Strategy for UniformBlind {
    fn name(&self) -> &str {
        "uniform"
    }

    fn access(&self) -> InformationAccess {
        InformationAccess::Blind
    }

    fn allocate(
        &mut self,
        ctx: &StrategyContext<'_>,
        _rng: &mut ChaCha8Rng,
    ) -> Result<BudgetAllocation, EngineError> {
        Ok(uniform_blind_allocate(
            ctx.topology.node_count(),
            ctx.config.budget_r,
        ))
    }
}

/// Treats a random subset of the nodes that flagged in the latest
/// observation, splitting the budget equally among them.
#[derive(Debug, Clone)]
pub struct NaiveCuring {
    /// Cap on simultaneously treated nodes.
    pub k_max: usize,
}

impl NaiveCuring {
    pub fn new(k_max: usize) -> Self {
        Self { k_max }
    }

    /// `floor(r)` treated nodes, at least one.
    pub fn default_k_max(budget: f64) -> usize {
        (budget.floor() as usize).max(1)
    }
}

/// Naive Curing allocation from the flags of the latest observation.
pub fn naive_curing_allocate(
    flagged: &[usize],
    node_count: usize,
    budget: f64,
    k_max: usize,
    rng: &mut ChaCha8Rng,
) -> BudgetAllocation {
    let mut alloc = BudgetAllocation::zero(node_count);
    let k = flagged.len().min(k_max);
    if k == 0 {
        return alloc;
    }
    let share = budget / k as f64;
    for i in index::sample(rng, flagged.len(), k) {
        alloc.set(flagged[i], share);
    }
    alloc
}

impl Strategy for NaiveCuring {
    fn name(&self) -> &str {
        "naive"
    }

    fn access(&self) -> InformationAccess {
        InformationAccess::Flags
    }

    fn allocate(
        &mut self,
        ctx: &StrategyContext<'_>,
        rng: &mut ChaCha8Rng,
    ) -> Result<BudgetAllocation, EngineError> {
        let n = ctx.topology.node_count();
        let flagged: Vec<usize> = match ctx.latest_flags() {
            Some(f) => f.raised().collect(),
            None => Vec::new(),
        };
        Ok(naive_curing_allocate(
            &flagged,
            n,
            ctx.config.budget_r,
            self.k_max,
            rng,
        ))
    }
}

/// Complete-information baseline: the whole budget goes to the last
/// infected node in crusade order, so an infected prefix shrinks one node
/// at a time from its end.
#[derive(Debug, Clone)]
pub struct CrusadeCuring {
    crusade: Crusade,
}

impl CrusadeCuring {
    pub fn new(topology: &GraphTopology, crusade: Crusade) -> Result<Self, EngineError> {
        if crusade.len() != topology.node_count() {
            return Err(EngineError::SizeMismatch {
                expected: topology.node_count(),
                actual: crusade.len(),
            });
        }
        Ok(Self { crusade })
    }

    pub fn crusade(&self) -> &Crusade {
        &self.crusade
    }
}

pub fn crusade_allocate(infected: &[bool], crusade: &Crusade, budget: f64) -> BudgetAllocation {
    let mut alloc = BudgetAllocation::zero(infected.len());
    if let Some(&target) = crusade.order().iter().rev().find(|&&v| infected[v]) {
        alloc.set(target, budget);
    }
    alloc
}

impl Strategy for CrusadeCuring {
    fn name(&self) -> &str {
        "crusade"
    }

    fn access(&self) -> InformationAccess {
        InformationAccess::Complete
    }

    fn allocate(
        &mut self,
        ctx: &StrategyContext<'_>,
        _rng: &mut ChaCha8Rng,
    ) -> Result<BudgetAllocation, EngineError> {
        let state = ctx
            .true_state
            .ok_or_else(|| EngineError::Strategy("crusade curing needs the true state".into()))?;
        Ok(crusade_allocate(
            state.infected.as_mask(),
            &self.crusade,
            ctx.config.budget_r,
        ))
    }
}
