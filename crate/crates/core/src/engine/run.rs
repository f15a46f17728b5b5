use rand_chacha::ChaCha8Rng;

use super::{
    observe, step, BudgetAllocation, EngineError, EpidemicState, FlagVector, RunStreams, SimConfig,
    StepRecord, TerminalStatus, Trajectory,
};
use crate::graph::GraphTopology;

/// What a strategy is allowed to see.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InformationAccess {
    /// Time only.
    Blind,
    /// The flag history.
    Flags,
    /// The true infected set. Reserved for complete-information baselines.
    Complete,
}

/// Everything a strategy may read when choosing an allocation.
pub struct StrategyContext<'a> {
    pub topology: &'a GraphTopology,
    pub config: &'a SimConfig,
    pub step_index: u64,
    /// Flags observed after each completed step; `len() == step_index`.
    /// `None` unless the strategy asked for [`InformationAccess::Flags`].
    pub flag_history: Option<&'a [FlagVector]>,
    /// `Some` only for [`InformationAccess::Complete`].
    pub true_state: Option<&'a EpidemicState>,
}

impl StrategyContext<'_> {
    pub fn latest_flags(&self) -> Option<&FlagVector> {
        self.flag_history.and_then(|h| h.last())
    }
}

/// A curing policy. One instance drives exactly one run.
pub trait Strategy {
    fn name(&self) -> &str;

    fn access(&self) -> InformationAccess;

    /// Chooses the rates for the current step. `rng` is the policy's own
    /// stream.
    fn allocate(
        &mut self,
        ctx: &StrategyContext<'_>,
        rng: &mut ChaCha8Rng,
    ) -> Result<BudgetAllocation, EngineError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recording {
    /// Keep a [`StepRecord`] per step.
    Full,
    /// Keep only the terminal state and counters.
    Summary,
}

/// Runs allocate, step, observe until the graph is cured or
/// `config.max_steps` steps have elapsed.
pub fn run_simulation(
    strategy: &mut dyn Strategy,
    topology: &GraphTopology,
    config: &SimConfig,
    initial: EpidemicState,
    recording: Recording,
) -> Result<Trajectory, EngineError> {
    config.validate()?;
    let n = topology.node_count();
    if initial.infected.capacity() != n {
        return Err(EngineError::SizeMismatch {
            expected: n,
            actual: initial.infected.capacity(),
        });
    }
    let access = strategy.access();
    let mut streams = RunStreams::new(config.seed);
    let mut history: Vec<FlagVector> = Vec::new();
    let mut records = Vec::new();
    let mut peak_spend = 0.0f64;
    let initial_set = initial.infected.clone();
    let start_step = initial.step_index;
    let mut state = initial;

    while !state.is_cured() && state.step_index - start_step < config.max_steps {
        let alloc = {
            let ctx = StrategyContext {
                topology,
                config,
                step_index: state.step_index - start_step,
                flag_history: (access == InformationAccess::Flags).then_some(history.as_slice()),
                true_state: (access == InformationAccess::Complete).then_some(&state),
            };
            strategy.allocate(&ctx, &mut streams.policy)?
        };
        let spent = alloc.total();
        peak_spend = peak_spend.max(spent);
        let outcome = step(
            &state,
            &alloc,
            topology,
            config,
            &mut streams.cure,
            &mut streams.infect,
        )?;
        state = outcome.state;
        let flags = observe(&state, config, &mut streams.observe);
        if recording == Recording::Full {
            records.push(StepRecord {
                step: state.step_index - start_step,
                infected_count: state.infected_count(),
                cut: topology.cut_size_unchecked(state.infected.as_mask()),
                budget_spent: spent,
                cures: outcome.cured,
                infections: outcome.infections,
                flags_raised: flags.raised_count(),
            });
        }
        if access == InformationAccess::Flags {
            history.push(flags);
        }
    }

    let status = if state.is_cured() {
        TerminalStatus::Cured
    } else {
        TerminalStatus::HorizonExhausted
    };
    Ok(Trajectory {
        initial: initial_set,
        records,
        status,
        steps: state.step_index - start_step,
        tau: config.tau,
        final_state: state,
        peak_spend,
    })
}
