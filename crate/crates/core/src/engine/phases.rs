use rand::Rng;

use super::{
    bernoulli, cure_probability, BudgetAllocation, EngineError, EpidemicState, FlagVector,
    SimConfig,
};
use crate::graph::GraphTopology;

/// A transmission along the edge `source -> node`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Infection {
    pub node: usize,
    pub source: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: EpidemicState,
    pub cured: Vec<usize>,
    pub infections: Vec<Infection>,
}

/// Cures each infected node `i` independently with probability
/// `1 - exp(-r_i tau)`. Rates on susceptible nodes are wasted.
pub fn cure_phase<R: Rng + ?Sized>(
    state: &EpidemicState,
    alloc: &BudgetAllocation,
    config: &SimConfig,
    rng: &mut R,
) -> Result<(EpidemicState, Vec<usize>), EngineError> {
    let n = state.infected.capacity();
    alloc.validate(n, config.budget_r, state.step_index)?;
    let mut next = state.clone();
    let mut cured = Vec::new();
    for node in state.infected.iter() {
        let rate = alloc.rate(node);
        if rate > 0.0 && bernoulli(rng, cure_probability(rate, config.tau)) {
            next.infected.remove(node);
            cured.push(node);
        }
    }
    Ok((next, cured))
}

/// Transmits along every edge from an infected node to a susceptible one
/// with probability `mu`. Nodes infected here do not transmit until the
/// next step.
pub fn infect_phase<R: Rng + ?Sized>(
    state: &EpidemicState,
    topology: &GraphTopology,
    mu: f64,
    rng: &mut R,
) -> (EpidemicState, Vec<Infection>) {
    let mut next = state.clone();
    let mut infections = Vec::new();
    if mu <= 0.0 || state.infected.is_empty() {
        return (next, infections);
    }
    for node in 0..topology.node_count() {
        if state.infected.contains(node) {
            continue;
        }
        // Edges are tried in neighbour order; the first success is the
        // recorded source. Any later draw on this node's edges could not
        // change its state.
        let source = topology
            .neighbors(node)
            .iter()
            .copied()
            .filter(|&u| state.infected.contains(u))
            .find(|_| bernoulli(rng, mu));
        if let Some(source) = source {
            next.infected.insert(node);
            infections.push(Infection { node, source });
        }
    }
    (next, infections)
}

/// Cure phase, then infection phase; advances the step index by one.
pub fn step(
    state: &EpidemicState,
    alloc: &BudgetAllocation,
    topology: &GraphTopology,
    config: &SimConfig,
    cure_rng: &mut impl Rng,
    infect_rng: &mut impl Rng,
) -> Result<StepOutcome, EngineError> {
    let (after_cure, cured) = cure_phase(state, alloc, config, cure_rng)?;
    let (mut after_infect, infections) =
        infect_phase(&after_cure, topology, config.derive_rates().mu, infect_rng);
    after_infect.step_index = state.step_index + 1;
    Ok(StepOutcome {
        state: after_infect,
        cured,
        infections,
    })
}

/// Independent flags: probability `p` for infected nodes, `q` otherwise.
pub fn observe<R: Rng + ?Sized>(
    state: &EpidemicState,
    config: &SimConfig,
    rng: &mut R,
) -> FlagVector {
    let flags = state
        .infected
        .as_mask()
        .iter()
        .map(|&infected| {
            let p = if infected {
                config.p_flag
            } else {
                config.q_flag
            };
            bernoulli(rng, p)
        })
        .collect();
    FlagVector::new(flags)
}
