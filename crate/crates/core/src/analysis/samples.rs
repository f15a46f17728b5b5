use rand::Rng;

use super::AnalysisError;
use crate::engine::{infect_phase, EpidemicState, Trajectory};
use crate::graph::{GraphTopology, NodeSet};

/// Returned by [`required_samples`] when the divergence is zero.
pub const UNBOUNDED_SAMPLES: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    /// Is this one node infected?
    Single,
    /// Which of `r` candidate trees is infected?
    MaxOfTrees,
}

/// Samples needed to decide between flag rates whose divergence is `d`
/// nats, with error probability `epsilon`:
/// `ceil(kappa ln(1/epsilon) / d)`, times `sqrt(ln r)` for `MaxOfTrees`.
pub fn required_samples(
    epsilon: f64,
    d: f64,
    mode: SampleMode,
    r: u64,
    kappa: f64,
) -> Result<u64, AnalysisError> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(AnalysisError::InvalidArgument(format!(
            "epsilon must lie in (0, 1], got {epsilon}"
        )));
    }
    if d.is_nan() || d < 0.0 || kappa.is_nan() || kappa <= 0.0 {
        return Err(AnalysisError::InvalidArgument(format!(
            "need d >= 0 and kappa > 0, got d = {d}, kappa = {kappa}"
        )));
    }
    if mode == SampleMode::MaxOfTrees && r == 0 {
        return Err(AnalysisError::InvalidArgument("r must be positive".into()));
    }
    if d == 0.0 {
        return Ok(UNBOUNDED_SAMPLES);
    }
    let mut n = kappa * (1.0 / epsilon).ln() / d;
    if mode == SampleMode::MaxOfTrees {
        n *= (r as f64).ln().sqrt();
    }
    // Absorb rounding so exact integers are not bumped up by one.
    let n = (n - 1e-9).ceil().max(0.0);
    Ok(if n >= u64::MAX as f64 {
        UNBOUNDED_SAMPLES
    } else {
        n as u64
    })
}

/// Observation indices `start..end` of a trajectory, where index `s` is the
/// observation made after step `s`. `phases` label disjoint node groups;
/// nodes in none of them are counted as `other`.
#[derive(Debug, Clone, PartialEq)]
pub struct EscapeWindow {
    pub start: u64,
    pub end: u64,
    pub phases: Vec<NodeSet>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EscapeSampleCounts {
    pub per_phase: Vec<u64>,
    pub other: u64,
}

impl EscapeSampleCounts {
    pub fn total(&self) -> u64 {
        self.per_phase.iter().sum::<u64>() + self.other
    }
}

/// Infected node-steps inside the window, split by phase. A node listed
/// in several phases counts toward the first.
pub fn count_escape_samples(
    trajectory: &Trajectory,
    window: &EscapeWindow,
) -> Result<EscapeSampleCounts, AnalysisError> {
    let steps = trajectory.steps;
    let mut counts = EscapeSampleCounts {
        per_phase: vec![0; window.phases.len()],
        other: 0,
    };
    if window.start == window.end {
        return Ok(counts);
    }
    if window.start == 0 || window.start > window.end || window.end > steps + 1 {
        return Err(AnalysisError::WindowOutOfRange {
            start: window.start,
            end: window.end,
            steps,
        });
    }
    if trajectory.records.len() as u64 != steps {
        return Err(AnalysisError::MissingRecords);
    }
    let sets = trajectory.infected_sets();
    for set in &sets[window.start as usize..window.end as usize] {
        for v in set.iter() {
            match window.phases.iter().position(|p| p.contains(v)) {
                Some(i) => counts.per_phase[i] += 1,
                None => counts.other += 1,
            }
        }
    }
    Ok(counts)
}

/// Grows an infection from `seed` with no curing until `target` new nodes
/// are infected, returning how many node-steps the new nodes spent
/// infected before the last of them arrived.
pub fn pure_growth_samples<R: Rng + ?Sized>(
    topology: &GraphTopology,
    seed: usize,
    target: usize,
    mu: f64,
    rng: &mut R,
) -> Result<u64, AnalysisError> {
    let n = topology.node_count();
    if seed >= n {
        return Err(AnalysisError::InvalidArgument(format!(
            "seed {seed} outside graph of {n} nodes"
        )));
    }
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(AnalysisError::InvalidArgument(format!("mu = {mu}")));
    }
    let reachable = topology
        .bfs_distances([seed])
        .iter()
        .filter(|d| d.is_some())
        .count();
    if reachable < target + 1 {
        return Err(AnalysisError::InvalidArgument(format!(
            "only {} nodes reachable from the seed, need {}",
            reachable,
            target + 1
        )));
    }
    let mut infected = NodeSet::empty(n);
    infected.insert(seed);
    let mut state = EpidemicState {
        infected,
        step_index: 0,
    };
    let mut samples = 0u64;
    loop {
        let (next, _) = infect_phase(&state, topology, mu, rng);
        state = next;
        let fresh = state.infected_count() - 1;
        if fresh >= target {
            return Ok(samples);
        }
        samples += fresh as u64;
    }
}
