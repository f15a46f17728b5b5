//! Blind Protection: a flag-free policy that sweeps a tree node by node,
//! keeping a protected buffer zone between the nodes still presumed
//! infected and those presumed cured.
//!
//! Nodes are moved out of the presumed-infected zone in DFS postorder, one
//! per epoch of `ceil(1 / tau)` steps. Postorder removes children before
//! parents, so the presumed-infected zone stays ancestor-closed and hence
//! connected. At each epoch boundary, buffer nodes farther than
//! `c log N` hops from the presumed-infected zone are released, provided
//! they have been protected for at least `ceil(c log N / tau)` steps.
//!
//! Every step, each buffer node receives rate `c1` and the node moved at
//! the last boundary receives an extra `(1 + c2) log N` for one epoch.
//! After the sweep, the buffer keeps being protected for a tail of
//! `ceil(c log N / tau)` steps; then the next iteration starts from scratch.

use rand_chacha::ChaCha8Rng;

use crate::engine::{
    BudgetAllocation, EngineError, InformationAccess, SimConfig, Strategy, StrategyContext,
};
use crate::graph::{Crusade, DfsOrder, GraphTopology, NodeSet};

/// Base of the logarithm in `c log N` and `(1 + c2) log N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    Natural,
    Two,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Two => x.log2(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlindProtectionParams {
    /// Buffer radius exponent: the buffer spans `c log N` hops.
    pub c: f64,
    /// Rate on every buffer node.
    pub c1: f64,
    /// Extra rate on the newest node is `(1 + c2) log N`.
    pub c2: f64,
    pub log_base: LogBase,
}

impl BlindProtectionParams {
    /// Constants for which one iteration fails with probability at most
    /// `2 / N`: `c1 = e^{4/c}`, `c2 = 1`.
    pub fn with_guarantee(c: f64) -> Self {
        Self {
            c,
            c1: (4.0 / c).exp(),
            c2: 1.0,
            log_base: LogBase::Natural,
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !(self.c > 0.0 && self.c.is_finite()) || !ok(self.c1) || !ok(self.c2) {
            return Err(EngineError::InvalidConfig(format!(
                "blind protection needs c > 0 and finite c1, c2 >= 0; got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Zone {
    Susceptible,
    Buffer,
    Infected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Sweeping,
    TailCuring,
}

/// A completed stay of one node in the buffer, in steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BufferStay {
    pub iteration: u64,
    pub node: usize,
    pub steps: u64,
}

/// The policy's bookkeeping: the ordering, the three zones and the clock.
#[derive(Debug, Clone)]
pub struct BlindProtectionState {
    topology: GraphTopology,
    params: BlindProtectionParams,
    ordering: Crusade,
    zones: Vec<Zone>,
    entered_buffer: Vec<u64>,
    epoch_len: u64,
    tail_len: u64,
    radius: f64,
    newest_extra: f64,
    /// Steps already taken in the current iteration.
    clock: u64,
    moved: usize,
    newest: Option<usize>,
    iteration: u64,
    stays: Vec<BufferStay>,
    record_stays: bool,
}

/// `ceil(x)` that ignores representation noise just above an integer.
fn ceil_steps(x: f64) -> u64 {
    (x - 1e-9).ceil().max(0.0) as u64
}

impl BlindProtectionState {
    /// Initial state: every node presumed infected.
    pub fn new(
        topology: &GraphTopology,
        tau: f64,
        params: BlindProtectionParams,
    ) -> Result<Self, EngineError> {
        params.validate()?;
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(EngineError::InvalidConfig(format!("invalid tau {tau}")));
        }
        let ordering = topology.dfs_crusade(DfsOrder::Postorder)?;
        let n = topology.node_count();
        let log_n = params.log_base.log(n as f64);
        let radius = params.c * log_n;
        Ok(Self {
            topology: topology.clone(),
            params,
            ordering,
            zones: vec![Zone::Infected; n],
            entered_buffer: vec![0; n],
            epoch_len: ceil_steps(1.0 / tau).max(1),
            tail_len: ceil_steps(radius / tau),
            radius,
            newest_extra: (1.0 + params.c2) * log_n,
            clock: 0,
            moved: 0,
            newest: None,
            iteration: 0,
            stays: Vec::new(),
            record_stays: false,
        })
    }

    /// Keep a log of completed buffer stays for auditing.
    pub fn record_stays(mut self) -> Self {
        self.record_stays = true;
        self
    }

    pub fn params(&self) -> &BlindProtectionParams {
        &self.params
    }

    pub fn ordering(&self) -> &Crusade {
        &self.ordering
    }

    pub fn epoch_len(&self) -> u64 {
        self.epoch_len
    }

    pub fn tail_len(&self) -> u64 {
        self.tail_len
    }

    /// Hop radius `c log N` beyond which buffer nodes are released.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Steps in one full iteration: `N` epochs plus the tail.
    pub fn iteration_len(&self) -> u64 {
        self.topology.node_count() as u64 * self.epoch_len + self.tail_len
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn phase(&self) -> Phase {
        if self.clock < self.topology.node_count() as u64 * self.epoch_len {
            Phase::Sweeping
        } else {
            Phase::TailCuring
        }
    }

    pub fn zone(&self, node: usize) -> Zone {
        self.zones[node]
    }

    pub fn zone_set(&self, zone: Zone) -> NodeSet {
        NodeSet::from_mask(self.zones.iter().map(|&z| z == zone).collect())
    }

    pub fn newest(&self) -> Option<usize> {
        self.newest
    }

    pub fn stays(&self) -> &[BufferStay] {
        &self.stays
    }

    fn release(&mut self, node: usize) {
        self.zones[node] = Zone::Susceptible;
        if self.record_stays {
            self.stays.push(BufferStay {
                iteration: self.iteration,
                node,
                steps: self.clock - self.entered_buffer[node],
            });
        }
    }

    fn start_iteration(&mut self) {
        self.zones.iter_mut().for_each(|z| *z = Zone::Infected);
        self.clock = 0;
        self.moved = 0;
        self.newest = None;
    }

    /// Releases far buffer nodes, then moves the next node out of `A_inf`.
    /// Releasing first means a node is only let go after a whole epoch in
    /// which no `A_inf` node was within the radius, so it cannot carry an
    /// infection picked up just before the boundary.
    fn epoch_boundary(&mut self) {
        let infected: Vec<usize> = (0..self.zones.len())
            .filter(|&u| self.zones[u] == Zone::Infected)
            .collect();
        let dist = self.topology.bfs_distances(infected);
        for (u, d) in dist.into_iter().enumerate() {
            if self.zones[u] != Zone::Buffer {
                continue;
            }
            let far = d.is_none_or(|d| d as f64 > self.radius);
            let dwell = self.clock - self.entered_buffer[u];
            if far && dwell >= self.tail_len {
                self.release(u);
            }
        }

        let v = self.ordering.order()[self.moved];
        self.moved += 1;
        self.zones[v] = Zone::Buffer;
        self.entered_buffer[v] = self.clock;
        self.newest = Some(v);
    }

    /// Performs the bookkeeping due at the current step and returns its
    /// allocation. Never looks at flags or the true state.
    pub fn advance(&mut self) -> BudgetAllocation {
        let n = self.zones.len();
        if self.clock == self.iteration_len() {
            for u in 0..n {
                if self.zones[u] == Zone::Buffer {
                    self.release(u);
                }
            }
            self.iteration += 1;
            self.start_iteration();
        }
        if self.phase() == Phase::Sweeping && self.clock.is_multiple_of(self.epoch_len) {
            self.epoch_boundary();
        }

        let mut alloc = BudgetAllocation::zero(n);
        for (u, z) in self.zones.iter().enumerate() {
            if *z == Zone::Buffer {
                alloc.set(u, self.params.c1);
            }
        }
        if self.phase() == Phase::Sweeping {
            if let Some(v) = self.newest {
                alloc.add(v, self.newest_extra);
            }
        }
        self.clock += 1;
        alloc
    }

    /// Largest per-step spend over one iteration. The schedule never depends
    /// on observations, so a dry run gives it exactly.
    pub fn peak_demand(&self) -> f64 {
        let mut probe = self.clone();
        probe.start_iteration();
        probe.iteration = 0;
        probe.record_stays = false;
        (0..probe.iteration_len())
            .map(|_| probe.advance().total())
            .fold(0.0, f64::max)
    }
}

/// [`BlindProtectionState`] driven as an engine strategy.
#[derive(Debug, Clone)]
pub struct BlindProtection {
    state: BlindProtectionState,
}

impl BlindProtection {
    /// Fails if the run's budget is below the policy's peak demand.
    pub fn new(
        topology: &GraphTopology,
        config: &SimConfig,
        params: BlindProtectionParams,
    ) -> Result<Self, EngineError> {
        let state = BlindProtectionState::new(topology, config.tau, params)?;
        let peak = state.peak_demand();
        if config.budget_r + crate::engine::BUDGET_TOLERANCE * peak.max(1.0) < peak {
            return Err(EngineError::InvalidConfig(format!(
                "blind protection needs budget {peak} per step but budget_r is {}",
                config.budget_r
            )));
        }
        Ok(Self { state })
    }

    pub fn from_state(state: BlindProtectionState) -> Self {
        Self { state }
    }

    pub fn state(&self) -> &BlindProtectionState {
        &self.state
    }
}

impl Strategy for BlindProtection {
    fn name(&self) -> &str {
        "blind_protection"
    }

    fn access(&self) -> InformationAccess {
        InformationAccess::Blind
    }

    fn allocate(
        &mut self,
        _ctx: &StrategyContext<'_>,
        _rng: &mut ChaCha8Rng,
    ) -> Result<BudgetAllocation, EngineError> {
        Ok(self.state.advance())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(c: f64) -> BlindProtectionParams {
        BlindProtectionParams {
            c,
            c1: 10.0,
            c2: 1.0,
            log_base: LogBase::Natural,
        }
    }

    fn connected(topo: &GraphTopology, set: &NodeSet) -> bool {
        let Some(start) = set.iter().next() else {
            return true;
        };
        let mut seen = NodeSet::empty(set.capacity());
        let mut stack = vec![start];
        seen.insert(start);
        while let Some(u) = stack.pop() {
            for &v in topo.neighbors(u) {
                if set.contains(v) && seen.insert(v) {
                    stack.push(v);
                }
            }
        }
        seen.len() == set.len()
    }

    #[test]
    fn initial_and_first_epoch() {
        let t = GraphTopology::complete_binary_tree(3).unwrap();
        let mut s = BlindProtectionState::new(&t, 0.1, params(0.5)).unwrap();
        assert_eq!(s.zone_set(Zone::Infected).len(), 7);
        assert!(s.zone_set(Zone::Buffer).is_empty());
        assert!(s.zone_set(Zone::Susceptible).is_empty());
        assert_eq!(s.epoch_len(), 10);

        for _ in 0..s.epoch_len() {
            s.advance();
        }
        assert_eq!(s.zone_set(Zone::Buffer).len(), 1);
        assert_eq!(s.zone_set(Zone::Infected).len(), 6);
        // Postorder starts at the leftmost leaf.
        assert_eq!(s.newest(), Some(3));
    }

    #[test]
    fn newest_node_gets_extra_budget() {
        let t = GraphTopology::complete_binary_tree(3).unwrap();
        let mut s = BlindProtectionState::new(&t, 0.1, params(0.5)).unwrap();
        let a = s.advance();
        let expected = 10.0 + 2.0 * 7f64.ln();
        assert!((a.rate(3) - expected).abs() < 1e-12);
        assert_eq!(a.support().count(), 1);
    }

    #[test]
    fn zones_partition_and_infected_zone_stays_connected() {
        let t = GraphTopology::complete_binary_tree(5).unwrap();
        let mut s = BlindProtectionState::new(&t, 0.1, params(0.5)).unwrap();
        for _ in 0..(2 * s.iteration_len() + 5) {
            s.advance();
            let inf = s.zone_set(Zone::Infected);
            let buf = s.zone_set(Zone::Buffer);
            let sus = s.zone_set(Zone::Susceptible);
            assert_eq!(inf.len() + buf.len() + sus.len(), 31);
            assert!(inf.is_disjoint(&buf) && buf.is_disjoint(&sus) && inf.is_disjoint(&sus));
            assert!(connected(&t, &inf));
        }
    }

    #[test]
    fn every_node_is_protected_long_enough() {
        for (depth, c) in [(4, 0.25), (5, 0.5), (6, 0.75)] {
            let t = GraphTopology::complete_binary_tree(depth).unwrap();
            let mut s = BlindProtectionState::new(&t, 0.1, params(c))
                .unwrap()
                .record_stays();
            let len = s.iteration_len();
            for _ in 0..=len {
                s.advance();
            }
            let stays: Vec<_> = s.stays().iter().filter(|st| st.iteration == 0).collect();
            assert_eq!(stays.len(), t.node_count());
            let min_steps = s.tail_len();
            assert!(
                stays.iter().all(|st| st.steps >= min_steps),
                "depth {depth}"
            );
        }
    }

    #[test]
    fn spend_within_stated_bound() {
        let t = GraphTopology::complete_binary_tree(5).unwrap();
        let p = params(0.5);
        let mut s = BlindProtectionState::new(&t, 0.1, p).unwrap();
        let n = 31f64;
        let mut max_spend = 0.0f64;
        let mut max_bound_gap = f64::NEG_INFINITY;
        for _ in 0..s.iteration_len() {
            let buffer_before = s.zone_set(Zone::Buffer).len();
            let a = s.advance();
            let buffer = s.zone_set(Zone::Buffer).len().max(buffer_before);
            let per_step_bound = p.c1 * buffer as f64 + (1.0 + p.c2) * n.ln();
            max_bound_gap = max_bound_gap.max(a.total() - per_step_bound);
            max_spend = max_spend.max(a.total());
        }
        assert!(max_bound_gap <= 1e-9);
        assert!((s.peak_demand() - max_spend).abs() < 1e-9);
    }

    #[test]
    fn budget_below_peak_rejected() {
        let t = GraphTopology::complete_binary_tree(4).unwrap();
        let cfg = SimConfig {
            budget_r: 5.0,
            ..SimConfig::default()
        };
        assert!(matches!(
            BlindProtection::new(&t, &cfg, params(0.5)),
            Err(EngineError::InvalidConfig(_))
        ));
    }

    #[test]
    fn restarts_after_iteration() {
        let t = GraphTopology::complete_binary_tree(2).unwrap();
        let mut s = BlindProtectionState::new(&t, 0.5, params(0.5)).unwrap();
        let len = s.iteration_len();
        for _ in 0..len {
            s.advance();
        }
        assert_eq!(s.iteration(), 0);
        s.advance();
        assert_eq!(s.iteration(), 1);
        assert_eq!(s.zone_set(Zone::Infected).len(), 2);
        assert_eq!(s.zone_set(Zone::Buffer).len(), 1);
    }

    #[test]
    fn rejects_non_tree_and_bad_params() {
        let cycle = GraphTopology::from_edges(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        assert!(BlindProtectionState::new(&cycle, 0.1, params(0.5)).is_err());
        let t = GraphTopology::complete_binary_tree(2).unwrap();
        assert!(BlindProtectionState::new(&t, 0.1, params(0.0)).is_err());
    }
}
