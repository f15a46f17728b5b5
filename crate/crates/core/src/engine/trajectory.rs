use std::fmt::Write as _;
use std::io;
use std::path::Path;

use super::{EpidemicState, Infection};
use crate::graph::NodeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminalStatus {
    Cured,
    HorizonExhausted,
}

impl TerminalStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TerminalStatus::Cured => "cured",
            TerminalStatus::HorizonExhausted => "horizon-exhausted",
        }
    }
}

/// What happened during one step. `step` counts completed steps, so the
/// first record has `step == 1`; counts describe the state after the step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: u64,
    pub infected_count: usize,
    pub cut: usize,
    pub budget_spent: f64,
    pub cures: Vec<usize>,
    pub infections: Vec<Infection>,
    pub flags_raised: usize,
}

/// Audit trail of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub initial: NodeSet,
    /// Empty when the run was made with [`Recording::Summary`].
    ///
    /// [`Recording::Summary`]: super::Recording::Summary
    pub records: Vec<StepRecord>,
    pub status: TerminalStatus,
    pub steps: u64,
    pub tau: f64,
    pub final_state: EpidemicState,
    /// Largest per-step allocation total observed.
    pub peak_spend: f64,
}

pub const TRAJECTORY_CSV_HEADER: &str =
    "step,time,infected_count,cut,budget_spent,cures,infections,flags_raised";

impl Trajectory {
    pub fn elapsed_time(&self) -> f64 {
        self.steps as f64 * self.tau
    }

    pub fn is_cured(&self) -> bool {
        self.status == TerminalStatus::Cured
    }

    /// Infected set after each recorded step, reconstructed from events.
    /// Element 0 is the initial set.
    pub fn infected_sets(&self) -> Vec<NodeSet> {
        let mut sets = Vec::with_capacity(self.records.len() + 1);
        let mut current = self.initial.clone();
        sets.push(current.clone());
        for rec in &self.records {
            for &c in &rec.cures {
                current.remove(c);
            }
            for inf in &rec.infections {
                current.insert(inf.node);
            }
            sets.push(current.clone());
        }
        sets
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(TRAJECTORY_CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{:.6},{},{},{:.6},{},{},{}",
                r.step,
                r.step as f64 * self.tau,
                r.infected_count,
                r.cut,
                r.budget_spent,
                r.cures.len(),
                r.infections.len(),
                r.flags_raised
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> io::Result<()> {
        std::fs::write(path, self.to_csv())
    }
}
