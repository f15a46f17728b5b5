//! Replication batches, summary statistics, canned experiments and CSV
//! output.

mod config;
mod csv;
mod experiments;

use rayon::prelude::*;

use crate::engine::{replication_seed, run_simulation, EpidemicState, Recording};

pub use config::{
    BudgetSpec, ConfigError, ExperimentConfig, ExperimentPlan, KeyValues, StrategySpec, SweepAxis,
};
pub use csv::{emit_csv, format_sig, rows_to_csv, SUMMARY_CSV_HEADER};
pub use experiments::{
    fig3_experiment, fig4_experiment, iteration_failure_experiment, loglog_slope, run_plan,
    wilson_interval, Fig3Options, Fig4Options, IterationFailure, IterationFailureOptions,
};

/// Outcome of one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub replication: u32,
    pub seed: u64,
    pub steps: u64,
    /// `steps * tau`.
    pub time: f64,
    pub cured: bool,
    pub final_infected: usize,
    pub peak_spend: f64,
}

/// Seed for sweep point `index` of an experiment with base seed `base`.
pub fn point_seed(base: u64, index: usize) -> u64 {
    replication_seed(base, (index as u64) << 32)
}

/// `replications` independent runs from an all-infected start, seeded
/// `base_seed ^ k`. Runs execute in parallel; the result is ordered by `k`
/// and does not depend on scheduling.
pub fn run_replications(
    config: &ExperimentConfig,
    replications: u32,
    base_seed: u64,
) -> Result<Vec<RunSummary>, ConfigError> {
    if replications == 0 {
        return Err(ConfigError::Invalid(
            "replications must be at least 1".into(),
        ));
    }
    let topology = config.topology()?;
    let sim = config.resolve()?;
    // Fail on strategy/config mismatches before fanning out.
    config.strategy.build(&topology, &sim)?;
    (0..replications)
        .into_par_iter()
        .map(|k| {
            let mut cfg = sim.clone();
            cfg.seed = replication_seed(base_seed, k as u64);
            let mut strategy = config.strategy.build(&topology, &cfg)?;
            let traj = run_simulation(
                strategy.as_mut(),
                &topology,
                &cfg,
                EpidemicState::all_infected(topology.node_count()),
                Recording::Summary,
            )?;
            Ok(RunSummary {
                replication: k,
                seed: cfg.seed,
                steps: traj.steps,
                time: traj.elapsed_time(),
                cured: traj.is_cured(),
                final_infected: traj.final_state.infected_count(),
                peak_spend: traj.peak_spend,
            })
        })
        .collect::<Result<Vec<_>, crate::engine::EngineError>>()
        .map_err(ConfigError::from)
}

/// One sweep point. Runs that hit the horizon enter the mean at the
/// horizon and are counted in `censored`.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub series: String,
    pub sweep_value: f64,
    pub mean_time: f64,
    pub std_err: f64,
    pub cure_fraction: f64,
    pub replications: u32,
    pub censored: u32,
}

impl SummaryRow {
    pub fn from_runs(series: &str, sweep_value: f64, runs: &[RunSummary]) -> Self {
        let n = runs.len();
        assert!(n > 0, "summary of no runs");
        let mean = runs.iter().map(|r| r.time).sum::<f64>() / n as f64;
        let std_err = if n > 1 {
            let var = runs.iter().map(|r| (r.time - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        let cured = runs.iter().filter(|r| r.cured).count();
        SummaryRow {
            series: series.to_string(),
            sweep_value,
            mean_time: mean,
            std_err,
            cure_fraction: cured as f64 / n as f64,
            replications: n as u32,
            censored: (n - cured) as u32,
        }
    }

    pub fn censored_fraction(&self) -> f64 {
        self.censored as f64 / self.replications as f64
    }
}
