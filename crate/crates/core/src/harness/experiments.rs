use rayon::prelude::*;

use super::{
    point_seed, run_replications, BudgetSpec, ConfigError, ExperimentConfig, ExperimentPlan,
    StrategySpec, SummaryRow,
};
use crate::engine::{
    replication_seed, run_simulation, EngineError, EpidemicState, Recording, SimConfig,
};
use crate::strategies::{BlindProtection, BlindProtectionParams, BlindProtectionState, LogBase};

/// Runs every point of a plan; the series name is the strategy's.
pub fn run_plan(plan: &ExperimentPlan, base_seed: u64) -> Result<Vec<SummaryRow>, ConfigError> {
    plan.validate()?;
    let mut rows = Vec::with_capacity(plan.values.len());
    for (i, &v) in plan.values.iter().enumerate() {
        let cfg = plan.point(i)?;
        let runs = run_replications(&cfg, plan.replications, point_seed(base_seed, i))?;
        rows.push(SummaryRow::from_runs(cfg.strategy.name(), v, &runs));
    }
    Ok(rows)
}

/// Naive Curing on a 31-node tree with budget 16, sweeping the flag error.
#[derive(Debug, Clone, PartialEq)]
pub struct Fig3Options {
    pub depth: u32,
    pub budget: f64,
    pub tau: f64,
    pub error_probs: Vec<f64>,
    pub replications: u32,
    pub horizon: u64,
    pub k_max: Option<usize>,
    pub base_seed: u64,
}

impl Default for Fig3Options {
    fn default() -> Self {
        Self {
            depth: 5,
            budget: 16.0,
            tau: 0.1,
            error_probs: (0..=10).map(|i| i as f64 / 100.0).collect(),
            replications: 20,
            horizon: 100_000,
            k_max: None,
            base_seed: 0,
        }
    }
}

pub fn fig3_experiment(opts: &Fig3Options) -> Result<Vec<SummaryRow>, ConfigError> {
    let base = ExperimentConfig {
        depth: opts.depth,
        sim: SimConfig {
            tau: opts.tau,
            budget_r: opts.budget,
            max_steps: opts.horizon,
            ..SimConfig::default()
        },
        budget: BudgetSpec::Fixed(opts.budget),
        strategy: StrategySpec::Naive { k_max: opts.k_max },
    };
    let plan = ExperimentPlan {
        base,
        axis: super::SweepAxis::ErrorProb,
        values: opts.error_probs.clone(),
        replications: opts.replications,
        output: None,
    };
    run_plan(&plan, opts.base_seed)
}

/// Blind Protection cure time against tree size for several buffer
/// exponents `c`, with `c1 = 10`, `c2 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Fig4Options {
    pub depths: Vec<u32>,
    pub cs: Vec<f64>,
    pub c1: f64,
    pub c2: f64,
    pub tau: f64,
    pub replications: u32,
    /// Horizon in steps is `horizon_factor * N / tau`.
    pub horizon_factor: f64,
    pub base_seed: u64,
}

impl Default for Fig4Options {
    fn default() -> Self {
        Self {
            depths: (4..=8).collect(),
            cs: vec![0.25, 0.5, 0.75],
            c1: 10.0,
            c2: 1.0,
            tau: 0.1,
            replications: 20,
            horizon_factor: 10.0,
            base_seed: 0,
        }
    }
}

/// Rows are grouped by series `c=<value>` with `sweep_value = N`. The
/// budget is the schedule's peak demand at each size.
pub fn fig4_experiment(opts: &Fig4Options) -> Result<Vec<SummaryRow>, ConfigError> {
    let mut rows = Vec::new();
    for (ci, &c) in opts.cs.iter().enumerate() {
        for (di, &depth) in opts.depths.iter().enumerate() {
            let n = (1u64 << depth) - 1;
            let cfg = ExperimentConfig {
                depth,
                sim: SimConfig {
                    tau: opts.tau,
                    max_steps: (opts.horizon_factor * n as f64 / opts.tau).ceil() as u64,
                    ..SimConfig::default()
                },
                budget: BudgetSpec::Auto,
                strategy: StrategySpec::BlindProtection(BlindProtectionParams {
                    c,
                    c1: opts.c1,
                    c2: opts.c2,
                    log_base: LogBase::Natural,
                }),
            };
            let index = ci * opts.depths.len() + di;
            let runs =
                run_replications(&cfg, opts.replications, point_seed(opts.base_seed, index))?;
            rows.push(SummaryRow::from_runs(&format!("c={c}"), n as f64, &runs));
        }
    }
    Ok(rows)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Wilson score interval for `successes` out of `n` at normal quantile `z`.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> (f64, f64) {
    assert!(n > 0, "empty sample");
    let n_f = n as f64;
    let p = successes as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let centre = (p + z2 / (2.0 * n_f)) / denom;
    let half = z * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationFailureOptions {
    pub depth: u32,
    pub c: f64,
    /// Defaults to `e^{4/c}`.
    pub c1: Option<f64>,
    pub c2: f64,
    pub tau: f64,
    pub iterations: u32,
    /// Forces the per-edge infection probability, e.g. to 0.
    pub mu_override: Option<f64>,
    pub base_seed: u64,
}

impl Default for IterationFailureOptions {
    fn default() -> Self {
        Self {
            depth: 5,
            c: 0.5,
            c1: None,
            c2: 1.0,
            tau: 0.1,
            iterations: 2000,
            mu_override: None,
            base_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationFailure {
    pub node_count: usize,
    pub iterations: u32,
    pub failures: u32,
    pub rate: f64,
    /// 95% Wilson interval.
    pub wilson_low: f64,
    pub wilson_high: f64,
    /// Wilson half-width at one standard deviation.
    pub sigma_halfwidth: f64,
    /// The `2 / N` guarantee.
    pub bound: f64,
}

/// Runs single Blind Protection iterations from an all-infected tree and
/// counts those that end with any node still infected.
pub fn iteration_failure_experiment(
    opts: &IterationFailureOptions,
) -> Result<IterationFailure, ConfigError> {
    if opts.iterations == 0 {
        return Err(ConfigError::Invalid("iterations must be at least 1".into()));
    }
    let params = BlindProtectionParams {
        c1: opts.c1.unwrap_or_else(|| (4.0 / opts.c).exp()),
        c2: opts.c2,
        ..BlindProtectionParams::with_guarantee(opts.c)
    };
    let cfg = ExperimentConfig {
        depth: opts.depth,
        sim: SimConfig {
            tau: opts.tau,
            mu_override: opts.mu_override,
            ..SimConfig::default()
        },
        budget: BudgetSpec::Auto,
        strategy: StrategySpec::BlindProtection(params),
    };
    let topology = cfg.topology()?;
    let mut sim = cfg.resolve()?;
    let template = BlindProtectionState::new(&topology, sim.tau, params)?;
    sim.max_steps = template.iteration_len();
    let n = topology.node_count();
    let failures = (0..opts.iterations)
        .into_par_iter()
        .map(|k| {
            let mut run_cfg = sim.clone();
            run_cfg.seed = replication_seed(opts.base_seed, k as u64);
            let mut strategy = BlindProtection::from_state(template.clone());
            let traj = run_simulation(
                &mut strategy,
                &topology,
                &run_cfg,
                EpidemicState::all_infected(n),
                Recording::Summary,
            )?;
            Ok(u32::from(!traj.is_cured()))
        })
        .collect::<Result<Vec<u32>, EngineError>>()?
        .into_iter()
        .sum::<u32>();
    let (lo, hi) = wilson_interval(
        failures as u64,
        opts.iterations as u64,
        1.959_963_984_540_054,
    );
    let (s_lo, s_hi) = wilson_interval(failures as u64, opts.iterations as u64, 1.0);
    Ok(IterationFailure {
        node_count: n,
        iterations: opts.iterations,
        failures,
        rate: failures as f64 / opts.iterations as f64,
        wilson_low: lo,
        wilson_high: hi,
        sigma_halfwidth: 0.5 * (s_hi - s_lo),
        bound: 2.0 / n as f64,
    })
}
