use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::engine::{EngineError, SimConfig, Strategy};
use crate::graph::{DfsOrder, GraphTopology};
use crate::strategies::{
    BlindProtection, BlindProtectionParams, BlindProtectionState, CrusadeCuring, Idle, LogBase,
    NaiveCuring, UniformBlind,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key '{key}' given twice")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: bad value for '{key}': {reason}")]
    BadValue {
        line: usize,
        key: String,
        reason: String,
    },
    #[error("missing key '{0}'")]
    Missing(&'static str),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Parsed `key = value` lines. Keys are taken out as they are consumed so
/// that leftovers can be reported as unknown.
#[derive(Debug, Clone, Default)]
pub struct KeyValues {
    entries: BTreeMap<String, (usize, String)>,
}

impl KeyValues {
    /// Blank lines and `#` comments are ignored; order does not matter.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                reason: format!("expected key = value, got '{content}'"),
            })?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(ConfigError::Syntax {
                    line,
                    reason: "empty key".into(),
                });
            }
            if entries.contains_key(&key) {
                return Err(ConfigError::DuplicateKey { line, key });
            }
            entries.insert(key, (line, value.trim().to_string()));
        }
        Ok(Self { entries })
    }

    pub fn read(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    pub fn take_parsed<T>(&mut self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T: std::str::FromStr,
        T::Err: std::fmt::Display,
    {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|e: T::Err| ConfigError::BadValue {
                    line,
                    key: key.to_string(),
                    reason: e.to_string(),
                }),
        }
    }

    /// Errors on the first key nobody consumed.
    pub fn finish(self) -> Result<(), ConfigError> {
        match self.entries.into_iter().min_by_key(|(_, (line, _))| *line) {
            None => Ok(()),
            Some((key, (line, _))) => Err(ConfigError::UnknownKey { line, key }),
        }
    }
}

/// Budget given as a number, or `auto` to use exactly what Blind
/// Protection's schedule needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BudgetSpec {
    Fixed(f64),
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StrategySpec {
    Naive { k_max: Option<usize> },
    BlindProtection(BlindProtectionParams),
    Crusade { order: DfsOrder },
    Uniform,
    Idle,
}

impl StrategySpec {
    pub fn name(&self) -> &'static str {
        match self {
            StrategySpec::Naive { .. } => "naive",
            StrategySpec::BlindProtection(_) => "blind_protection",
            StrategySpec::Crusade { .. } => "crusade",
            StrategySpec::Uniform => "uniform",
            StrategySpec::Idle => "idle",
        }
    }

    pub fn build(
        &self,
        topology: &GraphTopology,
        config: &SimConfig,
    ) -> Result<Box<dyn Strategy + Send>, EngineError> {
        Ok(match self {
            StrategySpec::Naive { k_max } => Box::new(NaiveCuring::new(
                k_max.unwrap_or_else(|| NaiveCuring::default_k_max(config.budget_r)),
            )),
            StrategySpec::BlindProtection(params) => {
                Box::new(BlindProtection::new(topology, config, *params)?)
            }
            StrategySpec::Crusade { order } => {
                Box::new(CrusadeCuring::new(topology, topology.dfs_crusade(*order)?)?)
            }
            StrategySpec::Uniform => Box::new(UniformBlind),
            StrategySpec::Idle => Box::new(Idle),
        })
    }
}

/// One experiment point: a complete binary tree, model parameters and a
/// strategy. Runs start with every node infected.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub depth: u32,
    pub sim: SimConfig,
    pub budget: BudgetSpec,
    pub strategy: StrategySpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            depth: 5,
            sim: SimConfig::default(),
            budget: BudgetSpec::Fixed(SimConfig::default().budget_r),
            strategy: StrategySpec::Naive { k_max: None },
        }
    }
}

fn parse_order(line: usize, v: &str) -> Result<DfsOrder, ConfigError> {
    match v {
        "preorder" => Ok(DfsOrder::Preorder),
        "postorder" => Ok(DfsOrder::Postorder),
        "inorder" => Ok(DfsOrder::Inorder),
        other => Err(ConfigError::BadValue {
            line,
            key: "order".into(),
            reason: format!("expected preorder, postorder or inorder, got '{other}'"),
        }),
    }
}

impl ExperimentConfig {
    /// Consumes the model and strategy keys from `kv`.
    ///
    /// Keys: `depth tau budget_r p_flag q_flag max_steps seed mu strategy`,
    /// plus `c c1 c2 log_base` for `blind_protection`, `k_max` for `naive`
    /// and `order` for `crusade`.
    pub fn from_keys(kv: &mut KeyValues) -> Result<Self, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        if let Some(d) = kv.take_parsed("depth")? {
            cfg.depth = d;
        }
        let sim = &mut cfg.sim;
        if let Some(v) = kv.take_parsed("tau")? {
            sim.tau = v;
        }
        if let Some(v) = kv.take_parsed("p_flag")? {
            sim.p_flag = v;
        }
        if let Some(v) = kv.take_parsed("q_flag")? {
            sim.q_flag = v;
        }
        if let Some(v) = kv.take_parsed("max_steps")? {
            sim.max_steps = v;
        }
        if let Some(v) = kv.take_parsed("seed")? {
            sim.seed = v;
        }
        if let Some(v) = kv.take_parsed("mu")? {
            sim.mu_override = Some(v);
        }
        if let Some((line, v)) = kv.take("budget_r") {
            cfg.budget = if v == "auto" {
                BudgetSpec::Auto
            } else {
                BudgetSpec::Fixed(v.parse().map_err(|e: std::num::ParseFloatError| {
                    ConfigError::BadValue {
                        line,
                        key: "budget_r".into(),
                        reason: e.to_string(),
                    }
                })?)
            };
        }

        let strategy = kv.take("strategy");
        let c: Option<f64> = kv.take_parsed("c")?;
        let c1: Option<f64> = kv.take_parsed("c1")?;
        let c2: Option<f64> = kv.take_parsed("c2")?;
        let log_base = kv.take("log_base");
        let k_max: Option<usize> = kv.take_parsed("k_max")?;
        let order = kv.take("order");
        let (line, name) = strategy.unwrap_or((0, "naive".to_string()));
        let misplaced = |present: bool, key: &str| -> Result<(), ConfigError> {
            if present {
                Err(ConfigError::Invalid(format!(
                    "key '{key}' does not apply to strategy '{name}'"
                )))
            } else {
                Ok(())
            }
        };
        cfg.strategy = match name.as_str() {
            "naive" => {
                misplaced(c.is_some() || c1.is_some() || c2.is_some(), "c/c1/c2")?;
                misplaced(log_base.is_some(), "log_base")?;
                misplaced(order.is_some(), "order")?;
                StrategySpec::Naive { k_max }
            }
            "blind_protection" => {
                misplaced(k_max.is_some(), "k_max")?;
                misplaced(order.is_some(), "order")?;
                let c = c.unwrap_or(0.5);
                let base = BlindProtectionParams::with_guarantee(c);
                let log_base = match log_base {
                    None => LogBase::Natural,
                    Some((_, v)) if v == "e" || v == "natural" => LogBase::Natural,
                    Some((_, v)) if v == "2" => LogBase::Two,
                    Some((line, v)) => {
                        return Err(ConfigError::BadValue {
                            line,
                            key: "log_base".into(),
                            reason: format!("expected e or 2, got '{v}'"),
                        })
                    }
                };
                StrategySpec::BlindProtection(BlindProtectionParams {
                    c,
                    c1: c1.unwrap_or(base.c1),
                    c2: c2.unwrap_or(base.c2),
                    log_base,
                })
            }
            "crusade" | "uniform" | "idle" => {
                misplaced(c.is_some() || c1.is_some() || c2.is_some(), "c/c1/c2")?;
                misplaced(log_base.is_some(), "log_base")?;
                misplaced(k_max.is_some(), "k_max")?;
                if name == "crusade" {
                    let order = match order {
                        None => DfsOrder::Inorder,
                        Some((l, v)) => parse_order(l, &v)?,
                    };
                    StrategySpec::Crusade { order }
                } else {
                    misplaced(order.is_some(), "order")?;
                    if name == "uniform" {
                        StrategySpec::Uniform
                    } else {
                        StrategySpec::Idle
                    }
                }
            }
            other => {
                return Err(ConfigError::BadValue {
                    line,
                    key: "strategy".into(),
                    reason: format!(
                        "expected naive, blind_protection, crusade, uniform or idle, got '{other}'"
                    ),
                })
            }
        };
        if cfg.budget == BudgetSpec::Auto
            && !matches!(cfg.strategy, StrategySpec::BlindProtection(_))
        {
            return Err(ConfigError::Invalid(
                "budget_r = auto is only meaningful for blind_protection".into(),
            ));
        }
        if let BudgetSpec::Fixed(r) = cfg.budget {
            cfg.sim.budget_r = r;
        }
        cfg.resolve()?;
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut kv = KeyValues::parse(text)?;
        let cfg = Self::from_keys(&mut kv)?;
        kv.finish()?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self, ConfigError> {
        let mut kv = KeyValues::read(path)?;
        let cfg = Self::from_keys(&mut kv)?;
        kv.finish()?;
        Ok(cfg)
    }

    pub fn topology(&self) -> Result<GraphTopology, ConfigError> {
        Ok(GraphTopology::complete_binary_tree(self.depth).map_err(EngineError::from)?)
    }

    /// Simulation config with the budget filled in and validated.
    pub fn resolve(&self) -> Result<SimConfig, ConfigError> {
        let mut sim = self.sim.clone();
        sim.budget_r = match (self.budget, &self.strategy) {
            (BudgetSpec::Fixed(r), _) => r,
            (BudgetSpec::Auto, StrategySpec::BlindProtection(params)) => {
                BlindProtectionState::new(&self.topology()?, sim.tau, *params)?.peak_demand()
            }
            (BudgetSpec::Auto, _) => {
                return Err(ConfigError::Invalid(
                    "budget_r = auto needs blind_protection".into(),
                ))
            }
        };
        sim.validate()?;
        Ok(sim)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// `p_flag = 1 - v`, `q_flag = v`.
    ErrorProb,
    Depth,
    /// Blind Protection's `c`.
    BudgetExponent,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::ErrorProb => "error_prob",
            SweepAxis::Depth => "depth",
            SweepAxis::BudgetExponent => "c",
        }
    }
}

/// A base configuration swept along one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub base: ExperimentConfig,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub replications: u32,
    pub output: Option<PathBuf>,
}

impl ExperimentPlan {
    /// Experiment keys plus `sweep`, `values` (comma separated),
    /// `replications` and optionally `output`.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut kv = KeyValues::parse(text)?;
        let (line, axis) = kv.take("sweep").ok_or(ConfigError::Missing("sweep"))?;
        let axis = match axis.as_str() {
            "error_prob" => SweepAxis::ErrorProb,
            "depth" => SweepAxis::Depth,
            "c" => SweepAxis::BudgetExponent,
            other => {
                return Err(ConfigError::BadValue {
                    line,
                    key: "sweep".into(),
                    reason: format!("expected error_prob, depth or c, got '{other}'"),
                })
            }
        };
        let (line, list) = kv.take("values").ok_or(ConfigError::Missing("values"))?;
        let values = list
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ConfigError::BadValue {
                line,
                key: "values".into(),
                reason: e.to_string(),
            })?;
        let replications = kv.take_parsed("replications")?.unwrap_or(20);
        let output = kv.take("output").map(|(_, v)| PathBuf::from(v));
        let base = ExperimentConfig::from_keys(&mut kv)?;
        kv.finish()?;
        let plan = Self {
            base,
            axis,
            values,
            replications,
            output,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn read(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.replications == 0 {
            return Err(ConfigError::Invalid(
                "replications must be at least 1".into(),
            ));
        }
        if self.values.is_empty() {
            return Err(ConfigError::Invalid("no sweep values".into()));
        }
        for i in 0..self.values.len() {
            self.point(i)?.resolve()?;
        }
        Ok(())
    }

    /// Configuration at sweep index `i`.
    pub fn point(&self, i: usize) -> Result<ExperimentConfig, ConfigError> {
        let v = self.values[i];
        let mut cfg = self.base.clone();
        match self.axis {
            SweepAxis::ErrorProb => {
                if !(0.0..=1.0).contains(&v) {
                    return Err(ConfigError::Invalid(format!("error probability {v}")));
                }
                cfg.sim.p_flag = 1.0 - v;
                cfg.sim.q_flag = v;
            }
            SweepAxis::Depth => {
                if !(v >= 1.0 && v.fract() == 0.0 && v <= 30.0) {
                    return Err(ConfigError::Invalid(format!("depth {v}")));
                }
                cfg.depth = v as u32;
            }
            SweepAxis::BudgetExponent => match &mut cfg.strategy {
                StrategySpec::BlindProtection(p) => p.c = v,
                _ => {
                    return Err(ConfigError::Invalid(
                        "sweep = c needs strategy = blind_protection".into(),
                    ))
                }
            },
        }
        Ok(cfg)
    }
}
