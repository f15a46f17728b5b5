use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sicure::analysis::{
    curing_time_ratio, escape_one_step_lower_bound, find_mgf_root, gamblers_ruin_up_prob,
    kl_divergence, min_geometric_param, path_reinfection_prob, required_samples, wald_bound,
    AnalysisError, EscapeParams, RandomWalkSpec, SampleMode,
};
use sicure::engine::{run_simulation, EngineError, EpidemicState, Recording};
use sicure::graph::cutwidth_exact;
use sicure::harness::{
    fig3_experiment, fig4_experiment, format_sig, iteration_failure_experiment, rows_to_csv,
    run_plan, ConfigError, ExperimentConfig, ExperimentPlan, Fig3Options, Fig4Options,
    IterationFailureOptions, SummaryRow,
};
use sicure::GraphTopology;

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_CENSORED: u8 = 3;

#[derive(Parser)]
#[command(name = "sicure", version, about = "Controlled SI epidemics on trees")]
struct Cli {
    /// Base seed; overrides any seed in a config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Replications per sweep point (iterations for `iterfail`).
    #[arg(long, global = true)]
    reps: Option<u32>,
    /// Worker threads for replication batches.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Exit with status 3 when any sweep point has a larger censored fraction.
    #[arg(long, global = true, default_value_t = 0.5)]
    max_censored: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One run from an all-infected tree; writes the trajectory CSV.
    Simulate { config: PathBuf },
    /// Runs an experiment plan; writes the summary CSV.
    Sweep { plan: PathBuf },
    /// Naive Curing cure time against flag error on 31 nodes.
    Fig3 {
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long, default_value_t = 100_000)]
        horizon: u64,
    },
    /// Blind Protection cure time against tree size.
    Fig4 {
        #[arg(long, default_value_t = 8)]
        max_depth: u32,
        #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.5, 0.75])]
        c: Vec<f64>,
    },
    /// Failure rate of single Blind Protection iterations.
    Iterfail {
        #[arg(long, default_value_t = 5)]
        depth: u32,
        #[arg(long, default_value_t = 0.5)]
        c: f64,
        #[arg(long)]
        c1: Option<f64>,
    },
    /// Exact cutwidth of a graph given as an edge list.
    Cutwidth { graph: PathBuf },
    /// Evaluates a closed-form quantity; parameters as key=value.
    Analyze {
        evaluator: String,
        params: Vec<String>,
    },
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Other(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Engine(inner) => CliError::Other(inner.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        CliError::Other(e.to_string())
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_FAILURE);
        }
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(CliError::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    let seed = cli.seed.unwrap_or(0);
    match &cli.command {
        Command::Simulate { config } => {
            let cfg = ExperimentConfig::read(config)?;
            let topo = cfg.topology()?;
            let mut sim = cfg.resolve()?;
            if let Some(s) = cli.seed {
                sim.seed = s;
            }
            let mut strategy = cfg.strategy.build(&topo, &sim)?;
            let traj = run_simulation(
                strategy.as_mut(),
                &topo,
                &sim,
                EpidemicState::all_infected(topo.node_count()),
                Recording::Full,
            )?;
            write_output(cli.out.as_deref(), &traj.to_csv())?;
            Ok(0)
        }
        Command::Sweep { plan } => {
            let mut plan = ExperimentPlan::read(plan)?;
            if let Some(r) = cli.reps {
                plan.replications = r;
            }
            let rows = run_plan(&plan, seed)?;
            let out = cli.out.clone().or(plan.output.clone());
            finish_rows(out.as_deref(), &rows, cli.max_censored)
        }
        Command::Fig3 { k_max, horizon } => {
            let defaults = Fig3Options::default();
            let opts = Fig3Options {
                k_max: *k_max,
                horizon: *horizon,
                replications: cli.reps.unwrap_or(defaults.replications),
                base_seed: seed,
                ..defaults
            };
            let rows = fig3_experiment(&opts)?;
            finish_rows(cli.out.as_deref(), &rows, cli.max_censored)
        }
        Command::Fig4 { max_depth, c } => {
            if *max_depth < 4 {
                return Err(CliError::Config("max-depth must be at least 4".into()));
            }
            let defaults = Fig4Options::default();
            let opts = Fig4Options {
                depths: (4..=*max_depth).collect(),
                cs: c.clone(),
                replications: cli.reps.unwrap_or(defaults.replications),
                base_seed: seed,
                ..defaults
            };
            let rows = fig4_experiment(&opts)?;
            finish_rows(cli.out.as_deref(), &rows, cli.max_censored)
        }
        Command::Iterfail { depth, c, c1 } => {
            let defaults = IterationFailureOptions::default();
            let opts = IterationFailureOptions {
                depth: *depth,
                c: *c,
                c1: *c1,
                iterations: cli.reps.unwrap_or(defaults.iterations),
                base_seed: seed,
                ..defaults
            };
            let f = iteration_failure_experiment(&opts)?;
            let text = format!(
                "node_count={}\niterations={}\nfailures={}\nrate={}\nwilson_low={}\nwilson_high={}\nbound={}\n",
                f.node_count,
                f.iterations,
                f.failures,
                format_sig(f.rate),
                format_sig(f.wilson_low),
                format_sig(f.wilson_high),
                format_sig(f.bound)
            );
            write_output(cli.out.as_deref(), &text)?;
            Ok(0)
        }
        Command::Cutwidth { graph } => {
            let text = fs::read_to_string(graph)
                .map_err(|e| CliError::Config(format!("reading {}: {e}", graph.display())))?;
            let topo = GraphTopology::parse_edge_list(&text)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let w = cutwidth_exact(&topo).map_err(|e| CliError::Other(e.to_string()))?;
            write_output(cli.out.as_deref(), &format!("cutwidth={w}\n"))?;
            Ok(0)
        }
        Command::Analyze { evaluator, params } => {
            let lines = analyze(evaluator, params)?;
            let text: String = lines
                .into_iter()
                .map(|(k, v)| format!("{k}={v}\n"))
                .collect();
            write_output(cli.out.as_deref(), &text)?;
            Ok(0)
        }
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => {
            fs::write(p, text).map_err(|e| CliError::Other(format!("writing {}: {e}", p.display())))
        }
        None => Ok(io::stdout().lock().write_all(text.as_bytes())?),
    }
}

fn finish_rows(
    path: Option<&Path>,
    rows: &[SummaryRow],
    max_censored: f64,
) -> Result<u8, CliError> {
    write_output(path, &rows_to_csv(rows))?;
    let worst = rows
        .iter()
        .map(SummaryRow::censored_fraction)
        .fold(0.0, f64::max);
    if worst > max_censored {
        eprintln!(
            "warning: censored fraction {} exceeds {}",
            format_sig(worst),
            format_sig(max_censored)
        );
        return Ok(EXIT_CENSORED);
    }
    Ok(0)
}

struct Params(BTreeMap<String, String>);

impl Params {
    fn parse(items: &[String]) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for item in items {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("expected key=value, got '{item}'")))?;
            if map
                .insert(k.trim().to_string(), v.trim().to_string())
                .is_some()
            {
                return Err(CliError::Config(format!("parameter '{k}' given twice")));
            }
        }
        Ok(Self(map))
    }

    fn get<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, CliError> {
        let raw = self
            .0
            .remove(key)
            .ok_or_else(|| CliError::Config(format!("missing parameter '{key}'")))?;
        raw.parse()
            .map_err(|_| CliError::Config(format!("bad value for '{key}': '{raw}'")))
    }

    fn get_or<T: std::str::FromStr>(&mut self, key: &str, default: T) -> Result<T, CliError> {
        if self.0.contains_key(key) {
            self.get(key)
        } else {
            Ok(default)
        }
    }

    fn finish(self) -> Result<(), CliError> {
        match self.0.keys().next() {
            Some(k) => Err(CliError::Config(format!("unknown parameter '{k}'"))),
            None => Ok(()),
        }
    }
}

fn check_unit(name: &str, x: f64) -> Result<f64, CliError> {
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(CliError::Config(format!(
            "{name} must lie in [0, 1], got {x}"
        )))
    }
}

type Lines = Vec<(&'static str, String)>;

fn analyze(evaluator: &str, items: &[String]) -> Result<Lines, CliError> {
    let mut p = Params::parse(items)?;
    let lines = match evaluator {
        "kl" => {
            let (a, b) = (p.get("p")?, p.get("q")?);
            vec![("kl", format_sig(kl_divergence(a, b)?))]
        }
        "min-geometric" => {
            let (i, mu) = (p.get("i")?, p.get("mu")?);
            vec![("param", format_sig(min_geometric_param(i, check_unit("mu", mu)?)))]
        }
        "mgf-root" => {
            let (r, tau) = (p.get("r")?, p.get("tau")?);
            let spec = RandomWalkSpec::from_budget(r, tau)?;
            let root = find_mgf_root(&spec)?;
            vec![
                ("drift", format_sig(spec.drift())),
                ("root", format_sig(root)),
                ("ln_r_over_3", format_sig((r as f64 / 3.0).ln())),
            ]
        }
        "wald" => {
            let (x, k) = (p.get("x")?, p.get("k")?);
            vec![("bound", format_sig(wald_bound(x, k)))]
        }
        "ruin" => {
            let up = p.get("up_p")?;
            let (start, low, high) = (p.get("start")?, p.get("low")?, p.get("high")?);
            vec![("up_prob", format_sig(gamblers_ruin_up_prob(up, start, low, high)?))]
        }
        "path" => {
            let (m, mu, delta) = (p.get("m")?, p.get("mu")?, p.get("delta")?);
            let res = path_reinfection_prob(m, mu, delta)?;
            vec![
                ("plain", format_sig(res.plain)),
                ("start_anchored", format_sig(res.start_anchored)),
                ("ratio", format_sig(res.ratio)),
            ]
        }
        "escape" => {
            let (n, alpha, tau) = (p.get("n")?, p.get("alpha")?, p.get("tau")?);
            let b = escape_one_step_lower_bound(&EscapeParams::new(n, alpha, tau)?);
            vec![
                ("product", format_sig(b.product)),
                ("ln_product", format_sig(b.ln_product)),
                ("tau_limit", format_sig(b.tau_limit)),
                ("ln_tau_limit", format_sig(b.ln_tau_limit)),
            ]
        }
        "samples" => {
            let (eps, d) = (p.get("epsilon")?, p.get("d")?);
            let r = p.get_or("r", 1u64)?;
            let kappa = p.get_or("kappa", 1.0)?;
            let mode = match p.get_or("mode", "single".to_string())?.as_str() {
                "single" => SampleMode::Single,
                "trees" => SampleMode::MaxOfTrees,
                other => return Err(CliError::Config(format!("unknown mode '{other}'"))),
            };
            vec![("samples", required_samples(eps, d, mode, r, kappa)?.to_string())]
        }
        "curing-ratio" => {
            let (x, r) = (p.get("x")?, p.get("r")?);
            vec![("ratio", format_sig(curing_time_ratio(x, r)))]
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown evaluator '{other}' (kl, min-geometric, mgf-root, wald, ruin, path, escape, samples, curing-ratio)"
            )))
        }
    };
    p.finish()?;
    Ok(lines)
}
