//! Command-line front end.
//!
//! A run is described by a [`Scenario`], read from `--scenario` or assembled
//! from individual flags; flags given alongside `--scenario` override its
//! fields. All output files are rendered in memory and written at the end.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{load_application, ApplicationModel};
use crate::report;
use crate::sim::{budget_between_low_and_hp, compare, run_simulation, SimOptions, SimulationReport};
use crate::strategies::{Strategy, StrategyKind};
use crate::traces::{
    allocate_budget, gen_synthetic_carbon, gen_synthetic_workload, load_carbon_trace,
    load_workload_trace, write_carbon_trace, write_workload_trace, AllocationMode, CarbonTrace,
    WorkloadTrace,
};

#[derive(Debug, Parser)]
#[command(name = "carbon-budget", version, about = "Carbon-budgeted microservice configuration")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic hourly trace as CSV
    Generate(GenerateArgs),
    /// Replay strategies over a scenario, writing hourly.csv and summary.csv
    Simulate(ScenarioArgs),
    /// Replay strategies and write comparison.csv with pairwise deltas
    Compare(ScenarioArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TraceKind {
    Carbon,
    Workload,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: TraceKind,
    #[arg(long, default_value_t = 8760)]
    pub hours: usize,
    /// Mean level (gCO2e/kWh or users per hour)
    #[arg(long)]
    pub base: f64,
    /// Height of the daily sinusoid; must be below base
    #[arg(long, default_value_t = 0.0)]
    pub amplitude: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV file
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Default)]
pub struct ScenarioArgs {
    /// Scenario JSON file; other flags override its fields
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Application description (JSON)
    #[arg(long)]
    pub app: Option<PathBuf>,
    /// Carbon-intensity trace (CSV `hour,ci_g_per_kwh`)
    #[arg(long)]
    pub carbon: Option<PathBuf>,
    /// Workload trace (CSV `hour,users`)
    #[arg(long)]
    pub workload: Option<PathBuf>,
    /// Total carbon budget over the whole trace, in grams
    #[arg(long)]
    pub budget: Option<f64>,
    #[arg(long, value_parser = parse_alloc)]
    pub alloc: Option<AllocationMode>,
    /// Comma-separated subset of os,bnb,hp,sca,ca
    #[arg(long, value_delimiter = ',')]
    pub strategies: Option<Vec<String>>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Output directory
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Reseeds synthetic traces: carbon uses N, workload N + 1
    #[arg(long)]
    pub seed: Option<u64>,
    /// Roll unspent hourly allowance into the next hour
    #[arg(long)]
    pub carryover: bool,
}

fn parse_alloc(s: &str) -> std::result::Result<AllocationMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorParams {
    pub hours: usize,
    pub base: f64,
    pub amplitude: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TraceSource {
    Path(PathBuf),
    Synthetic(GeneratorParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BudgetSpec {
    /// Fixed total in grams over the horizon.
    TotalG(f64),
    /// Fraction of the way from low-power to high-performance emissions.
    BetweenLowAndHp(f64),
}

/// A complete simulation setup. Relative paths resolve against the scenario
/// file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub app: PathBuf,
    pub carbon: TraceSource,
    pub workload: TraceSource,
    pub budget: BudgetSpec,
    #[serde(default = "default_alloc")]
    pub alloc: AllocationMode,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<String>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    /// Three configurations for the CA baseline, each a list of version names.
    #[serde(default)]
    pub ca_candidates: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub carryover: bool,
}

fn default_alloc() -> AllocationMode {
    AllocationMode::Proportional
}

fn default_strategies() -> Vec<String> {
    ["os", "hp", "sca", "ca"].map(String::from).to_vec()
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut scenario: Scenario = serde_json::from_str(&text)
            .map_err(|e| Error::Scenario(format!("{}: {e}", path.display())))?;
        let dir = path.parent().unwrap_or(Path::new(""));
        scenario.app = dir.join(&scenario.app);
        for src in [&mut scenario.carbon, &mut scenario.workload] {
            if let TraceSource::Path(p) = src {
                *p = dir.join(&*p);
            }
        }
        Ok(scenario)
    }

    /// Reads `--scenario` if given and applies the remaining flags on top.
    pub fn from_args(args: &ScenarioArgs) -> Result<Self> {
        let mut scenario = match &args.scenario {
            Some(path) => Some(Scenario::load(path)?),
            None => None,
        };
        let missing = |flag: &str| Error::Scenario(format!("--{flag} is required without --scenario"));
        let mut s = match scenario.take() {
            Some(s) => s,
            None => Scenario {
                app: args.app.clone().ok_or_else(|| missing("app"))?,
                carbon: TraceSource::Path(args.carbon.clone().ok_or_else(|| missing("carbon"))?),
                workload: TraceSource::Path(args.workload.clone().ok_or_else(|| missing("workload"))?),
                budget: BudgetSpec::TotalG(args.budget.ok_or_else(|| missing("budget"))?),
                alloc: default_alloc(),
                strategies: default_strategies(),
                alpha: None,
                beta: None,
                ca_candidates: None,
                carryover: false,
            },
        };
        if let Some(p) = &args.app {
            s.app = p.clone();
        }
        if let Some(p) = &args.carbon {
            s.carbon = TraceSource::Path(p.clone());
        }
        if let Some(p) = &args.workload {
            s.workload = TraceSource::Path(p.clone());
        }
        if let Some(b) = args.budget {
            s.budget = BudgetSpec::TotalG(b);
        }
        if let Some(a) = args.alloc {
            s.alloc = a;
        }
        if let Some(list) = &args.strategies {
            s.strategies = list.clone();
        }
        if args.alpha.is_some() {
            s.alpha = args.alpha;
        }
        if args.beta.is_some() {
            s.beta = args.beta;
        }
        if let Some(seed) = args.seed {
            if let TraceSource::Synthetic(g) = &mut s.carbon {
                g.seed = seed;
            }
            if let TraceSource::Synthetic(g) = &mut s.workload {
                g.seed = seed.wrapping_add(1);
            }
        }
        s.carryover |= args.carryover;
        Ok(s)
    }
}

/// Everything needed to call [`run_simulation`].
#[derive(Debug, Clone)]
pub struct PreparedRun {
    pub app: ApplicationModel,
    pub carbon: CarbonTrace,
    pub workload: WorkloadTrace,
    pub total_budget_g: f64,
    pub strategies: Vec<Strategy>,
    pub options: SimOptions,
    pub alloc: AllocationMode,
}

fn load_carbon(src: &TraceSource) -> Result<CarbonTrace> {
    match src {
        TraceSource::Path(p) => load_carbon_trace(p),
        TraceSource::Synthetic(g) => gen_synthetic_carbon(g.hours, g.base, g.amplitude, g.seed),
    }
}

fn load_workload(src: &TraceSource) -> Result<WorkloadTrace> {
    match src {
        TraceSource::Path(p) => load_workload_trace(p),
        TraceSource::Synthetic(g) => gen_synthetic_workload(g.hours, g.base, g.amplitude, g.seed),
    }
}

impl PreparedRun {
    pub fn new(s: &Scenario) -> Result<Self> {
        let app = load_application(&s.app)?.with_weights(s.alpha, s.beta)?;
        let carbon = load_carbon(&s.carbon)?;
        let workload = load_workload(&s.workload)?;
        if carbon.len() != workload.len() {
            return Err(Error::LengthMismatch {
                what: "workload trace",
                got: workload.len(),
                expected: carbon.len(),
            });
        }
        let total_budget_g = match s.budget {
            BudgetSpec::TotalG(g) => g,
            BudgetSpec::BetweenLowAndHp(f) => {
                if !(f.is_finite() && f >= 0.0) {
                    return Err(Error::Scenario(format!(
                        "budget.between_low_and_hp must be a non-negative fraction, got {f}"
                    )));
                }
                budget_between_low_and_hp(&app, &carbon, &workload, f)
            }
        };
        if s.strategies.is_empty() {
            return Err(Error::Scenario("strategies: at least one strategy is required".into()));
        }
        let candidates = match &s.ca_candidates {
            None => None,
            Some(list) => {
                let configs = list
                    .iter()
                    .map(|names| app.configuration_by_names(names))
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| Error::Scenario(format!("ca_candidates: {e}")))?;
                let triple: [_; 3] = configs.try_into().map_err(|v: Vec<_>| {
                    Error::Scenario(format!("ca_candidates: expected 3 configurations, got {}", v.len()))
                })?;
                Some(triple)
            }
        };
        let strategies = s
            .strategies
            .iter()
            .map(|name| {
                let kind: StrategyKind = name.trim().parse()?;
                match (&candidates, kind) {
                    (Some(c), StrategyKind::Ca) => Strategy::ca(&app, c.clone()),
                    _ => Ok(Strategy::new(&app, kind)),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PreparedRun {
            app,
            carbon,
            workload,
            total_budget_g,
            strategies,
            options: SimOptions { carryover: s.carryover },
            alloc: s.alloc,
        })
    }

    pub fn run(&self) -> Result<SimulationReport> {
        let schedule = allocate_budget(self.total_budget_g, &self.workload, self.alloc)?;
        run_simulation(
            &self.app,
            &self.carbon,
            &self.workload,
            &schedule,
            &self.strategies,
            self.options,
        )
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<String> {
    let mut buf = Vec::new();
    match args.kind {
        TraceKind::Carbon => {
            let t = gen_synthetic_carbon(args.hours, args.base, args.amplitude, args.seed)?;
            write_carbon_trace(&mut buf, &t)
        }
        TraceKind::Workload => {
            let t = gen_synthetic_workload(args.hours, args.base, args.amplitude, args.seed)?;
            write_workload_trace(&mut buf, &t)
        }
    }
    .map_err(|e| Error::io(&args.out, e))?;
    write_file(&args.out, &buf)?;
    Ok(format!("seed: {}\nwrote {}\n", args.seed, args.out.display()))
}

pub fn cmd_simulate(args: &ScenarioArgs) -> Result<String> {
    let run = PreparedRun::new(&Scenario::from_args(args)?)?;
    let report = run.run()?;
    let hourly = report::hourly_csv(&report);
    let summary = report::summary_csv(&report);
    write_file(&args.out.join("hourly.csv"), hourly.as_bytes())?;
    write_file(&args.out.join("summary.csv"), summary.as_bytes())?;
    Ok(summary)
}

pub fn cmd_compare(args: &ScenarioArgs) -> Result<String> {
    let run = PreparedRun::new(&Scenario::from_args(args)?)?;
    let report = run.run()?;
    let table = report::comparison_csv(&compare(&report));
    write_file(&args.out.join("comparison.csv"), table.as_bytes())?;
    Ok(table)
}

/// Runs a parsed command and returns what should go to stdout.
pub fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Compare(a) => cmd_compare(a),
    }
}
