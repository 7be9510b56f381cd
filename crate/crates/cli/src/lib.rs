//! The `taskdiff` command line: run a mechanism on a scenario file, audit
//! its incentive properties, replay the worked examples, or generate random
//! scenarios.
//!
//! Exit codes: 0 success, 2 usage or precondition error, 3 a property was
//! violated, 1 anything else (including a failed demo assertion).

pub mod demo;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use taskdiff_core::audit::{audit_properties, AuditOptions, AuditReport, Property, Verdict};
use taskdiff_core::generate::{generate_file, GenConfig, GenError, QualityLevels};
use taskdiff_core::scenario_file::{parse_scenario, ScenarioFileError};
use taskdiff_core::sim::SimError;
use taskdiff_core::{
    bundled, Mechanism, MechanismError, MechanismKind, Rational, ReportProfile, RunMode, RunReport, Scenario, TieBreak,
};

#[derive(Debug, Parser)]
#[command(
    name = "taskdiff",
    version,
    about = "Diffusion mechanisms for single-task allocation under execution uncertainty"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a mechanism on a scenario and print the outcome.
    Run(RunArgs),
    /// Audit IR, IC, WBB, w-chain, payoff independence and the efficiency gap.
    Audit(AuditArgs),
    /// Replay a worked example and assert its reference values.
    Demo(DemoArgs),
    /// Write a random scenario.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Scenario file, or the name of a bundled scenario.
    pub scenario: String,
    /// pev, idm, qaidm or vcg.
    pub mechanism: MechanismKind,
    /// Evaluate payoffs at this realized quality.
    #[arg(long, conflicts_with_all = ["expected", "seed"])]
    pub quality: Option<Rational>,
    /// Report expected payoffs and utilities (the default).
    #[arg(long, conflicts_with = "seed")]
    pub expected: bool,
    /// Draw the realized quality with this seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// With --seed: run this many draws and compare with the expectations.
    #[arg(long, requires = "seed")]
    pub trials: Option<u64>,
    /// Break welfare ties uniformly at random with this seed instead of by
    /// smallest id.
    #[arg(long)]
    pub tie_seed: Option<u64>,
    /// Also write the report as JSON to this path.
    #[arg(long)]
    pub json_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    pub scenario: String,
    pub mechanism: MechanismKind,
    /// Every property (the default when no property flag is given).
    #[arg(long)]
    pub all: bool,
    #[arg(long)]
    pub ir: bool,
    #[arg(long)]
    pub ic: bool,
    #[arg(long)]
    pub wbb: bool,
    /// Nondecreasing w chain and payoff independence from own reports.
    #[arg(long)]
    pub lemmas: bool,
    #[arg(long)]
    pub efficiency: bool,
    /// Probability step of PoQ deviations.
    #[arg(long, default_value = "1/10")]
    pub grid_step: Rational,
    /// Seed for sampled invitation subsets and random contexts.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random non-truthful contexts searched besides all-truthful.
    #[arg(long, default_value_t = 2)]
    pub contexts: usize,
    /// Also write the report as JSON to this path.
    #[arg(long)]
    pub json_out: Option<PathBuf>,
}

impl AuditArgs {
    fn properties(&self) -> Vec<Property> {
        let picked: Vec<Property> = [
            (self.ir, &[Property::Ir][..]),
            (self.ic, &[Property::Ic]),
            (self.wbb, &[Property::Wbb]),
            (self.lemmas, &[Property::WChain, Property::PayoffIndependence]),
            (self.efficiency, &[Property::Efficiency]),
        ]
        .into_iter()
        .filter(|(on, _)| *on)
        .flat_map(|(_, ps)| ps.iter().copied())
        .collect();
        if self.all || picked.is_empty() {
            Property::ALL.to_vec()
        } else {
            picked
        }
    }
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    /// example1, example2, prop1 or idm-vs-pev.
    pub name: String,
    /// Also write the report as JSON to this path.
    #[arg(long)]
    pub json_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Number of agents.
    pub agents: usize,
    /// Comma-separated quality levels, e.g. `0,1/2,1`.
    #[arg(long, value_delimiter = ',', conflicts_with = "levels")]
    pub quality_levels: Option<Vec<Rational>>,
    /// Number of quality levels to draw.
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    /// Upper end of drawn quality levels and costs.
    #[arg(long, default_value = "10")]
    pub max_quality: Rational,
    /// Probability of each extra invitation edge.
    #[arg(long, default_value_t = 0.25)]
    pub density: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioFileError),
    #[error("{0}")]
    Precondition(String),
    #[error("demo `{name}` does not reproduce its expected values:\n{details}")]
    Demo { name: String, details: String },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Scenario(_) | CliError::Precondition(_) => 2,
            CliError::Demo { .. } | CliError::Write { .. } => 1,
        }
    }
}

impl From<MechanismError> for CliError {
    fn from(e: MechanismError) -> Self {
        CliError::Precondition(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Mechanism(m) => m.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<GenError> for CliError {
    fn from(e: GenError) -> Self {
        CliError::Usage(e.to_string())
    }
}

/// What a successful command printed, and its exit code (0 or 3).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub text: String,
    pub code: u8,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, code: 0 }
    }
}

/// Loads a scenario from a path, falling back to the bundled scenario of
/// that name (with or without `.json`).
pub fn load_scenario(name: &str) -> Result<(Scenario, ReportProfile), CliError> {
    let path = Path::new(name);
    if path.exists() {
        return Ok(parse_scenario(path)?);
    }
    let bare = path.file_name().and_then(|s| s.to_str()).unwrap_or(name);
    if bundled::source(bare).is_some() {
        return bundled::load(bare).map_err(|e| CliError::Precondition(e.to_string()));
    }
    Err(CliError::Usage(format!(
        "no scenario file `{name}` and no bundled scenario of that name (bundled: {})",
        bundled::NAMES.join(", ")
    )))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    fs::write(path, text).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

pub fn execute(cli: Cli) -> Result<Output, CliError> {
    match cli.command {
        Command::Run(args) => run(&args),
        Command::Audit(args) => audit(&args),
        Command::Demo(args) => demo_cmd(&args),
        Command::Gen(args) => gen(&args),
    }
}

pub fn run(args: &RunArgs) -> Result<Output, CliError> {
    let (scenario, reports) = load_scenario(&args.scenario)?;
    let mode = match (args.quality, args.seed, args.trials) {
        (Some(q), _, _) => {
            if !scenario.quality_levels().contains(&q) {
                return Err(CliError::Precondition(format!(
                    "--quality {q} is not one of the scenario's quality levels"
                )));
            }
            RunMode::Quality { quality: q }
        }
        (None, Some(seed), Some(trials)) => RunMode::MonteCarlo { seed, trials },
        (None, Some(seed), None) => RunMode::Sample { seed },
        (None, None, _) => RunMode::Expected,
    };
    let mechanism = Mechanism {
        kind: args.mechanism,
        tie_break: args.tie_seed.map_or(TieBreak::SmallestId, TieBreak::Seeded),
    };
    let report = RunReport::build(&scenario, &reports, mechanism, mode)?;
    if let Some(path) = &args.json_out {
        write_json(path, &report)?;
    }
    let code = match &report.monte_carlo {
        Some(mc) if !mc.comparison.pass() => 3,
        _ => 0,
    };
    Ok(Output {
        text: report.to_string(),
        code,
    })
}

#[derive(Debug, Serialize)]
struct AuditFile<'a> {
    scenario: &'a str,
    mechanism: MechanismKind,
    grid_step: Rational,
    seed: u64,
    reports: &'a [AuditReport],
}

pub fn audit(args: &AuditArgs) -> Result<Output, CliError> {
    let (scenario, reports) = load_scenario(&args.scenario)?;
    if reports != scenario.truthful() {
        return Err(CliError::Usage(
            "audits start from truthful reports; remove the reports block".into(),
        ));
    }
    if !args.grid_step.is_positive() || args.grid_step > Rational::ONE {
        return Err(CliError::Usage("--grid-step must lie in (0, 1]".into()));
    }
    let options = AuditOptions {
        grid_step: args.grid_step,
        seed: args.seed,
        random_contexts: args.contexts,
    };
    let results = audit_properties(&scenario, Mechanism::new(args.mechanism), &args.properties(), &options);
    if let Some(path) = &args.json_out {
        write_json(
            path,
            &AuditFile {
                scenario: &args.scenario,
                mechanism: args.mechanism,
                grid_step: args.grid_step,
                seed: args.seed,
                reports: &results,
            },
        )?;
    }
    let text = results.iter().map(|r| r.to_string()).collect::<Vec<_>>().join("\n");
    if results.iter().any(AuditReport::is_violated) {
        return Ok(Output { text, code: 3 });
    }
    if results.iter().all(|r| r.verdict == Verdict::NotApplicable) {
        return Err(CliError::Precondition(text));
    }
    Ok(Output::ok(text))
}

pub fn demo_cmd(args: &DemoArgs) -> Result<Output, CliError> {
    let demo = demo::run_demo(&args.name)?;
    if let Some(path) = &args.json_out {
        write_json(path, &demo)?;
    }
    let text = demo.to_string();
    if demo.passed() {
        Ok(Output::ok(text))
    } else {
        Err(CliError::Demo {
            name: demo.name.clone(),
            details: text,
        })
    }
}

pub fn gen(args: &GenArgs) -> Result<Output, CliError> {
    let config = GenConfig {
        agents: args.agents,
        quality_levels: match &args.quality_levels {
            Some(levels) => QualityLevels::Explicit(levels.clone()),
            None => QualityLevels::Count(args.levels),
        },
        max_quality: args.max_quality,
        density: args.density,
        max_support: 4,
        seed: args.seed,
    };
    let text = generate_file(&config)?.to_json();
    match &args.out {
        Some(path) => {
            fs::write(path, &text).map_err(|source| CliError::Write {
                path: path.clone(),
                source,
            })?;
            Ok(Output::ok(format!("wrote {}", path.display())))
        }
        None => Ok(Output::ok(text.trim_end().to_string())),
    }
}
