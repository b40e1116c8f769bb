//! Command-line front end: file in, report out.
//!
//! Exit codes: 0 when the report records no failure, 1 when it does
//! (a violation, a failed observability gate, inequivalent systems), and 2
//! for unreadable or invalid input.

pub mod report;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use reqkit::classification::classify_set;
use reqkit::goals::{
    check_designated, designate, happy_sets, parse_goal_model, render_designated, variants,
    GoalModel, HappySet,
};
use reqkit::language::{parse_requirements, RequirementSet};
use reqkit::monitor::{load_trace, monitor_set};
use reqkit::switching::{
    controller_run, criticality, equivalent, flatten, parse_switching, parse_valuations,
    AdaptiveSystem, MachineSwitchingSystem, SwitchingDocument, SwitchingSystem,
};

pub use report::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "reqkit", version, about = "Requirements analysis toolkit")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify each requirement as satisfiable, falsifiable, or vague.
    Classify { reqs: PathBuf },
    /// Monitor requirements against a timed trace.
    Monitor { reqs: PathBuf, trace: PathBuf },
    /// Analyze a goal model.
    Goals {
        model: PathBuf,
        /// Requirements referenced by the model's goals.
        #[arg(long)]
        reqs: Option<PathBuf>,
        #[command(subcommand)]
        action: GoalsAction,
    },
    /// Analyze a machine- or mode-switching system.
    Switch {
        system: PathBuf,
        /// Requirements named by the mode-requirement table.
        #[arg(long)]
        reqs: Option<PathBuf>,
        #[command(subcommand)]
        action: SwitchAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum GoalsAction {
    /// All leaf adoptions that satisfy the mandatory goals.
    Variants,
    /// Happy sets, or a diagnostic when softgoal trade-offs are unresolved.
    HappySets,
    /// Designate a happy set, e.g. `{g,o}`, and run the observability gate.
    Designate { set: String },
    /// Run the observability gate on every happy set.
    Check,
}

#[derive(Debug, Subcommand)]
pub enum SwitchAction {
    Validate,
    /// Print the equivalent machine-switching system.
    Flatten,
    /// Run the controller over a file of valuations, one per line.
    Simulate {
        env: PathBuf,
    },
    /// Compare with another system over every valuation.
    Equivalent {
        other: PathBuf,
    },
    /// Critical and noncritical requirements of the mode-requirement table.
    Criticality,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_reqs(path: &Path) -> Result<RequirementSet> {
    parse_requirements(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_model(path: &Path) -> Result<GoalModel> {
    parse_goal_model(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_system(path: &Path) -> Result<SwitchingDocument> {
    parse_switching(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn parse_set(text: &str) -> Result<BTreeSet<String>> {
    let inner = text
        .trim()
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| anyhow!("expected a set such as {{g,o}}, found `{text}`"))?;
    Ok(inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect())
}

/// Builds the report for a parsed command line. Errors mean invalid input.
pub fn execute(command: &Command) -> Result<Report> {
    match command {
        Command::Classify { reqs } => Ok(Report::Classify {
            entries: classify_set(&load_reqs(reqs)?),
        }),
        Command::Monitor { reqs, trace } => {
            let rs = load_reqs(reqs)?;
            let tr =
                load_trace(&read(trace)?).with_context(|| format!("in {}", trace.display()))?;
            Ok(Report::Monitor {
                entries: monitor_set(&rs, &tr).into_values().collect(),
            })
        }
        Command::Goals {
            model,
            reqs,
            action,
        } => goals(&load_model(model)?, reqs.as_deref(), action),
        Command::Switch {
            system,
            reqs,
            action,
        } => switch(&load_system(system)?, reqs.as_deref(), action),
    }
}

fn goals(m: &GoalModel, reqs: Option<&Path>, action: &GoalsAction) -> Result<Report> {
    let need_reqs = || match reqs {
        Some(p) => load_reqs(p),
        None => bail!("this action needs --reqs <file>"),
    };
    match action {
        GoalsAction::Variants => Ok(Report::Variants {
            variants: variants(m).into_iter().collect(),
        }),
        GoalsAction::HappySets => {
            let hs = happy_sets(m)?;
            Ok(Report::HappySets {
                sets: hs.sets.iter().map(|h| h.leaves().clone()).collect(),
                diagnostic: hs.diagnostic,
            })
        }
        GoalsAction::Designate { set } => {
            let rs = need_reqs()?;
            let h = HappySet::new(m, parse_set(set)?)?;
            let d = designate(m, &h, &rs)?;
            Ok(Report::Designate {
                happy_set: h.leaves().clone(),
                requirements: render_designated(&d),
                observability: check_designated(&d),
            })
        }
        GoalsAction::Check => {
            let rs = need_reqs()?;
            let hs = happy_sets(m)?;
            let mut results = Vec::new();
            for h in &hs.sets {
                let d = designate(m, h, &rs)?;
                results.push(report::HappySetCheck {
                    happy_set: h.leaves().clone(),
                    observability: check_designated(&d),
                });
            }
            Ok(Report::Check {
                diagnostic: hs.diagnostic,
                results,
            })
        }
    }
}

fn flat_system(doc: &SwitchingDocument) -> Result<MachineSwitchingSystem> {
    match &doc.system {
        Some(AdaptiveSystem::Mode(ms)) => Ok(flatten(ms)),
        Some(AdaptiveSystem::Machine(m)) => Ok(m.clone()),
        None => bail!("the file declares no pairs or modes"),
    }
}

fn system(doc: &SwitchingDocument) -> Result<&AdaptiveSystem> {
    doc.system
        .as_ref()
        .ok_or_else(|| anyhow!("the file declares no pairs or modes"))
}

fn switch(doc: &SwitchingDocument, reqs: Option<&Path>, action: &SwitchAction) -> Result<Report> {
    match action {
        SwitchAction::Validate => {
            let (kind, modes, pairs) = match &doc.system {
                Some(AdaptiveSystem::Machine(m)) => {
                    ("machine-switching system", 0, m.pairs().len())
                }
                Some(AdaptiveSystem::Mode(ms)) => (
                    "mode-switching system",
                    ms.modes().len(),
                    ms.modes().iter().map(|(_, m)| m.pairs().len()).sum(),
                ),
                None if doc.table.is_some() => ("mode-requirement table", 0, 0),
                None => bail!("the file declares no pairs, modes, or mode requirements"),
            };
            Ok(Report::Validate {
                kind: kind.to_string(),
                vars: doc.vars.clone(),
                modes,
                pairs,
                table_rows: doc.table.as_ref().map_or(0, |t| t.rows().len()),
                warnings: doc.warnings.iter().map(ToString::to_string).collect(),
            })
        }
        SwitchAction::Flatten => {
            let flat = flat_system(doc)?;
            Ok(Report::Flatten {
                vars: flat.vars().to_vec(),
                pairs: flat
                    .pairs()
                    .iter()
                    .map(|(k, s)| report::PairRow {
                        condition: k.to_string(),
                        machine: s.to_string(),
                        reachable: k.is_consistent(),
                    })
                    .collect(),
            })
        }
        SwitchAction::Simulate { env } => {
            let sys = system(doc)?;
            let vs = parse_valuations(&read(env)?, sys.vars())
                .with_context(|| format!("in {}", env.display()))?;
            let run = controller_run(sys, &vs);
            Ok(Report::Simulate {
                steps: vs
                    .iter()
                    .zip(run)
                    .map(|(v, m)| report::SimulationStep {
                        valuation: v.to_string(),
                        machine: m.map(|m| m.to_string()),
                    })
                    .collect(),
            })
        }
        SwitchAction::Equivalent { other } => {
            let a = system(doc)?;
            let other_doc = load_system(other)?;
            let b = system(&other_doc)?;
            let eq = equivalent(a, b, a.vars())?;
            Ok(Report::Equivalent {
                equal: eq.equal,
                counterexample: eq.counterexample.map(|v| v.to_string()),
            })
        }
        SwitchAction::Criticality => {
            let table = doc
                .table
                .as_ref()
                .ok_or_else(|| anyhow!("the file has no modes-reqs rows"))?;
            if let Some(p) = reqs {
                let rs = load_reqs(p)?;
                let missing = table.unresolved(&rs);
                if !missing.is_empty() {
                    bail!("unknown requirements: {}", missing.join(", "));
                }
            }
            Ok(Report::Criticality {
                requirements: criticality(table),
            })
        }
    }
}

/// Runs a parsed command line, writing the report, and returns the exit code.
pub fn run(cli: &Cli) -> u8 {
    let report = match execute(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return 2;
        }
    };
    let text = match cli.format {
        Format::Text => report.render_text(),
        Format::Json => report.render_json(),
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = fs::write(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return 2;
            }
        }
        None => print!("{text}"),
    }
    report.exit_code()
}
