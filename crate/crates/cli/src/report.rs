//! Reports produced by the subcommands. Each report renders to text from its
//! own fields only, so a JSON report read back renders the same text.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use reqkit::classification::{render_table, ClassificationEntry};
use reqkit::goals::{format_set, ObservabilityReport};
use reqkit::monitor::{render_entries, MonitorEntry, Overall};
use reqkit::switching::Criticality;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRow {
    pub condition: String,
    pub machine: String,
    pub reachable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationStep {
    pub valuation: String,
    /// `None` is the null machine.
    pub machine: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HappySetCheck {
    pub happy_set: BTreeSet<String>,
    pub observability: ObservabilityReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "report", rename_all = "snake_case")]
pub enum Report {
    Classify {
        entries: Vec<ClassificationEntry>,
    },
    Monitor {
        entries: Vec<MonitorEntry>,
    },
    Variants {
        variants: Vec<BTreeSet<String>>,
    },
    HappySets {
        sets: Vec<BTreeSet<String>>,
        diagnostic: Option<String>,
    },
    Designate {
        happy_set: BTreeSet<String>,
        requirements: Vec<String>,
        observability: ObservabilityReport,
    },
    Check {
        diagnostic: Option<String>,
        results: Vec<HappySetCheck>,
    },
    Validate {
        kind: String,
        vars: Vec<String>,
        modes: usize,
        pairs: usize,
        table_rows: usize,
        warnings: Vec<String>,
    },
    Flatten {
        vars: Vec<String>,
        pairs: Vec<PairRow>,
    },
    Simulate {
        steps: Vec<SimulationStep>,
    },
    Equivalent {
        equal: bool,
        counterexample: Option<String>,
    },
    Criticality {
        requirements: BTreeMap<String, Criticality>,
    },
}

impl Report {
    /// 0 when the report records no failure, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        let failed = match self {
            Report::Monitor { entries } => entries
                .iter()
                .filter_map(MonitorEntry::report)
                .any(|r| r.overall == Overall::Violated),
            Report::Designate { observability, .. } => !observability.passes,
            Report::Check { results, .. } => {
                results.is_empty() || results.iter().any(|r| !r.observability.passes)
            }
            Report::Equivalent { equal, .. } => !equal,
            _ => false,
        };
        u8::from(failed)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        match self {
            Report::Classify { entries } => out = render_table(entries),
            Report::Monitor { entries } => out = render_entries(entries),
            Report::Variants { variants } => {
                for v in variants {
                    let _ = writeln!(out, "{}", format_set(v));
                }
            }
            Report::HappySets { sets, diagnostic } => {
                for s in sets {
                    let _ = writeln!(out, "{}", format_set(s));
                }
                if let Some(d) = diagnostic {
                    let _ = writeln!(out, "no happy sets: {d}");
                }
            }
            Report::Designate {
                happy_set,
                requirements,
                observability,
            } => {
                let _ = writeln!(out, "designated {}:", format_set(happy_set));
                for r in requirements {
                    let _ = writeln!(out, "  {r}");
                }
                out += &observability.render();
            }
            Report::Check {
                diagnostic,
                results,
            } => {
                if let Some(d) = diagnostic {
                    let _ = writeln!(out, "no happy sets: {d}");
                }
                for r in results {
                    let _ = writeln!(out, "happy set {}:", format_set(&r.happy_set));
                    for line in r.observability.render().lines() {
                        let _ = writeln!(out, "  {line}");
                    }
                }
            }
            Report::Validate {
                kind,
                vars,
                modes,
                pairs,
                table_rows,
                warnings,
            } => {
                let _ = writeln!(out, "valid {kind}");
                if !vars.is_empty() {
                    let _ = writeln!(out, "  vars: {}", vars.join(" "));
                }
                if *modes > 0 {
                    let _ = writeln!(out, "  modes: {modes}");
                }
                if *pairs > 0 {
                    let _ = writeln!(out, "  pairs: {pairs}");
                }
                if *table_rows > 0 {
                    let _ = writeln!(out, "  mode-requirement rows: {table_rows}");
                }
                for w in warnings {
                    let _ = writeln!(out, "warning: {w}");
                }
            }
            Report::Flatten { vars, pairs } => {
                let _ = writeln!(out, "vars {}", vars.join(" "));
                for p in pairs {
                    let _ = write!(out, "pair {} {}", p.condition, p.machine);
                    if !p.reachable {
                        out.push_str("  # unreachable");
                    }
                    out.push('\n');
                }
            }
            Report::Simulate { steps } => {
                for s in steps {
                    let m = s.machine.as_deref().unwrap_or("NULL");
                    let _ = writeln!(out, "{} -> {m}", s.valuation);
                }
            }
            Report::Equivalent {
                equal,
                counterexample,
            } => {
                if *equal {
                    out.push_str("equivalent\n");
                } else {
                    out.push_str("not equivalent\n");
                }
                if let Some(c) = counterexample {
                    let _ = writeln!(out, "counterexample: {c}");
                }
            }
            Report::Criticality { requirements } => {
                for (id, c) in requirements {
                    let _ = writeln!(out, "{id}: {c}");
                }
            }
        }
        out
    }

    pub fn render_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}
