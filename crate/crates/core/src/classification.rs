//! Satisfiability and falsifiability of requirements.
//!
//! A requirement partitions environment states into legal and illegal
//! ones. An empty illegal set makes it nonfalsifiable; an empty legal set
//! makes it nonsatisfiable. A requirement that is neither is vague.
//! Classification is decided per form, plus an interval-consistency check
//! for state invariants.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::language::{Atom, Comparator, Form, Requirement, RequirementSet, StateCondition};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Classification {
    pub satisfiable: bool,
    pub falsifiable: bool,
}

impl Classification {
    pub const fn new(satisfiable: bool, falsifiable: bool) -> Self {
        Classification {
            satisfiable,
            falsifiable,
        }
    }

    pub fn vague(&self) -> bool {
        !self.satisfiable && !self.falsifiable
    }

    /// Both satisfiable and falsifiable.
    pub fn observable(&self) -> bool {
        self.satisfiable && self.falsifiable
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.satisfiable { "S" } else { "¬S" };
        let fl = if self.falsifiable { "F" } else { "¬F" };
        write!(f, "{s} {fl}")?;
        if self.vague() {
            write!(f, " (vague)")?;
        }
        Ok(())
    }
}

pub fn classify(r: &Requirement) -> Classification {
    match &r.form {
        Form::BoundedResponse { .. } => Classification::new(true, true),
        Form::UnboundedResponse { .. } => Classification::new(true, false),
        Form::WindowedRatio { window, .. } => {
            let w = window.is_some();
            Classification::new(w, w)
        }
        Form::Instantaneous { .. } => Classification::new(true, true),
        Form::RateFloor { .. } => Classification::new(true, true),
        Form::Fifo { .. } => Classification::new(true, true),
        Form::StateInvariant { condition } => {
            Classification::new(check_invariant_consistency(condition), true)
        }
        Form::VagueQualified { .. } => Classification::new(false, false),
    }
}

/// Human-readable reasons behind a classification.
pub fn diagnostics(r: &Requirement) -> Vec<String> {
    match &r.form {
        Form::UnboundedResponse { trigger, response } => vec![format!(
            "no deadline: a pending `{}` after `{}` may still occur later, so no observation can show a violation",
            response.name, trigger.name
        )],
        Form::WindowedRatio { window: None, .. } => vec![
            "ratio without a window: the instances over which the percentage is computed are unspecified"
                .to_string(),
        ],
        Form::StateInvariant { condition } if !check_invariant_consistency(condition) => {
            vec!["inconsistent condition: every environment state is illegal".to_string()]
        }
        Form::VagueQualified { qualifier, .. } => vec![format!(
            "qualifier `{}` gives no criterion to separate legal from illegal states",
            qualifier.keyword()
        )],
        _ => Vec::new(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Bound {
    value: Rational,
    inclusive: bool,
}

/// Feasible values for one variable: an interval plus boolean flags.
#[derive(Debug, Clone, Copy, Default)]
struct Feasible {
    lower: Option<Bound>,
    upper: Option<Bound>,
    must_be_true: bool,
    must_be_false: bool,
}

impl Feasible {
    fn tighten_lower(&mut self, b: Bound) {
        self.lower = Some(match self.lower {
            Some(l) if l.value > b.value || (l.value == b.value && !l.inclusive) => l,
            _ => b,
        });
    }

    fn tighten_upper(&mut self, b: Bound) {
        self.upper = Some(match self.upper {
            Some(u) if u.value < b.value || (u.value == b.value && !u.inclusive) => u,
            _ => b,
        });
    }

    fn add(&mut self, atom: &Atom) {
        match atom {
            Atom::Compare {
                comparator,
                threshold,
                ..
            } => {
                let closed = Bound {
                    value: *threshold,
                    inclusive: true,
                };
                let open = Bound {
                    value: *threshold,
                    inclusive: false,
                };
                match comparator {
                    Comparator::Lt => self.tighten_upper(open),
                    Comparator::Le => self.tighten_upper(closed),
                    Comparator::Gt => self.tighten_lower(open),
                    Comparator::Ge => self.tighten_lower(closed),
                    Comparator::Eq => {
                        self.tighten_lower(closed);
                        self.tighten_upper(closed);
                    }
                }
            }
            Atom::Flag { value: true, .. } => self.must_be_true = true,
            Atom::Flag { value: false, .. } => self.must_be_false = true,
        }
    }

    fn contains(&self, x: Rational) -> bool {
        let above = self
            .lower
            .is_none_or(|l| x > l.value || (l.inclusive && x == l.value));
        let below = self
            .upper
            .is_none_or(|u| x < u.value || (u.inclusive && x == u.value));
        above && below
    }

    fn interval_nonempty(&self) -> bool {
        match (self.lower, self.upper) {
            (Some(l), Some(u)) => {
                l.value < u.value || (l.value == u.value && l.inclusive && u.inclusive)
            }
            _ => true,
        }
    }

    /// The interval holds some value other than zero.
    fn has_nonzero(&self) -> bool {
        match (self.lower, self.upper) {
            (Some(l), Some(u)) if l.value == u.value => !l.value.is_zero(),
            _ => true,
        }
    }

    fn satisfiable(&self) -> bool {
        if !self.interval_nonempty() || (self.must_be_true && self.must_be_false) {
            return false;
        }
        if self.must_be_false {
            return self.contains(Rational::zero());
        }
        if self.must_be_true {
            return self.has_nonzero();
        }
        true
    }
}

/// Whether some assignment of rational values satisfies every conjunct.
pub fn check_invariant_consistency(c: &StateCondition) -> bool {
    let mut per_var: BTreeMap<&str, Feasible> = BTreeMap::new();
    for atom in &c.conjuncts {
        per_var.entry(atom.variable()).or_default().add(atom);
    }
    per_var.values().all(Feasible::satisfiable)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationEntry {
    pub id: String,
    pub form: String,
    pub satisfiable: bool,
    pub falsifiable: bool,
    pub vague: bool,
    pub diagnostics: Vec<String>,
}

impl ClassificationEntry {
    pub fn classification(&self) -> Classification {
        Classification::new(self.satisfiable, self.falsifiable)
    }
}

pub fn classify_entry(r: &Requirement) -> ClassificationEntry {
    let c = classify(r);
    ClassificationEntry {
        id: r.id.clone(),
        form: r.form.name().to_string(),
        satisfiable: c.satisfiable,
        falsifiable: c.falsifiable,
        vague: c.vague(),
        diagnostics: diagnostics(r),
    }
}

pub fn classify_set(set: &RequirementSet) -> Vec<ClassificationEntry> {
    set.iter().map(classify_entry).collect()
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Fixed-width table, one row per requirement.
pub fn render_table(entries: &[ClassificationEntry]) -> String {
    let id_w = entries.iter().map(|e| e.id.len()).max().unwrap_or(0).max(2);
    let form_w = entries
        .iter()
        .map(|e| e.form.len())
        .max()
        .unwrap_or(0)
        .max(4);
    let mut out = format!(
        "{:<id_w$}  {:<form_w$}  {:<11}  {:<11}  vague\n",
        "id", "form", "satisfiable", "falsifiable"
    );
    for e in entries {
        out += &format!(
            "{:<id_w$}  {:<form_w$}  {:<11}  {:<11}  {}\n",
            e.id,
            e.form,
            yes_no(e.satisfiable),
            yes_no(e.falsifiable),
            yes_no(e.vague)
        );
        for d in &e.diagnostics {
            out += &format!("{:<id_w$}    note: {d}\n", "");
        }
    }
    out
}
