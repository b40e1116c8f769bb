//! AND-OR goal models with optional goals and softgoal contributions.
//!
//! A *variant* is a set of adopted leaf goals under which every mandatory
//! root holds. *Happy sets* are the variants the stakeholder would accept:
//! the declared preferences if there are any, nothing if softgoal
//! contributions pull in opposite directions, and otherwise every variant
//! that meets all non-optional root goals. One happy set is then
//! designated; designation discards all optional/preference annotations.

mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::classification::{classify_entry, ClassificationEntry};
use crate::exec::{filter_range, Strategy};
use crate::language::{format_requirement, RequirementSet};

pub use parse::parse_goal_model;

/// Exhaustive enumeration is over `2^leaves` adoption sets.
pub const MAX_LEAVES: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GoalKind {
    Hard,
    Soft,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Goal {
    pub id: String,
    pub kind: GoalKind,
    pub mandatory: bool,
    pub optional: bool,
    pub requirement: Option<String>,
}

impl Goal {
    pub fn hard(id: &str) -> Self {
        Goal {
            id: id.to_string(),
            kind: GoalKind::Hard,
            mandatory: false,
            optional: false,
            requirement: None,
        }
    }

    pub fn soft(id: &str) -> Self {
        Goal {
            kind: GoalKind::Soft,
            ..Goal::hard(id)
        }
    }

    pub fn mandatory(mut self) -> Self {
        self.mandatory = true;
        self
    }

    pub fn optional(mut self) -> Self {
        self.optional = true;
        self
    }

    pub fn with_requirement(mut self, id: &str) -> Self {
        self.requirement = Some(id.to_string());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecompositionKind {
    And,
    Or,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub parent: String,
    pub kind: DecompositionKind,
    pub children: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contribution {
    pub source: String,
    pub target: String,
    pub sign: Sign,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GoalError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("goal `{0}` is declared twice")]
    DuplicateGoal(String),
    #[error("unknown goal `{0}`")]
    UnknownGoal(String),
    #[error("goal `{0}` has more than one decomposition")]
    DuplicateDecomposition(String),
    #[error("goal `{0}`: decomposition must name at least one child")]
    EmptyDecomposition(String),
    #[error("soft goal `{0}` cannot take part in a decomposition")]
    SoftInDecomposition(String),
    #[error("decomposition cycle through `{0}`")]
    Cycle(String),
    #[error("goal `{0}` cannot be both mandatory and optional")]
    MandatoryAndOptional(String),
    #[error("contribution from `{source_goal}` targets hard goal `{target}`")]
    ContributionToHardGoal { source_goal: String, target: String },
    #[error("`{0}` is not a leaf goal")]
    NotALeaf(String),
    #[error("model has {0} leaf goals; at most {MAX_LEAVES} are supported")]
    TooManyLeaves(usize),
    #[error("preferred selection {0} is not a variant of the model")]
    InvalidPreference(String),
    #[error("{0} is not a happy set of the model")]
    NotAHappySet(String),
    #[error("leaf `{0}` carries no requirement reference")]
    MissingRequirementRef(String),
    #[error("leaf `{leaf}` refers to unknown requirement `{requirement}`")]
    UnresolvedRequirement { leaf: String, requirement: String },
}

pub fn format_set(set: &BTreeSet<String>) -> String {
    let items: Vec<&str> = set.iter().map(String::as_str).collect();
    format!("{{{}}}", items.join(","))
}

/// A validated goal model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoalModel {
    goals: IndexMap<String, Goal>,
    decompositions: BTreeMap<String, Decomposition>,
    contributions: Vec<Contribution>,
    preferences: Vec<BTreeSet<String>>,
    /// Leaf goal ids, sorted; bit `i` of an adoption mask is `leaves[i]`.
    leaves: Vec<String>,
    /// Hard goals with children listed before their parents.
    order: Vec<String>,
}

impl GoalModel {
    pub fn new(
        goals: Vec<Goal>,
        decompositions: Vec<Decomposition>,
        contributions: Vec<Contribution>,
        preferences: Vec<BTreeSet<String>>,
    ) -> Result<Self, GoalError> {
        let mut by_id = IndexMap::new();
        for g in goals {
            if g.mandatory && g.optional {
                return Err(GoalError::MandatoryAndOptional(g.id));
            }
            if by_id.contains_key(&g.id) {
                return Err(GoalError::DuplicateGoal(g.id));
            }
            by_id.insert(g.id.clone(), g);
        }
        let hard = |id: &str| match by_id.get(id) {
            None => Err(GoalError::UnknownGoal(id.to_string())),
            Some(g) if g.kind == GoalKind::Soft => {
                Err(GoalError::SoftInDecomposition(id.to_string()))
            }
            Some(_) => Ok(()),
        };
        let mut decomps = BTreeMap::new();
        for d in decompositions {
            hard(&d.parent)?;
            if d.children.is_empty() {
                return Err(GoalError::EmptyDecomposition(d.parent));
            }
            for c in &d.children {
                hard(c)?;
            }
            if decomps.contains_key(&d.parent) {
                return Err(GoalError::DuplicateDecomposition(d.parent));
            }
            decomps.insert(d.parent.clone(), d);
        }
        for c in &contributions {
            if !by_id.contains_key(&c.source) {
                return Err(GoalError::UnknownGoal(c.source.clone()));
            }
            match by_id.get(&c.target) {
                None => return Err(GoalError::UnknownGoal(c.target.clone())),
                Some(t) if t.kind == GoalKind::Hard => {
                    return Err(GoalError::ContributionToHardGoal {
                        source_goal: c.source.clone(),
                        target: c.target.clone(),
                    })
                }
                _ => {}
            }
        }
        let order = topological_order(&by_id, &decomps)?;
        let leaves: Vec<String> = by_id
            .values()
            .filter(|g| g.kind == GoalKind::Hard && !decomps.contains_key(&g.id))
            .map(|g| g.id.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if leaves.len() > MAX_LEAVES {
            return Err(GoalError::TooManyLeaves(leaves.len()));
        }
        for p in &preferences {
            if let Some(bad) = p.iter().find(|id| leaves.binary_search(id).is_err()) {
                return Err(GoalError::NotALeaf(bad.clone()));
            }
        }
        Ok(GoalModel {
            goals: by_id,
            decompositions: decomps,
            contributions,
            preferences,
            leaves,
            order,
        })
    }

    pub fn goals(&self) -> impl Iterator<Item = &Goal> {
        self.goals.values()
    }

    pub fn goal(&self, id: &str) -> Option<&Goal> {
        self.goals.get(id)
    }

    pub fn leaves(&self) -> &[String] {
        &self.leaves
    }

    pub fn decompositions(&self) -> impl Iterator<Item = &Decomposition> {
        self.decompositions.values()
    }

    pub fn contributions(&self) -> &[Contribution] {
        &self.contributions
    }

    pub fn preferences(&self) -> &[BTreeSet<String>] {
        &self.preferences
    }

    fn is_child(&self, id: &str) -> bool {
        self.decompositions
            .values()
            .any(|d| d.children.iter().any(|c| c == id))
    }

    /// Hard goals that are no goal's child.
    pub fn roots(&self) -> Vec<&Goal> {
        self.goals
            .values()
            .filter(|g| g.kind == GoalKind::Hard && !self.is_child(&g.id))
            .collect()
    }

    fn mask_of(&self, adoption: &BTreeSet<String>) -> Result<u64, GoalError> {
        adoption
            .iter()
            .try_fold(0u64, |mask, id| match self.leaves.binary_search(id) {
                Ok(i) => Ok(mask | 1 << i),
                Err(_) => Err(GoalError::NotALeaf(id.clone())),
            })
    }

    fn set_of(&self, mask: u64) -> BTreeSet<String> {
        self.leaves
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, id)| id.clone())
            .collect()
    }

    fn compile(&self) -> Compiled {
        let index: BTreeMap<&str, usize> = self
            .order
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        let nodes = self
            .order
            .iter()
            .map(|id| match self.decompositions.get(id) {
                None => Node::Leaf(self.leaves.binary_search(id).expect("leaf")),
                Some(d) => {
                    let children = d.children.iter().map(|c| index[c.as_str()]).collect();
                    match d.kind {
                        DecompositionKind::And => Node::And(children),
                        DecompositionKind::Or => Node::Or(children),
                    }
                }
            })
            .collect();
        let mandatory = self
            .goals
            .values()
            .filter(|g| g.mandatory)
            .map(|g| index[g.id.as_str()])
            .collect();
        let obligations = self
            .roots()
            .into_iter()
            .filter(|g| !g.optional)
            .map(|g| index[g.id.as_str()])
            .collect();
        let contributions = self
            .contributions
            .iter()
            .filter_map(|c| index.get(c.source.as_str()).map(|&i| (i, c.sign)))
            .collect();
        Compiled {
            nodes,
            mandatory,
            obligations,
            contributions,
        }
    }
}

fn topological_order(
    goals: &IndexMap<String, Goal>,
    decomps: &BTreeMap<String, Decomposition>,
) -> Result<Vec<String>, GoalError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Fresh,
        Active,
        Done,
    }
    fn visit(
        id: &str,
        decomps: &BTreeMap<String, Decomposition>,
        marks: &mut BTreeMap<String, Mark>,
        out: &mut Vec<String>,
    ) -> Result<(), GoalError> {
        match marks[id] {
            Mark::Done => return Ok(()),
            Mark::Active => return Err(GoalError::Cycle(id.to_string())),
            Mark::Fresh => {}
        }
        marks.insert(id.to_string(), Mark::Active);
        if let Some(d) = decomps.get(id) {
            for c in &d.children {
                visit(c, decomps, marks, out)?;
            }
        }
        marks.insert(id.to_string(), Mark::Done);
        out.push(id.to_string());
        Ok(())
    }
    let mut marks: BTreeMap<String, Mark> = goals
        .values()
        .filter(|g| g.kind == GoalKind::Hard)
        .map(|g| (g.id.clone(), Mark::Fresh))
        .collect();
    let mut out = Vec::new();
    for g in goals.values().filter(|g| g.kind == GoalKind::Hard) {
        visit(&g.id, decomps, &mut marks, &mut out)?;
    }
    Ok(out)
}

enum Node {
    Leaf(usize),
    And(Vec<usize>),
    Or(Vec<usize>),
}

/// Index-based form of a model for evaluating adoption masks.
struct Compiled {
    nodes: Vec<Node>,
    mandatory: Vec<usize>,
    obligations: Vec<usize>,
    contributions: Vec<(usize, Sign)>,
}

impl Compiled {
    fn eval(&self, mask: u64) -> Vec<bool> {
        let mut value = vec![false; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            value[i] = match node {
                Node::Leaf(bit) => mask >> bit & 1 == 1,
                Node::And(cs) => cs.iter().all(|&c| value[c]),
                Node::Or(cs) => cs.iter().any(|&c| value[c]),
            };
        }
        value
    }

    fn is_variant(&self, mask: u64) -> bool {
        let v = self.eval(mask);
        self.mandatory.iter().all(|&g| v[g])
    }

    fn meets_obligations(&self, mask: u64) -> bool {
        let v = self.eval(mask);
        self.obligations.iter().all(|&g| v[g])
    }

    fn mixed_contributions(&self, mask: u64) -> bool {
        let v = self.eval(mask);
        let active = || self.contributions.iter().filter(|(g, _)| v[*g]);
        active().any(|(_, s)| *s == Sign::Plus) && active().any(|(_, s)| *s == Sign::Minus)
    }
}

/// Truth value of every hard goal when exactly `adoption` is adopted.
pub fn propagate(
    m: &GoalModel,
    adoption: &BTreeSet<String>,
) -> Result<BTreeMap<String, bool>, GoalError> {
    let mask = m.mask_of(adoption)?;
    let values = m.compile().eval(mask);
    Ok(m.order.iter().cloned().zip(values).collect())
}

fn variant_masks(strategy: Strategy, m: &GoalModel, compiled: &Compiled) -> Vec<u64> {
    filter_range(strategy, 1u64 << m.leaves.len(), |mask| {
        compiled.is_variant(mask)
    })
}

/// Every leaf adoption set that makes all mandatory roots true.
pub fn variants(m: &GoalModel) -> BTreeSet<BTreeSet<String>> {
    variants_with(Strategy::default(), m)
}

pub fn variants_with(strategy: Strategy, m: &GoalModel) -> BTreeSet<BTreeSet<String>> {
    let compiled = m.compile();
    variant_masks(strategy, m, &compiled)
        .into_iter()
        .map(|mask| m.set_of(mask))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HappySet {
    leaves: BTreeSet<String>,
}

impl HappySet {
    /// Checks that `leaves` are leaf goals satisfying every mandatory root.
    pub fn new(m: &GoalModel, leaves: BTreeSet<String>) -> Result<Self, GoalError> {
        let mask = m.mask_of(&leaves)?;
        if !m.compile().is_variant(mask) {
            return Err(GoalError::NotAHappySet(format_set(&leaves)));
        }
        Ok(HappySet { leaves })
    }

    pub fn leaves(&self) -> &BTreeSet<String> {
        &self.leaves
    }
}

impl fmt::Display for HappySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_set(&self.leaves))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HappySets {
    pub sets: Vec<HappySet>,
    pub diagnostic: Option<String>,
}

impl HappySets {
    pub fn contains(&self, leaves: &BTreeSet<String>) -> bool {
        self.sets.iter().any(|h| &h.leaves == leaves)
    }
}

pub fn happy_sets(m: &GoalModel) -> Result<HappySets, GoalError> {
    happy_sets_with(Strategy::default(), m)
}

pub fn happy_sets_with(strategy: Strategy, m: &GoalModel) -> Result<HappySets, GoalError> {
    let compiled = m.compile();
    let masks = variant_masks(strategy, m, &compiled);
    if !m.preferences.is_empty() {
        let mut sets = BTreeSet::new();
        for p in &m.preferences {
            let mask = m.mask_of(p)?;
            if masks.binary_search(&mask).is_err() {
                return Err(GoalError::InvalidPreference(format_set(p)));
            }
            sets.insert(HappySet { leaves: p.clone() });
        }
        return Ok(HappySets {
            sets: sets.into_iter().collect(),
            diagnostic: None,
        });
    }
    if let Some(&mask) = masks
        .iter()
        .find(|&&mask| compiled.mixed_contributions(mask))
    {
        return Ok(HappySets {
            sets: Vec::new(),
            diagnostic: Some(format!(
                "variant {} contributes both positively and negatively to soft goals; requires further elicitation",
                format_set(&m.set_of(mask))
            )),
        });
    }
    let sets: BTreeSet<HappySet> = masks
        .into_iter()
        .filter(|&mask| compiled.meets_obligations(mask))
        .map(|mask| HappySet {
            leaves: m.set_of(mask),
        })
        .collect();
    Ok(HappySets {
        sets: sets.into_iter().collect(),
        diagnostic: None,
    })
}

/// The requirements chosen for engineering. Every member has the same
/// prescriptive status; the type has no room for optional, preference, or
/// criticality annotations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignatedSet {
    requirements: RequirementSet,
}

impl DesignatedSet {
    pub fn requirements(&self) -> &RequirementSet {
        &self.requirements
    }
}

pub fn designate(
    m: &GoalModel,
    h: &HappySet,
    rs: &RequirementSet,
) -> Result<DesignatedSet, GoalError> {
    if !happy_sets(m)?.contains(&h.leaves) {
        return Err(GoalError::NotAHappySet(h.to_string()));
    }
    let mut wanted = BTreeSet::new();
    for leaf in &h.leaves {
        let goal = &m.goals[leaf];
        let Some(req) = &goal.requirement else {
            return Err(GoalError::MissingRequirementRef(leaf.clone()));
        };
        if rs.get(req).is_none() {
            return Err(GoalError::UnresolvedRequirement {
                leaf: leaf.clone(),
                requirement: req.clone(),
            });
        }
        wanted.insert(req.as_str());
    }
    let members = rs
        .iter()
        .filter(|r| wanted.contains(r.id.as_str()))
        .cloned()
        .collect();
    let requirements = RequirementSet::new(members).expect("subset of a valid set");
    Ok(DesignatedSet { requirements })
}

/// Outcome of the complete-observability gate: every designated
/// requirement must be both satisfiable and falsifiable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservabilityReport {
    pub entries: Vec<ClassificationEntry>,
    pub failures: Vec<String>,
    pub passes: bool,
}

pub fn check_designated(d: &DesignatedSet) -> ObservabilityReport {
    let entries: Vec<ClassificationEntry> = d.requirements.iter().map(classify_entry).collect();
    let failures: Vec<String> = entries
        .iter()
        .filter(|e| !e.classification().observable())
        .map(|e| e.id.clone())
        .collect();
    ObservabilityReport {
        passes: failures.is_empty(),
        entries,
        failures,
    }
}

impl ObservabilityReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let mut problems = Vec::new();
            if !e.satisfiable {
                problems.push("nonsatisfiable");
            }
            if !e.falsifiable {
                problems.push("nonfalsifiable");
            }
            let status = if problems.is_empty() {
                "ok".to_string()
            } else {
                problems.join(", ")
            };
            let _ = writeln!(out, "{}: {status}", e.id);
        }
        let verdict = if self.passes { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "complete observability: {verdict}");
        out
    }
}

/// Canonical statements of the designated requirements.
pub fn render_designated(d: &DesignatedSet) -> Vec<String> {
    d.requirements.iter().map(format_requirement).collect()
}

#[cfg(test)]
mod tests;
