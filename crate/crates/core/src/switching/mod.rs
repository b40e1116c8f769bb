//! Machine-switching and mode-switching systems.
//!
//! A machine-switching system pairs domain-assumption conditions with
//! machines; its controller runs the machine whose condition the current
//! environment satisfies and otherwise keeps running whatever it ran
//! before, starting from the null machine. A mode-switching system pairs
//! mode conditions with machine-switching systems and selects in two
//! steps. [`flatten`] turns a mode-switching system into an equivalent
//! machine-switching system by conjoining each mode condition with the
//! assumptions of its inner pairs.
//!
//! Conditions are conjunctions of literals over boolean environment
//! variables. Neither kind of system refers to requirements.

mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::exec::{find_first_in_range, Strategy};

pub use parse::{
    format_machine_system, format_mode_system, parse_switching, parse_valuations, AdaptiveSystem,
    SwitchingDocument,
};

/// Bound on the universe size for exhaustive equivalence checks.
pub const MAX_EQUIVALENCE_VARS: usize = 20;
const MAX_VARS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub var: String,
    pub positive: bool,
}

impl Literal {
    pub fn pos(var: &str) -> Self {
        Literal {
            var: var.to_string(),
            positive: true,
        }
    }

    pub fn neg(var: &str) -> Self {
        Literal {
            var: var.to_string(),
            positive: false,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            f.write_str("!")?;
        }
        f.write_str(&self.var)
    }
}

/// A conjunction of literals. The empty condition always holds; a
/// condition containing both polarities of a variable never does.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Condition {
    literals: BTreeSet<Literal>,
}

impl Condition {
    pub fn new(literals: impl IntoIterator<Item = Literal>) -> Self {
        Condition {
            literals: literals.into_iter().collect(),
        }
    }

    pub fn always() -> Self {
        Condition::default()
    }

    pub fn literals(&self) -> &BTreeSet<Literal> {
        &self.literals
    }

    pub fn is_consistent(&self) -> bool {
        !self
            .literals
            .iter()
            .any(|l| l.positive && self.literals.contains(&Literal::neg(&l.var)))
    }

    pub fn union(&self, other: &Condition) -> Condition {
        Condition {
            literals: self.literals.union(&other.literals).cloned().collect(),
        }
    }

    pub fn satisfied_by(&self, v: &Valuation) -> bool {
        self.literals
            .iter()
            .all(|l| v.get(&l.var) == Some(l.positive))
    }

    /// Whether some valuation satisfies both conditions; when so, returns
    /// one (variables the conditions leave open are false).
    fn overlap(&self, other: &Condition, vars: &[String]) -> Option<Valuation> {
        let both = self.union(other);
        if !self.is_consistent() || !other.is_consistent() || !both.is_consistent() {
            return None;
        }
        Some(Valuation(
            vars.iter()
                .map(|v| (v.clone(), both.literals.contains(&Literal::pos(v))))
                .collect(),
        ))
    }

    /// `(required true, required false)` bit masks over `vars`.
    fn masks(&self, vars: &[String]) -> (u64, u64) {
        let mut pos = 0;
        let mut neg = 0;
        for l in &self.literals {
            let i = vars.binary_search(&l.var).expect("variable in universe");
            if l.positive {
                pos |= 1 << i;
            } else {
                neg |= 1 << i;
            }
        }
        (pos, neg)
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.literals.iter().map(Literal::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// A truth assignment to environment variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Valuation(pub BTreeMap<String, bool>);

impl Valuation {
    pub fn get(&self, var: &str) -> Option<bool> {
        self.0.get(var).copied()
    }

    /// The `index`-th valuation in truth-table order: all variables true
    /// first, the first variable alternating fastest.
    pub fn nth(vars: &[String], index: u64) -> Self {
        Valuation::from_bits(vars, !index & ((1u64 << vars.len()) - 1))
    }

    pub fn from_bits(vars: &[String], bits: u64) -> Self {
        Valuation(
            vars.iter()
                .enumerate()
                .map(|(i, v)| (v.clone(), bits >> i & 1 == 1))
                .collect(),
        )
    }

    fn to_bits(&self, vars: &[String]) -> u64 {
        vars.iter()
            .enumerate()
            .filter(|(_, v)| self.get(v) == Some(true))
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, bool)>) -> Self {
        Valuation(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(k, &v)| if v { k.clone() } else { format!("!{k}") })
            .collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// An opaque machine name. Flattening records the `(mode, pair)` origin
/// when the same name occurs in more than one inner system; equivalence
/// compares names only.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MachineId {
    pub name: String,
    pub origin: Option<(usize, usize)>,
}

impl MachineId {
    pub fn new(name: &str) -> Self {
        MachineId {
            name: name.to_string(),
            origin: None,
        }
    }
}

impl fmt::Display for MachineId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.origin {
            Some((i, j)) => write!(f, "{}@{i}.{j}", self.name),
            None => f.write_str(&self.name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SwitchingError {
    #[error("no environment variables declared")]
    EmptyUniverse,
    #[error("{count} variables declared; at most {max} are supported here")]
    TooManyVariables { count: usize, max: usize },
    #[error("variable `{0}` is not declared")]
    UnknownVariable(String),
    #[error("machine `{0}` is paired more than once")]
    DuplicateMachine(MachineId),
    #[error("conditions {first} and {second} overlap, e.g. at {witness}")]
    Overlap {
        first: Condition,
        second: Condition,
        witness: Valuation,
    },
    #[error("modes {first} and {second} map to the same machine-switching system")]
    DuplicateInnerSystem { first: Condition, second: Condition },
    #[error("the system under mode {0} is declared over different variables")]
    InnerUniverseMismatch(Condition),
    #[error("systems are declared over {found:?}, expected {expected:?}")]
    UniverseMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("valuation does not assign `{0}`")]
    PartialValuation(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SwitchingWarning {
    /// The condition can never hold, so its pair is unreachable.
    Inconsistent {
        condition: Condition,
        target: String,
    },
}

impl fmt::Display for SwitchingWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SwitchingWarning::Inconsistent { condition, target } => {
                write!(
                    f,
                    "condition {condition} for {target} is inconsistent; unreachable"
                )
            }
        }
    }
}

fn universe(vars: &[String]) -> Result<Vec<String>, SwitchingError> {
    let set: BTreeSet<String> = vars.iter().cloned().collect();
    if set.is_empty() {
        return Err(SwitchingError::EmptyUniverse);
    }
    if set.len() > MAX_VARS {
        return Err(SwitchingError::TooManyVariables {
            count: set.len(),
            max: MAX_VARS,
        });
    }
    Ok(set.into_iter().collect())
}

fn check_vars(c: &Condition, vars: &[String]) -> Result<(), SwitchingError> {
    match c
        .literals
        .iter()
        .find(|l| vars.binary_search(&l.var).is_err())
    {
        Some(l) => Err(SwitchingError::UnknownVariable(l.var.clone())),
        None => Ok(()),
    }
}

fn check_disjoint<'a>(
    conditions: impl IntoIterator<Item = &'a Condition>,
    vars: &[String],
) -> Result<(), SwitchingError> {
    let conditions: Vec<&Condition> = conditions.into_iter().collect();
    for (i, a) in conditions.iter().enumerate() {
        for b in &conditions[i + 1..] {
            if let Some(witness) = a.overlap(b, vars) {
                return Err(SwitchingError::Overlap {
                    first: (*a).clone(),
                    second: (*b).clone(),
                    witness,
                });
            }
        }
    }
    Ok(())
}

/// Anything with a controller: picks a machine for a valuation, or holds.
pub trait SwitchingSystem {
    /// Sorted variable universe.
    fn vars(&self) -> &[String];

    /// Machine selected for the valuation encoded as bits over
    /// [`SwitchingSystem::vars`]; `None` means hold.
    fn select_bits(&self, bits: u64) -> Option<&MachineId>;

    fn select(&self, v: &Valuation) -> Selection {
        match self.select_bits(v.to_bits(self.vars())) {
            Some(m) => Selection::Machine(m.clone()),
            None => Selection::Hold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selection {
    Machine(MachineId),
    Hold,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineSwitchingSystem {
    vars: Vec<String>,
    pairs: Vec<(Condition, MachineId)>,
    masks: Vec<(u64, u64)>,
}

impl MachineSwitchingSystem {
    pub fn pairs(&self) -> &[(Condition, MachineId)] {
        &self.pairs
    }

    /// Pairs whose condition can never hold.
    pub fn unreachable(&self) -> impl Iterator<Item = &(Condition, MachineId)> {
        self.pairs.iter().filter(|(k, _)| !k.is_consistent())
    }

    fn same_pairs(&self, other: &Self) -> bool {
        let a: BTreeSet<_> = self.pairs.iter().collect();
        let b: BTreeSet<_> = other.pairs.iter().collect();
        a == b
    }
}

impl SwitchingSystem for MachineSwitchingSystem {
    fn vars(&self) -> &[String] {
        &self.vars
    }

    fn select_bits(&self, bits: u64) -> Option<&MachineId> {
        self.masks
            .iter()
            .position(|&(pos, neg)| bits & pos == pos && bits & neg == 0 && pos & neg == 0)
            .map(|i| &self.pairs[i].1)
    }
}

/// Validates a machine-switching system: machines distinct, conditions
/// over the declared variables and pairwise disjoint. Inconsistent
/// conditions are kept and reported as warnings.
pub fn build_machine_switching(
    vars: &[String],
    pairs: Vec<(Condition, MachineId)>,
) -> Result<(MachineSwitchingSystem, Vec<SwitchingWarning>), SwitchingError> {
    let vars = universe(vars)?;
    let mut seen = BTreeSet::new();
    let mut warnings = Vec::new();
    for (k, s) in &pairs {
        check_vars(k, &vars)?;
        if !seen.insert(s) {
            return Err(SwitchingError::DuplicateMachine(s.clone()));
        }
        if !k.is_consistent() {
            warnings.push(SwitchingWarning::Inconsistent {
                condition: k.clone(),
                target: format!("machine {s}"),
            });
        }
    }
    check_disjoint(pairs.iter().map(|(k, _)| k), &vars)?;
    let masks = pairs.iter().map(|(k, _)| k.masks(&vars)).collect();
    Ok((MachineSwitchingSystem { vars, pairs, masks }, warnings))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeSwitchingSystem {
    vars: Vec<String>,
    modes: Vec<(Condition, MachineSwitchingSystem)>,
    masks: Vec<(u64, u64)>,
}

impl ModeSwitchingSystem {
    pub fn modes(&self) -> &[(Condition, MachineSwitchingSystem)] {
        &self.modes
    }
}

impl SwitchingSystem for ModeSwitchingSystem {
    fn vars(&self) -> &[String] {
        &self.vars
    }

    fn select_bits(&self, bits: u64) -> Option<&MachineId> {
        let i = self
            .masks
            .iter()
            .position(|&(pos, neg)| bits & pos == pos && bits & neg == 0 && pos & neg == 0)?;
        self.modes[i].1.select_bits(bits)
    }
}

/// Validates a mode-switching system: mode conditions pairwise disjoint,
/// inner systems distinct and over the same variables.
pub fn build_mode_switching(
    vars: &[String],
    modes: Vec<(Condition, MachineSwitchingSystem)>,
) -> Result<(ModeSwitchingSystem, Vec<SwitchingWarning>), SwitchingError> {
    let vars = universe(vars)?;
    let mut warnings = Vec::new();
    for (i, (e, m)) in modes.iter().enumerate() {
        check_vars(e, &vars)?;
        if m.vars != vars {
            return Err(SwitchingError::InnerUniverseMismatch(e.clone()));
        }
        if let Some((e2, _)) = modes[..i].iter().find(|(_, m2)| m2.same_pairs(m)) {
            return Err(SwitchingError::DuplicateInnerSystem {
                first: e2.clone(),
                second: e.clone(),
            });
        }
        if !e.is_consistent() {
            warnings.push(SwitchingWarning::Inconsistent {
                condition: e.clone(),
                target: format!("mode #{i}"),
            });
        }
    }
    check_disjoint(modes.iter().map(|(e, _)| e), &vars)?;
    let masks = modes.iter().map(|(e, _)| e.masks(&vars)).collect();
    Ok((ModeSwitchingSystem { vars, modes, masks }, warnings))
}

/// A controller with hold semantics, starting at the null machine.
pub struct Controller<'a, S: SwitchingSystem + ?Sized> {
    system: &'a S,
    current: Option<MachineId>,
}

impl<'a, S: SwitchingSystem + ?Sized> Controller<'a, S> {
    pub fn new(system: &'a S) -> Self {
        Controller {
            system,
            current: None,
        }
    }

    /// `None` is the null machine.
    pub fn current(&self) -> Option<&MachineId> {
        self.current.as_ref()
    }

    pub fn step(&mut self, v: &Valuation) -> Option<&MachineId> {
        if let Selection::Machine(m) = self.system.select(v) {
            self.current = Some(m);
        }
        self.current.as_ref()
    }
}

pub fn controller_run<S: SwitchingSystem + ?Sized>(
    sys: &S,
    vs: &[Valuation],
) -> Vec<Option<MachineId>> {
    let mut c = Controller::new(sys);
    vs.iter().map(|v| c.step(v).cloned()).collect()
}

/// Pairs `(K ∪ E, S)` for every mode `(E, M)` and every pair `(K, S)` of `M`.
pub fn flatten(ms: &ModeSwitchingSystem) -> MachineSwitchingSystem {
    let mut owners: BTreeMap<&str, BTreeSet<usize>> = BTreeMap::new();
    for (i, (_, m)) in ms.modes.iter().enumerate() {
        for (_, s) in &m.pairs {
            owners.entry(&s.name).or_default().insert(i);
        }
    }
    let mut pairs = Vec::new();
    for (i, (e, m)) in ms.modes.iter().enumerate() {
        for (j, (k, s)) in m.pairs.iter().enumerate() {
            let mut id = s.clone();
            if owners[s.name.as_str()].len() > 1 {
                id.origin = Some((i, j));
            }
            pairs.push((k.union(e), id));
        }
    }
    let (sys, _) = build_machine_switching(&ms.vars, pairs)
        .expect("disjoint modes and disjoint inner conditions give disjoint unions");
    sys
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Equivalence {
    pub equal: bool,
    pub counterexample: Option<Valuation>,
}

/// Exhaustively compares the machine each system puts into operation after
/// one step from the null machine, for every valuation over `vars`. The
/// counterexample is the first difference in truth-table order (see
/// [`Valuation::nth`]).
pub fn equivalent<A, B>(a: &A, b: &B, vars: &[String]) -> Result<Equivalence, SwitchingError>
where
    A: SwitchingSystem + Sync + ?Sized,
    B: SwitchingSystem + Sync + ?Sized,
{
    equivalent_with(Strategy::default(), a, b, vars)
}

pub fn equivalent_with<A, B>(
    strategy: Strategy,
    a: &A,
    b: &B,
    vars: &[String],
) -> Result<Equivalence, SwitchingError>
where
    A: SwitchingSystem + Sync + ?Sized,
    B: SwitchingSystem + Sync + ?Sized,
{
    let vars = universe(vars)?;
    for sys in [a.vars(), b.vars()] {
        if sys != vars.as_slice() {
            return Err(SwitchingError::UniverseMismatch {
                expected: vars.clone(),
                found: sys.to_vec(),
            });
        }
    }
    if vars.len() > MAX_EQUIVALENCE_VARS {
        return Err(SwitchingError::TooManyVariables {
            count: vars.len(),
            max: MAX_EQUIVALENCE_VARS,
        });
    }
    let all = (1u64 << vars.len()) - 1;
    let differs = |index: u64| {
        let bits = !index & all;
        a.select_bits(bits).map(|m| &m.name) != b.select_bits(bits).map(|m| &m.name)
    };
    let first = find_first_in_range(strategy, 1u64 << vars.len(), differs);
    Ok(Equivalence {
        equal: first.is_none(),
        counterexample: first.map(|index| Valuation::nth(&vars, index)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Criticality {
    Critical,
    Noncritical,
}

impl fmt::Display for Criticality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criticality::Critical => "CRITICAL",
            Criticality::Noncritical => "NONCRITICAL",
        })
    }
}

/// Which requirements apply under which mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeRequirementTable {
    rows: Vec<(Condition, BTreeSet<String>)>,
}

impl ModeRequirementTable {
    pub fn new(rows: Vec<(Condition, BTreeSet<String>)>) -> Result<Self, SwitchingError> {
        let vars: Vec<String> = rows
            .iter()
            .flat_map(|(e, _)| e.literals.iter().map(|l| l.var.clone()))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        check_disjoint(rows.iter().map(|(e, _)| e), &vars)?;
        Ok(ModeRequirementTable { rows })
    }

    pub fn rows(&self) -> &[(Condition, BTreeSet<String>)] {
        &self.rows
    }

    /// Ids that do not name a requirement of `rs`.
    pub fn unresolved<'a>(&'a self, rs: &crate::language::RequirementSet) -> Vec<&'a str> {
        self.rows
            .iter()
            .flat_map(|(_, ids)| ids.iter())
            .filter(|id| rs.get(id).is_none())
            .map(String::as_str)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }
}

/// A requirement is critical when it applies in every mode.
pub fn criticality(t: &ModeRequirementTable) -> BTreeMap<String, Criticality> {
    let all: BTreeSet<&String> = t.rows.iter().flat_map(|(_, ids)| ids).collect();
    all.into_iter()
        .map(|id| {
            let c = if t.rows.iter().all(|(_, ids)| ids.contains(id)) {
                Criticality::Critical
            } else {
                Criticality::Noncritical
            };
            (id.clone(), c)
        })
        .collect()
}
