use std::fmt;

use serde::{Deserialize, Serialize};

use crate::rational::Rational;

/// Words the grammar reserves; none of them may be used as an identifier.
pub const RESERVED_WORDS: &[&str] = &[
    "req",
    "when",
    "then",
    "eventually",
    "within",
    "in",
    "at",
    "least",
    "of",
    "instances",
    "per",
    "always",
    "every",
    "observation",
    "implies",
    "rate",
    "fifo",
    "and",
    "not",
    "minute",
    "minutes",
    "hour",
    "hours",
    "day",
    "days",
    "as_soon_as_possible",
    "high",
    "fairly",
    "unduly_long",
    "as_many_as_possible",
];

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !RESERVED_WORDS.contains(&s)
}

/// An event predicate such as `requested(x)`; `key` names the correlation
/// variable that ties trigger instances to their responses.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EventPattern {
    pub name: String,
    pub key: Option<String>,
}

impl EventPattern {
    pub fn new(name: impl Into<String>, key: Option<&str>) -> Self {
        EventPattern {
            name: name.into(),
            key: key.map(str::to_string),
        }
    }

    pub fn keyed(name: impl Into<String>, key: &str) -> Self {
        EventPattern::new(name, Some(key))
    }

    pub fn unkeyed(name: impl Into<String>) -> Self {
        EventPattern::new(name, None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Comparator {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Comparator {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Eq => "=",
            Comparator::Ge => ">=",
            Comparator::Gt => ">",
        }
    }

    pub fn holds(self, value: Rational, threshold: Rational) -> bool {
        match self {
            Comparator::Lt => value < threshold,
            Comparator::Le => value <= threshold,
            Comparator::Eq => value == threshold,
            Comparator::Ge => value >= threshold,
            Comparator::Gt => value > threshold,
        }
    }
}

/// One conjunct of a [`StateCondition`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Atom {
    Compare {
        variable: String,
        comparator: Comparator,
        threshold: Rational,
    },
    /// A boolean state variable; nonzero samples read as true.
    Flag { variable: String, value: bool },
}

impl Atom {
    pub fn compare(variable: &str, comparator: Comparator, threshold: impl Into<Rational>) -> Self {
        Atom::Compare {
            variable: variable.to_string(),
            comparator,
            threshold: threshold.into(),
        }
    }

    pub fn flag(variable: &str, value: bool) -> Self {
        Atom::Flag {
            variable: variable.to_string(),
            value,
        }
    }

    pub fn variable(&self) -> &str {
        match self {
            Atom::Compare { variable, .. } | Atom::Flag { variable, .. } => variable,
        }
    }

    pub fn holds(&self, value: Rational) -> bool {
        match self {
            Atom::Compare {
                comparator,
                threshold,
                ..
            } => comparator.holds(value, *threshold),
            Atom::Flag {
                value: expected, ..
            } => !value.is_zero() == *expected,
        }
    }
}

/// A conjunction of per-variable atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StateCondition {
    pub conjuncts: Vec<Atom>,
}

impl StateCondition {
    pub fn new(conjuncts: Vec<Atom>) -> Self {
        StateCondition { conjuncts }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TimeUnit {
    Minute,
    Hour,
    Day,
}

impl TimeUnit {
    pub fn minutes(self) -> u64 {
        match self {
            TimeUnit::Minute => 1,
            TimeUnit::Hour => 60,
            TimeUnit::Day => 1440,
        }
    }

    pub fn plural(self) -> &'static str {
        match self {
            TimeUnit::Minute => "minutes",
            TimeUnit::Hour => "hours",
            TimeUnit::Day => "days",
        }
    }

    pub fn from_word(word: &str) -> Option<Self> {
        match word {
            "minute" | "minutes" => Some(TimeUnit::Minute),
            "hour" | "hours" => Some(TimeUnit::Hour),
            "day" | "days" => Some(TimeUnit::Day),
            _ => None,
        }
    }
}

/// A duration as written; [`Duration::minutes`] gives the canonical value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Duration {
    pub magnitude: u64,
    pub unit: TimeUnit,
}

impl Duration {
    pub fn new(magnitude: u64, unit: TimeUnit) -> Self {
        Duration { magnitude, unit }
    }

    pub fn days(n: u64) -> Self {
        Duration::new(n, TimeUnit::Day)
    }

    pub fn hours(n: u64) -> Self {
        Duration::new(n, TimeUnit::Hour)
    }

    pub fn minutes_of(n: u64) -> Self {
        Duration::new(n, TimeUnit::Minute)
    }

    pub fn minutes(&self) -> u64 {
        self.magnitude.saturating_mul(self.unit.minutes())
    }
}

impl fmt::Display for Duration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.magnitude, self.unit.plural())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Qualifier {
    AsSoonAsPossible,
    High,
    Fairly,
    UndulyLong,
    AsManyAsPossible,
}

impl Qualifier {
    pub const ALL: [Qualifier; 5] = [
        Qualifier::AsSoonAsPossible,
        Qualifier::High,
        Qualifier::Fairly,
        Qualifier::UndulyLong,
        Qualifier::AsManyAsPossible,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Qualifier::AsSoonAsPossible => "as_soon_as_possible",
            Qualifier::High => "high",
            Qualifier::Fairly => "fairly",
            Qualifier::UndulyLong => "unduly_long",
            Qualifier::AsManyAsPossible => "as_many_as_possible",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        Qualifier::ALL.into_iter().find(|q| q.keyword() == word)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Form {
    BoundedResponse {
        trigger: EventPattern,
        response: EventPattern,
        deadline: Duration,
    },
    UnboundedResponse {
        trigger: EventPattern,
        response: EventPattern,
    },
    WindowedRatio {
        trigger: EventPattern,
        response: EventPattern,
        deadline: Duration,
        min_ratio: Rational,
        window: Option<Duration>,
    },
    Instantaneous {
        condition: StateCondition,
        consequent: StateCondition,
    },
    StateInvariant {
        condition: StateCondition,
    },
    RateFloor {
        event: EventPattern,
        min_count: u64,
        window: Duration,
    },
    Fifo {
        entry: EventPattern,
        exit: EventPattern,
    },
    VagueQualified {
        trigger: EventPattern,
        response: EventPattern,
        qualifier: Qualifier,
    },
}

impl Form {
    pub fn name(&self) -> &'static str {
        match self {
            Form::BoundedResponse { .. } => "bounded_response",
            Form::UnboundedResponse { .. } => "unbounded_response",
            Form::WindowedRatio { .. } => "windowed_ratio",
            Form::Instantaneous { .. } => "instantaneous",
            Form::StateInvariant { .. } => "state_invariant",
            Form::RateFloor { .. } => "rate_floor",
            Form::Fifo { .. } => "fifo",
            Form::VagueQualified { .. } => "vague_qualified",
        }
    }

    /// The two correlated patterns of the form, when it has them.
    pub fn correlated_pair(&self) -> Option<(&EventPattern, &EventPattern)> {
        match self {
            Form::BoundedResponse {
                trigger, response, ..
            }
            | Form::UnboundedResponse { trigger, response }
            | Form::WindowedRatio {
                trigger, response, ..
            }
            | Form::VagueQualified {
                trigger, response, ..
            } => Some((trigger, response)),
            Form::Fifo { entry, exit } => Some((entry, exit)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Requirement {
    pub id: String,
    #[serde(flatten)]
    pub form: Form,
}

impl Requirement {
    pub fn new(id: impl Into<String>, form: Form) -> Self {
        Requirement {
            id: id.into(),
            form,
        }
    }

    /// Checks the well-formedness rules that do not depend on the rest of
    /// the document.
    pub fn validate(&self) -> Result<(), ValidationError> {
        let ident = |s: &str| {
            if is_identifier(s) {
                Ok(())
            } else {
                Err(ValidationError::BadIdentifier(s.to_string()))
            }
        };
        ident(&self.id)?;
        let pattern = |p: &EventPattern| {
            ident(&p.name)?;
            p.key.as_deref().map_or(Ok(()), ident)
        };
        let condition = |c: &StateCondition| {
            if c.conjuncts.is_empty() {
                return Err(ValidationError::EmptyCondition(self.id.clone()));
            }
            c.conjuncts.iter().try_for_each(|a| ident(a.variable()))
        };
        let positive = |d: &Duration, what: &str| {
            if d.magnitude == 0 {
                Err(ValidationError::ZeroDuration {
                    id: self.id.clone(),
                    what: what.to_string(),
                })
            } else {
                Ok(())
            }
        };
        if let Some((a, b)) = self.form.correlated_pair() {
            pattern(a)?;
            pattern(b)?;
            if let (Some(ka), Some(kb)) = (&a.key, &b.key) {
                if ka != kb {
                    return Err(ValidationError::MismatchedKeys {
                        id: self.id.clone(),
                        left: ka.clone(),
                        right: kb.clone(),
                    });
                }
            }
        }
        match &self.form {
            Form::WindowedRatio {
                min_ratio, window, ..
            } => {
                if *min_ratio <= Rational::zero() || *min_ratio > Rational::one() {
                    return Err(ValidationError::RatioOutOfRange {
                        id: self.id.clone(),
                        ratio: *min_ratio,
                    });
                }
                if let Some(w) = window {
                    positive(w, "window")?;
                }
            }
            Form::Instantaneous {
                condition: c,
                consequent,
            } => {
                condition(c)?;
                condition(consequent)?;
            }
            Form::StateInvariant { condition: c } => condition(c)?,
            Form::RateFloor {
                event,
                min_count,
                window,
            } => {
                pattern(event)?;
                if *min_count == 0 {
                    return Err(ValidationError::ZeroCount(self.id.clone()));
                }
                positive(window, "window")?;
            }
            _ => {}
        }
        Ok(())
    }
}

/// Line and column (both 1-based) of a statement in its source document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// An ordered list of requirements with unique ids.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RequirementSet {
    requirements: Vec<Requirement>,
    #[serde(skip)]
    positions: Vec<Option<Position>>,
}

impl PartialEq for RequirementSet {
    fn eq(&self, other: &Self) -> bool {
        self.requirements == other.requirements
    }
}

impl Eq for RequirementSet {}

impl RequirementSet {
    pub fn new(requirements: Vec<Requirement>) -> Result<Self, ValidationError> {
        let positions = vec![None; requirements.len()];
        Self::with_positions(requirements, positions).map_err(|(e, _)| e)
    }

    pub(crate) fn with_positions(
        requirements: Vec<Requirement>,
        positions: Vec<Option<Position>>,
    ) -> Result<Self, (ValidationError, Option<Position>)> {
        let mut seen = std::collections::HashSet::new();
        for (r, pos) in requirements.iter().zip(&positions) {
            r.validate().map_err(|e| (e, *pos))?;
            if !seen.insert(r.id.as_str()) {
                return Err((ValidationError::DuplicateId(r.id.clone()), *pos));
            }
        }
        Ok(RequirementSet {
            requirements,
            positions,
        })
    }

    pub fn requirements(&self) -> &[Requirement] {
        &self.requirements
    }

    pub fn get(&self, id: &str) -> Option<&Requirement> {
        self.requirements.iter().find(|r| r.id == id)
    }

    /// Source position of a parsed requirement.
    pub fn position(&self, id: &str) -> Option<Position> {
        let i = self.requirements.iter().position(|r| r.id == id)?;
        self.positions[i]
    }

    pub fn len(&self) -> usize {
        self.requirements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requirements.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Requirement> {
        self.requirements.iter()
    }
}

impl<'a> IntoIterator for &'a RequirementSet {
    type Item = &'a Requirement;
    type IntoIter = std::slice::Iter<'a, Requirement>;

    fn into_iter(self) -> Self::IntoIter {
        self.requirements.iter()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValidationError {
    #[error("`{0}` is not a valid identifier")]
    BadIdentifier(String),
    #[error("duplicate requirement id `{0}`")]
    DuplicateId(String),
    #[error("requirement `{id}` correlates key `{left}` with key `{right}`; keys must match")]
    MismatchedKeys {
        id: String,
        left: String,
        right: String,
    },
    #[error("requirement `{id}`: ratio {ratio} is outside (0, 1]")]
    RatioOutOfRange { id: String, ratio: Rational },
    #[error("requirement `{id}`: {what} must be longer than zero")]
    ZeroDuration { id: String, what: String },
    #[error("requirement `{0}`: minimum count must be positive")]
    ZeroCount(String),
    #[error("requirement `{0}`: empty condition")]
    EmptyCondition(String),
}
