//! Evaluates requirements over timed traces, as an observer would.
//!
//! Judgments are per instance or per window. A report can say that a
//! requirement was violated, or that no violation was observed; it never
//! claims the requirement is satisfied in general, because the trace is a
//! finite prefix of an unbounded run.
//!
//! Deadlines are strict: a response counts only when it arrives less than
//! the deadline after its trigger. An unresolved instance is reported as
//! violated at the first observation point (event time, sample time, or end
//! of trace) at or past the deadline.

mod trace;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::classification::classify;
use crate::exec::{map_slice, Strategy};
use crate::language::{Atom, EventPattern, Form, Requirement, RequirementSet, StateCondition};
use crate::rational::Rational;

pub use trace::{format_trace, load_trace, Event, Sample, Timestamp, Trace, TraceError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Judgment {
    InstanceSatisfied {
        key: Option<String>,
        triggered_at: Timestamp,
        responded_at: Timestamp,
    },
    Violated {
        at: Timestamp,
        witness: String,
    },
    /// `measure` is the resolved fraction for ratio requirements and the
    /// event count for rate requirements.
    WindowSatisfied {
        window: u64,
        measure: Rational,
    },
    WindowViolated {
        window: u64,
        measure: Rational,
    },
    Pending {
        key: Option<String>,
        triggered_at: Timestamp,
    },
}

impl Judgment {
    pub fn is_violation(&self) -> bool {
        matches!(
            self,
            Judgment::Violated { .. } | Judgment::WindowViolated { .. }
        )
    }
}

impl fmt::Display for Judgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let key = |k: &Option<String>| k.clone().unwrap_or_else(|| "-".into());
        match self {
            Judgment::InstanceSatisfied {
                key: k,
                triggered_at,
                responded_at,
            } => write!(
                f,
                "instance satisfied: key {} triggered at {triggered_at}, responded at {responded_at}",
                key(k)
            ),
            Judgment::Violated { at, witness } => write!(f, "VIOLATED at {at}: {witness}"),
            Judgment::WindowSatisfied { window, measure } => {
                write!(f, "window {window} satisfied (measure {measure})")
            }
            Judgment::WindowViolated { window, measure } => {
                write!(f, "window {window} VIOLATED (measure {measure})")
            }
            Judgment::Pending {
                key: k,
                triggered_at,
            } => write!(f, "pending: key {} triggered at {triggered_at}", key(k)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Overall {
    Violated,
    NoViolationObserved,
}

impl fmt::Display for Overall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Overall::Violated => "VIOLATED",
            Overall::NoViolationObserved => "NO_VIOLATION_OBSERVED",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub id: String,
    pub judgments: Vec<Judgment>,
    pub overall: Overall,
}

impl MonitorReport {
    fn new(id: &str, judgments: Vec<Judgment>) -> Self {
        let overall = if judgments.iter().any(Judgment::is_violation) {
            Overall::Violated
        } else {
            Overall::NoViolationObserved
        };
        MonitorReport {
            id: id.to_string(),
            judgments,
            overall,
        }
    }

    pub fn violations(&self) -> impl Iterator<Item = &Judgment> {
        self.judgments.iter().filter(|j| j.is_violation())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MonitorError {
    #[error("requirement `{id}` is not monitorable: {reason}")]
    NotMonitorable { id: String, reason: String },
}

/// Evaluates one requirement over a trace.
pub fn monitor(r: &Requirement, tr: &Trace) -> Result<MonitorReport, MonitorError> {
    if classify(r).vague() {
        let reason = match &r.form {
            Form::VagueQualified { qualifier, .. } => {
                format!(
                    "qualifier `{}` has no violation criterion",
                    qualifier.keyword()
                )
            }
            Form::WindowedRatio { window: None, .. } => {
                "ratio has no window over which to count instances".to_string()
            }
            _ => "vague requirement".to_string(),
        };
        return Err(MonitorError::NotMonitorable {
            id: r.id.clone(),
            reason,
        });
    }
    let judgments = match &r.form {
        Form::BoundedResponse {
            trigger,
            response,
            deadline,
        } => bounded_response(tr, trigger, response, deadline.minutes()),
        Form::UnboundedResponse { trigger, response } => unbounded_response(tr, trigger, response),
        Form::WindowedRatio {
            trigger,
            response,
            deadline,
            min_ratio,
            window: Some(window),
        } => windowed_ratio(
            tr,
            trigger,
            response,
            deadline.minutes(),
            *min_ratio,
            window.minutes(),
        ),
        Form::Instantaneous {
            condition,
            consequent,
        } => instantaneous(tr, condition, consequent),
        Form::StateInvariant { condition } => state_invariant(tr, condition),
        Form::RateFloor {
            event,
            min_count,
            window,
        } => rate_floor(tr, event, *min_count, window.minutes()),
        Form::Fifo { entry, exit } => fifo(tr, entry, exit),
        Form::WindowedRatio { window: None, .. } | Form::VagueQualified { .. } => {
            unreachable!("vague forms rejected above")
        }
    };
    Ok(MonitorReport::new(&r.id, judgments))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MonitorEntry {
    Report(MonitorReport),
    NotMonitorable { id: String, not_monitorable: String },
}

impl MonitorEntry {
    pub fn id(&self) -> &str {
        match self {
            MonitorEntry::Report(r) => &r.id,
            MonitorEntry::NotMonitorable { id, .. } => id,
        }
    }

    pub fn report(&self) -> Option<&MonitorReport> {
        match self {
            MonitorEntry::Report(r) => Some(r),
            MonitorEntry::NotMonitorable { .. } => None,
        }
    }
}

/// Monitors every requirement in the set; vague members are recorded as
/// not monitorable without stopping the others.
pub fn monitor_set(rs: &RequirementSet, tr: &Trace) -> IndexMap<String, MonitorEntry> {
    monitor_set_with(Strategy::default(), rs, tr)
}

pub fn monitor_set_with(
    strategy: Strategy,
    rs: &RequirementSet,
    tr: &Trace,
) -> IndexMap<String, MonitorEntry> {
    map_slice(strategy, rs.requirements(), |r| {
        let entry = match monitor(r, tr) {
            Ok(report) => MonitorEntry::Report(report),
            Err(MonitorError::NotMonitorable { id, reason }) => MonitorEntry::NotMonitorable {
                id,
                not_monitorable: reason,
            },
        };
        (r.id.clone(), entry)
    })
    .into_iter()
    .collect()
}

/// Plain-text rendering of a set of monitor entries.
pub fn render_entries<'a>(entries: impl IntoIterator<Item = &'a MonitorEntry>) -> String {
    let mut out = String::new();
    for entry in entries {
        match entry {
            MonitorEntry::Report(r) => {
                let _ = writeln!(out, "{}: {}", r.id, r.overall);
                for j in &r.judgments {
                    let _ = writeln!(out, "  {j}");
                }
            }
            MonitorEntry::NotMonitorable {
                id,
                not_monitorable,
            } => {
                let _ = writeln!(out, "{id}: NOT_MONITORABLE ({not_monitorable})");
            }
        }
    }
    out
}

/// Response times, indexed by correlation value when both patterns carry a
/// key and pooled otherwise.
struct ResponseIndex {
    correlated: bool,
    times: HashMap<Option<String>, Vec<Timestamp>>,
}

impl ResponseIndex {
    fn new(tr: &Trace, trigger: &EventPattern, response: &EventPattern) -> Self {
        let correlated = trigger.key.is_some() && response.key.is_some();
        let mut times: HashMap<Option<String>, Vec<Timestamp>> = HashMap::new();
        for e in tr.events().iter().filter(|e| e.name == response.name) {
            let k = if correlated { e.key.clone() } else { None };
            times.entry(k).or_default().push(e.t);
        }
        ResponseIndex { correlated, times }
    }

    /// Earliest matching response at or after `t`.
    fn first_at_or_after(&self, key: &Option<String>, t: Timestamp) -> Option<Timestamp> {
        let k = if self.correlated { key.clone() } else { None };
        let times = self.times.get(&k)?;
        let i = times.partition_point(|&x| x < t);
        times.get(i).copied()
    }
}

fn triggers<'a>(tr: &'a Trace, pattern: &'a EventPattern) -> impl Iterator<Item = &'a Event> {
    tr.events().iter().filter(move |e| e.name == pattern.name)
}

fn describe(pattern: &EventPattern, key: &Option<String>) -> String {
    format!("{}({})", pattern.name, key.as_deref().unwrap_or(""))
}

fn bounded_response(
    tr: &Trace,
    trigger: &EventPattern,
    response: &EventPattern,
    deadline: u64,
) -> Vec<Judgment> {
    let index = ResponseIndex::new(tr, trigger, response);
    let points = tr.observation_points();
    triggers(tr, trigger)
        .map(|e| {
            let due = e.t.saturating_add(deadline);
            match index.first_at_or_after(&e.key, e.t) {
                Some(r) if r < due => Judgment::InstanceSatisfied {
                    key: e.key.clone(),
                    triggered_at: e.t,
                    responded_at: r,
                },
                _ if tr.end_time() >= due => {
                    let at = points[points.partition_point(|&p| p < due)];
                    Judgment::Violated {
                        at,
                        witness: format!(
                            "{} at {} not followed by {} within {} minutes",
                            describe(trigger, &e.key),
                            e.t,
                            describe(response, &e.key),
                            deadline
                        ),
                    }
                }
                _ => Judgment::Pending {
                    key: e.key.clone(),
                    triggered_at: e.t,
                },
            }
        })
        .collect()
}

fn unbounded_response(
    tr: &Trace,
    trigger: &EventPattern,
    response: &EventPattern,
) -> Vec<Judgment> {
    let index = ResponseIndex::new(tr, trigger, response);
    triggers(tr, trigger)
        .map(|e| match index.first_at_or_after(&e.key, e.t) {
            Some(r) => Judgment::InstanceSatisfied {
                key: e.key.clone(),
                triggered_at: e.t,
                responded_at: r,
            },
            None => Judgment::Pending {
                key: e.key.clone(),
                triggered_at: e.t,
            },
        })
        .collect()
}

fn windowed_ratio(
    tr: &Trace,
    trigger: &EventPattern,
    response: &EventPattern,
    deadline: u64,
    min_ratio: Rational,
    window: u64,
) -> Vec<Judgment> {
    let index = ResponseIndex::new(tr, trigger, response);
    let mut windows: BTreeMap<u64, Vec<&Event>> = BTreeMap::new();
    for e in triggers(tr, trigger) {
        windows.entry(e.t / window).or_default().push(e);
    }
    let mut out = Vec::new();
    for (k, instances) in windows {
        let judged_at = (k + 1).saturating_mul(window).saturating_add(deadline);
        if judged_at > tr.end_time() {
            out.extend(instances.iter().map(|e| Judgment::Pending {
                key: e.key.clone(),
                triggered_at: e.t,
            }));
            continue;
        }
        let resolved = instances
            .iter()
            .filter(|e| {
                index
                    .first_at_or_after(&e.key, e.t)
                    .is_some_and(|r| r - e.t < deadline)
            })
            .count();
        let measure = Rational::new(resolved as i64, instances.len() as i64);
        out.push(if measure >= min_ratio {
            Judgment::WindowSatisfied { window: k, measure }
        } else {
            Judgment::WindowViolated { window: k, measure }
        });
    }
    out
}

/// Replays samples and yields the held state at each requested point.
struct StateReplay<'a> {
    samples: &'a [Sample],
    next: usize,
    values: HashMap<&'a str, Rational>,
}

impl<'a> StateReplay<'a> {
    fn new(tr: &'a Trace) -> Self {
        StateReplay {
            samples: tr.samples(),
            next: 0,
            values: HashMap::new(),
        }
    }

    fn advance_to(&mut self, t: Timestamp) {
        while let Some(s) = self.samples.get(self.next).filter(|s| s.t <= t) {
            self.values.insert(&s.variable, s.value);
            self.next += 1;
        }
    }

    /// `None` while some variable of the condition has not been sampled.
    fn eval(&self, c: &StateCondition) -> Option<bool> {
        let mut result = true;
        for atom in &c.conjuncts {
            let v = self.values.get(atom.variable())?;
            result &= atom.holds(*v);
        }
        Some(result)
    }
}

fn render_condition(c: &StateCondition) -> String {
    let parts: Vec<String> = c
        .conjuncts
        .iter()
        .map(|a| match a {
            Atom::Compare {
                variable,
                comparator,
                threshold,
            } => format!("{variable} {} {threshold}", comparator.symbol()),
            Atom::Flag {
                variable,
                value: true,
            } => variable.clone(),
            Atom::Flag {
                variable,
                value: false,
            } => format!("not {variable}"),
        })
        .collect();
    parts.join(" and ")
}

fn instantaneous(
    tr: &Trace,
    condition: &StateCondition,
    consequent: &StateCondition,
) -> Vec<Judgment> {
    let mut replay = StateReplay::new(tr);
    let mut out = Vec::new();
    for t in tr.observation_points() {
        replay.advance_to(t);
        if replay.eval(condition) != Some(true) {
            continue;
        }
        match replay.eval(consequent) {
            Some(true) => out.push(Judgment::InstanceSatisfied {
                key: None,
                triggered_at: t,
                responded_at: t,
            }),
            Some(false) => out.push(Judgment::Violated {
                at: t,
                witness: format!(
                    "`{}` holds but `{}` does not",
                    render_condition(condition),
                    render_condition(consequent)
                ),
            }),
            None => {}
        }
    }
    out
}

fn state_invariant(tr: &Trace, condition: &StateCondition) -> Vec<Judgment> {
    let mut replay = StateReplay::new(tr);
    let times: BTreeSet<Timestamp> = tr.samples().iter().map(|s| s.t).collect();
    let mut out = Vec::new();
    for t in times {
        replay.advance_to(t);
        if replay.eval(condition) == Some(false) {
            out.push(Judgment::Violated {
                at: t,
                witness: format!("`{}` is false", render_condition(condition)),
            });
        }
    }
    out
}

fn rate_floor(tr: &Trace, event: &EventPattern, min_count: u64, window: u64) -> Vec<Judgment> {
    let complete = tr.end_time() / window;
    let mut counts = vec![0u64; complete as usize];
    for e in tr.events().iter().filter(|e| e.name == event.name) {
        if let Some(c) = counts.get_mut((e.t / window) as usize) {
            *c += 1;
        }
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, n)| {
            let measure = Rational::from_integer(n as i64);
            if n >= min_count {
                Judgment::WindowSatisfied {
                    window: k as u64,
                    measure,
                }
            } else {
                Judgment::WindowViolated {
                    window: k as u64,
                    measure,
                }
            }
        })
        .collect()
}

/// Instances are identified by event key; only the first entry and the
/// first subsequent exit of each key count.
fn fifo(tr: &Trace, entry: &EventPattern, exit: &EventPattern) -> Vec<Judgment> {
    let events = tr.events();
    let mut entered: HashMap<&str, Timestamp> = HashMap::new();
    let mut waiting: BTreeSet<(Timestamp, &str)> = BTreeSet::new();
    let mut out = Vec::new();
    let mut i = 0;
    while i < events.len() {
        let t = events[i].t;
        let group_end = i + events[i..].iter().take_while(|e| e.t == t).count();
        let group = &events[i..group_end];
        i = group_end;

        for e in group.iter().filter(|e| e.name == entry.name) {
            if let Some(k) = e.key.as_deref() {
                if !entered.contains_key(k) {
                    entered.insert(k, t);
                    waiting.insert((t, k));
                }
            }
        }
        let exiting: BTreeSet<(Timestamp, &str)> = group
            .iter()
            .filter(|e| e.name == exit.name)
            .filter_map(|e| e.key.as_deref())
            .filter_map(|k| entered.get(k).map(|&te| (te, k)))
            .filter(|slot| waiting.contains(slot))
            .collect();
        for &(entered_at, y) in &exiting {
            let overtaken: Vec<&str> = waiting
                .range(..(entered_at, ""))
                .filter(|&&(te, x)| te < entered_at && !exiting.contains(&(te, x)))
                .map(|&(_, x)| x)
                .collect();
            if overtaken.is_empty() {
                out.push(Judgment::InstanceSatisfied {
                    key: Some(y.to_string()),
                    triggered_at: entered_at,
                    responded_at: t,
                });
            }
            for x in overtaken {
                out.push(Judgment::Violated {
                    at: t,
                    witness: format!("{y} served before {x}"),
                });
            }
        }
        for slot in &exiting {
            waiting.remove(slot);
        }
    }
    out.extend(waiting.into_iter().map(|(te, k)| Judgment::Pending {
        key: Some(k.to_string()),
        triggered_at: te,
    }));
    out
}
