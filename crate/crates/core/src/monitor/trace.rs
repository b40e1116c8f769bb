//! Timed environment traces.
//!
//! ```text
//! event <name> [<key>] <t>
//! sample <var> <value> <t>
//! end <t>
//! ```
//!
//! Timestamps are whole minutes. Events and samples must each be listed in
//! nondecreasing time order and may not lie past `end`. Without an `end`
//! line the trace ends at its last timestamp.

use serde::{Deserialize, Serialize};

use crate::rational::Rational;

pub type Timestamp = u64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub name: String,
    pub key: Option<String>,
    pub t: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub variable: String,
    pub value: Rational,
    pub t: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Trace {
    events: Vec<Event>,
    samples: Vec<Sample>,
    end_time: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: timestamp {t} is earlier than the preceding {kind} at {previous}")]
    Decreasing {
        line: usize,
        kind: &'static str,
        t: Timestamp,
        previous: Timestamp,
    },
    #[error("{kind} at {t} is listed after one at {previous}")]
    Unordered {
        kind: &'static str,
        t: Timestamp,
        previous: Timestamp,
    },
    #[error("{kind} at {t} lies past the end of the trace ({end})")]
    PastEnd {
        kind: &'static str,
        t: Timestamp,
        end: Timestamp,
    },
}

impl Trace {
    /// Builds a trace, checking ordering and the end bound.
    pub fn new(
        events: Vec<Event>,
        samples: Vec<Sample>,
        end_time: Timestamp,
    ) -> Result<Self, TraceError> {
        check_order(events.iter().map(|e| e.t), "event")?;
        check_order(samples.iter().map(|s| s.t), "sample")?;
        let past = |kind, t| TraceError::PastEnd {
            kind,
            t,
            end: end_time,
        };
        if let Some(e) = events.iter().find(|e| e.t > end_time) {
            return Err(past("event", e.t));
        }
        if let Some(s) = samples.iter().find(|s| s.t > end_time) {
            return Err(past("sample", s.t));
        }
        Ok(Trace {
            events,
            samples,
            end_time,
        })
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn end_time(&self) -> Timestamp {
        self.end_time
    }

    /// Event times, sample times and the end time, sorted and deduplicated.
    pub fn observation_points(&self) -> Vec<Timestamp> {
        let mut points: Vec<Timestamp> = self
            .events
            .iter()
            .map(|e| e.t)
            .chain(self.samples.iter().map(|s| s.t))
            .chain(std::iter::once(self.end_time))
            .collect();
        points.sort_unstable();
        points.dedup();
        points
    }

    /// Whether an event `name` with correlation value `key` (any value when
    /// `None`) has occurred at or before `t`.
    pub fn holds(&self, name: &str, key: Option<&str>, t: Timestamp) -> bool {
        self.events
            .iter()
            .any(|e| e.t <= t && e.name == name && key.is_none_or(|k| e.key.as_deref() == Some(k)))
    }
}

fn check_order(
    times: impl Iterator<Item = Timestamp>,
    kind: &'static str,
) -> Result<(), TraceError> {
    let mut previous = 0;
    for t in times {
        if t < previous {
            return Err(TraceError::Unordered { kind, t, previous });
        }
        previous = t;
    }
    Ok(())
}

pub fn load_trace(text: &str) -> Result<Trace, TraceError> {
    let mut events = Vec::new();
    let mut samples = Vec::new();
    let mut end: Option<Timestamp> = None;
    let mut last_event = 0;
    let mut last_sample = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let words: Vec<&str> = content.split_whitespace().collect();
        let Some((&head, rest)) = words.split_first() else {
            continue;
        };
        let malformed = |message: String| TraceError::Malformed { line, message };
        let time = |s: &str| {
            s.parse::<Timestamp>()
                .map_err(|_| malformed(format!("invalid timestamp `{s}`")))
        };
        match (head, rest) {
            ("event", [name, t]) | ("event", [name, _, t]) => {
                let t = time(t)?;
                if t < last_event {
                    return Err(TraceError::Decreasing {
                        line,
                        kind: "event",
                        t,
                        previous: last_event,
                    });
                }
                last_event = t;
                let key = (rest.len() == 3).then(|| rest[1].to_string());
                events.push(Event {
                    name: name.to_string(),
                    key,
                    t,
                });
            }
            ("sample", [var, value, t]) => {
                let t = time(t)?;
                if t < last_sample {
                    return Err(TraceError::Decreasing {
                        line,
                        kind: "sample",
                        t,
                        previous: last_sample,
                    });
                }
                last_sample = t;
                let value = value
                    .parse::<Rational>()
                    .map_err(|e| malformed(e.to_string()))?;
                samples.push(Sample {
                    variable: var.to_string(),
                    value,
                    t,
                });
            }
            ("end", [t]) => {
                if end.is_some() {
                    return Err(malformed("duplicate `end`".into()));
                }
                end = Some(time(t)?);
            }
            ("event" | "sample" | "end", _) => {
                return Err(malformed(format!("wrong number of fields for `{head}`")))
            }
            _ => return Err(malformed(format!("unknown record `{head}`"))),
        }
    }
    let end_time = end.unwrap_or_else(|| {
        let last_e = events.last().map_or(0, |e| e.t);
        let last_s = samples.last().map_or(0, |s| s.t);
        last_e.max(last_s)
    });
    Trace::new(events, samples, end_time)
}

/// Renders a trace in the line format accepted by [`load_trace`].
pub fn format_trace(trace: &Trace) -> String {
    let mut out = String::new();
    for e in &trace.events {
        match &e.key {
            Some(k) => out += &format!("event {} {} {}\n", e.name, k, e.t),
            None => out += &format!("event {} {}\n", e.name, e.t),
        }
    }
    for s in &trace.samples {
        out += &format!("sample {} {} {}\n", s.variable, s.value, s.t);
    }
    out += &format!("end {}\n", trace.end_time);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_trace() {
        let tr = load_trace("event requested x 0\nend 5000\n").unwrap();
        assert_eq!(tr.events().len(), 1);
        assert_eq!(tr.events()[0].key.as_deref(), Some("x"));
        assert_eq!(tr.end_time(), 5000);
    }

    #[test]
    fn single_sample() {
        let tr = load_trace("sample temp 19 10").unwrap();
        assert_eq!(tr.samples().len(), 1);
        assert_eq!(tr.samples()[0].value, Rational::from_integer(19));
        assert_eq!(tr.end_time(), 10);
    }

    #[test]
    fn ordering_violation() {
        let err = load_trace("event a 5\nevent b 3\n").unwrap_err();
        assert_eq!(
            err,
            TraceError::Decreasing {
                line: 2,
                kind: "event",
                t: 3,
                previous: 5
            }
        );
    }

    #[test]
    fn event_past_end() {
        let err = load_trace("end 10\nevent a 11\n").unwrap_err();
        assert!(matches!(err, TraceError::PastEnd { t: 11, .. }));
    }

    #[test]
    fn malformed_lines() {
        for bad in [
            "event",
            "event a b c d",
            "sample t x 3",
            "end -1",
            "bogus 1",
            "end 1\nend 2",
        ] {
            assert!(load_trace(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn unkeyed_events_and_comments() {
        let tr = load_trace("# header\nevent tick 1  # trailing\nevent tick 1\n").unwrap();
        assert_eq!(tr.events().len(), 2);
        assert!(tr.events()[0].key.is_none());
        assert_eq!(tr.observation_points(), vec![1]);
    }

    #[test]
    fn closed_world_predicates() {
        let tr = load_trace("event ordered x 10\nend 20").unwrap();
        assert!(!tr.holds("ordered", Some("x"), 9));
        assert!(tr.holds("ordered", Some("x"), 10));
        assert!(!tr.holds("ordered", Some("y"), 20));
        assert!(tr.holds("ordered", None, 20));
    }

    #[test]
    fn format_round_trip() {
        let text = "event a k 1\nevent b 2\nsample t -1.5 3\nend 9\n";
        let tr = load_trace(text).unwrap();
        assert_eq!(format_trace(&tr), text);
        assert_eq!(load_trace(&format_trace(&tr)).unwrap(), tr);
    }
}
