//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use reqkit::monitor::{Event, Judgment, Timestamp, Trace};
use reqkit::switching::{
    build_machine_switching, build_mode_switching, Condition, Literal, MachineId,
    MachineSwitchingSystem, ModeSwitchingSystem, Valuation,
};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

// ---- traces ------------------------------------------------------------

/// Up to `max_events` events named from `names`, keyed from `keys` (or
/// unkeyed), at times in `0..=horizon`, ending up to 6 minutes after the
/// last event.
pub fn random_trace(
    rng: &mut ChaCha8Rng,
    names: &[&str],
    keys: &[&str],
    max_events: usize,
    horizon: u64,
) -> Trace {
    let n = rng.gen_range(0..=max_events);
    let mut times: Vec<Timestamp> = (0..n).map(|_| rng.gen_range(0..=horizon)).collect();
    times.sort_unstable();
    let events: Vec<Event> = times
        .into_iter()
        .map(|t| Event {
            name: names[rng.gen_range(0..names.len())].to_string(),
            key: if rng.gen_bool(0.9) {
                Some(keys[rng.gen_range(0..keys.len())].to_string())
            } else {
                None
            },
            t,
        })
        .collect();
    let last = events.last().map_or(0, |e| e.t);
    let end = last + rng.gen_range(0..=6);
    Trace::new(events, Vec::new(), end).expect("generated trace is ordered")
}

/// Judgments with witness text dropped, for comparison against oracles.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verdict {
    Satisfied {
        key: Option<String>,
        triggered_at: Timestamp,
        responded_at: Timestamp,
    },
    Violated {
        at: Timestamp,
    },
    Pending {
        key: Option<String>,
        triggered_at: Timestamp,
    },
}

pub fn verdicts(judgments: &[Judgment]) -> Vec<Verdict> {
    judgments
        .iter()
        .map(|j| match j {
            Judgment::InstanceSatisfied {
                key,
                triggered_at,
                responded_at,
            } => Verdict::Satisfied {
                key: key.clone(),
                triggered_at: *triggered_at,
                responded_at: *responded_at,
            },
            Judgment::Violated { at, .. } => Verdict::Violated { at: *at },
            Judgment::Pending { key, triggered_at } => Verdict::Pending {
                key: key.clone(),
                triggered_at: *triggered_at,
            },
            other => panic!("unexpected window judgment {other:?}"),
        })
        .collect()
}

/// Pairwise scan: each trigger against every response and every
/// observation point. `correlated` requires equal keys.
pub fn oracle_bounded(
    tr: &Trace,
    trigger: &str,
    response: &str,
    deadline: u64,
    correlated: bool,
) -> Vec<Verdict> {
    let mut out = Vec::new();
    for e in tr.events().iter().filter(|e| e.name == trigger) {
        let mut first: Option<Timestamp> = None;
        for r in tr.events() {
            if r.name == response && r.t >= e.t && (!correlated || r.key == e.key) {
                first = Some(first.map_or(r.t, |f| f.min(r.t)));
            }
        }
        let due = e.t + deadline;
        out.push(match first {
            Some(r) if r < due => Verdict::Satisfied {
                key: e.key.clone(),
                triggered_at: e.t,
                responded_at: r,
            },
            _ if tr.end_time() >= due => {
                let mut at = tr.end_time();
                for o in tr.events() {
                    if o.t >= due && o.t < at {
                        at = o.t;
                    }
                }
                Verdict::Violated { at }
            }
            _ => Verdict::Pending {
                key: e.key.clone(),
                triggered_at: e.t,
            },
        });
    }
    out
}

/// Pairwise FIFO check over keyed events: `y` overtakes `x` when `x`
/// entered strictly earlier and has not left by the time `y` leaves.
/// Returns the sorted verdicts.
pub fn oracle_fifo(tr: &Trace, entry: &str, exit: &str) -> Vec<Verdict> {
    let keyed = |name: &str| -> Vec<(&str, Timestamp)> {
        tr.events()
            .iter()
            .filter(|e| e.name == name)
            .filter_map(|e| e.key.as_deref().map(|k| (k, e.t)))
            .collect()
    };
    let mut entered: BTreeMap<&str, Timestamp> = BTreeMap::new();
    for (k, t) in keyed(entry) {
        let slot = entered.entry(k).or_insert(t);
        *slot = (*slot).min(t);
    }
    let mut left: BTreeMap<&str, Timestamp> = BTreeMap::new();
    for (k, t) in keyed(exit) {
        if let Some(&te) = entered.get(k) {
            if t >= te {
                let slot = left.entry(k).or_insert(t);
                *slot = (*slot).min(t);
            }
        }
    }
    let mut out = Vec::new();
    for (&y, &ty) in &left {
        let mut overtaken = 0;
        for (&x, &ex) in &entered {
            if ex < entered[y] && left.get(x).is_none_or(|&tx| tx > ty) {
                overtaken += 1;
                out.push(Verdict::Violated { at: ty });
            }
        }
        if overtaken == 0 {
            out.push(Verdict::Satisfied {
                key: Some(y.to_string()),
                triggered_at: entered[y],
                responded_at: ty,
            });
        }
    }
    for (&k, &te) in &entered {
        if !left.contains_key(k) {
            out.push(Verdict::Pending {
                key: Some(k.to_string()),
                triggered_at: te,
            });
        }
    }
    out.sort();
    out
}

// ---- switching systems -------------------------------------------------

/// Leaves of a random decision tree over `vars`, each kept with
/// probability 0.8; leaves of one tree are pairwise disjoint.
pub fn random_conditions(rng: &mut ChaCha8Rng, vars: &[String], depth: usize) -> Vec<Condition> {
    fn grow(
        rng: &mut ChaCha8Rng,
        vars: &[String],
        path: Vec<Literal>,
        depth: usize,
        out: &mut Vec<Condition>,
    ) {
        let free: Vec<&String> = vars
            .iter()
            .filter(|v| !path.iter().any(|l| &l.var == *v))
            .collect();
        if depth == 0 || free.is_empty() || rng.gen_bool(0.3) {
            if rng.gen_bool(0.8) {
                out.push(Condition::new(path));
            }
            return;
        }
        let v = free[rng.gen_range(0..free.len())];
        for positive in [true, false] {
            let mut p = path.clone();
            p.push(Literal {
                var: v.clone(),
                positive,
            });
            grow(rng, vars, p, depth - 1, out);
        }
    }
    let mut out = Vec::new();
    grow(rng, vars, Vec::new(), depth, &mut out);
    out
}

fn random_machine(rng: &mut ChaCha8Rng, vars: &[String], mode: usize) -> MachineSwitchingSystem {
    loop {
        let ks = random_conditions(rng, vars, 3);
        if ks.is_empty() {
            continue;
        }
        let pairs = ks
            .into_iter()
            .enumerate()
            .map(|(j, k)| {
                let name = if rng.gen_bool(0.3) {
                    format!("S{j}")
                } else {
                    format!("M{mode}_{j}")
                };
                (k, MachineId::new(&name))
            })
            .collect();
        return build_machine_switching(vars, pairs)
            .expect("disjoint by construction")
            .0;
    }
}

/// A valid mode-switching system over 1 to `max_vars` variables.
pub fn random_mode_system(rng: &mut ChaCha8Rng, max_vars: usize) -> ModeSwitchingSystem {
    let n = rng.gen_range(1..=max_vars);
    let vars: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    loop {
        let es = random_conditions(rng, &vars, 2);
        if es.is_empty() {
            continue;
        }
        let modes: Vec<_> = es
            .into_iter()
            .enumerate()
            .map(|(i, e)| (e, random_machine(rng, &vars, i)))
            .collect();
        // Two modes may draw identical inner systems; redraw then.
        if let Ok((ms, _)) = build_mode_switching(&vars, modes) {
            return ms;
        }
    }
}

pub fn random_valuations(rng: &mut ChaCha8Rng, vars: &[String], max_len: usize) -> Vec<Valuation> {
    let len = rng.gen_range(0..=max_len);
    (0..len)
        .map(|_| Valuation::from_bits(vars, rng.gen_range(0..1u64 << vars.len())))
        .collect()
}

pub fn machine_names(run: &[Option<MachineId>]) -> Vec<Option<String>> {
    run.iter()
        .map(|m| m.as_ref().map(|m| m.name.clone()))
        .collect()
}

/// Every valuation over `vars`, by direct enumeration.
pub fn all_valuations(vars: &[String]) -> Vec<Valuation> {
    (0..1u64 << vars.len())
        .map(|bits| Valuation::from_bits(vars, bits))
        .collect()
}

pub fn sets(items: &[&[&str]]) -> BTreeSet<BTreeSet<String>> {
    items
        .iter()
        .map(|s| s.iter().map(|x| x.to_string()).collect())
        .collect()
}
