//! The parallel and sequential strategies must agree everywhere they are
//! offered.

mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reqkit::goals::{happy_sets_with, parse_goal_model, variants_with};
use reqkit::language::parse_requirements;
use reqkit::monitor::monitor_set_with;
use reqkit::switching::{equivalent_with, flatten, SwitchingSystem};
use reqkit::Strategy;

use common::*;

#[test]
fn monitor_set_agrees() {
    let rs = parse_requirements(&read_fixture("purchasing.req")).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let names = ["requested", "ordered", "processed", "queued", "served"];
    for _ in 0..50 {
        let tr = random_trace(&mut rng, &names, &["a", "b", "x"], 40, 100_000);
        assert_eq!(
            monitor_set_with(Strategy::Parallel, &rs, &tr),
            monitor_set_with(Strategy::Sequential, &rs, &tr)
        );
    }
}

#[test]
fn goal_enumeration_agrees() {
    for name in [
        "or_choice.goals",
        "optional_goal.goals",
        "softgoal_conflict.goals",
        "softgoal_conflict_preferred.goals",
    ] {
        let m = parse_goal_model(&read_fixture(name)).unwrap();
        assert_eq!(
            variants_with(Strategy::Parallel, &m),
            variants_with(Strategy::Sequential, &m)
        );
        assert_eq!(
            happy_sets_with(Strategy::Parallel, &m).unwrap(),
            happy_sets_with(Strategy::Sequential, &m).unwrap()
        );
    }
}

#[test]
fn equivalence_agrees_including_counterexamples() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..40 {
        let a = random_mode_system(&mut rng, 6);
        let b = random_mode_system(&mut rng, 6);
        let flat = flatten(&a);
        assert_eq!(
            equivalent_with(Strategy::Parallel, &flat, &a, a.vars()).unwrap(),
            equivalent_with(Strategy::Sequential, &flat, &a, a.vars()).unwrap()
        );
        if a.vars() == b.vars() {
            assert_eq!(
                equivalent_with(Strategy::Parallel, &a, &b, a.vars()).unwrap(),
                equivalent_with(Strategy::Sequential, &a, &b, a.vars()).unwrap()
            );
        }
    }
}
