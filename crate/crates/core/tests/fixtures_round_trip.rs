mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reqkit::language::{format_requirements, parse_requirements};
use reqkit::monitor::{format_trace, load_trace, monitor, Judgment};
use reqkit::switching::{
    equivalent, flatten, format_machine_system, format_mode_system, parse_switching,
    parse_valuations, AdaptiveSystem, Selection, SwitchingSystem,
};

use common::*;

#[test]
fn purchasing_requirements_round_trip() {
    let set = parse_requirements(&read_fixture("purchasing.req")).unwrap();
    assert_eq!(set.len(), 13);
    let text = format_requirements(&set);
    assert_eq!(parse_requirements(&text).unwrap(), set);
    assert_eq!(
        format_requirements(&parse_requirements(&text).unwrap()),
        text
    );
}

#[test]
fn witness_traces_round_trip() {
    for form in [
        "bounded_response",
        "windowed_ratio",
        "rate_floor",
        "fifo",
        "instantaneous",
        "state_invariant",
    ] {
        let tr = load_trace(&read_fixture(&format!("witness/{form}.trace"))).unwrap();
        assert_eq!(load_trace(&format_trace(&tr)).unwrap(), tr, "{form}");
    }
}

#[test]
fn r3_window_counts_by_hand() {
    let set = parse_requirements(&read_fixture("purchasing.req")).unwrap();
    let tr = load_trace(&read_fixture("witness/windowed_ratio.trace")).unwrap();
    let report = monitor(set.get("R3").unwrap(), &tr).unwrap();
    // a and b are ordered within two days, c after 4800 minutes, d and e never.
    match &report.judgments[..] {
        [Judgment::WindowViolated { window: 0, measure }] => {
            assert_eq!(measure.to_string(), "0.4")
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn two_mode_fixture_flattens_to_the_expected_file() {
    let doc = parse_switching(&read_fixture("two_modes.sw")).unwrap();
    let Some(AdaptiveSystem::Mode(ms)) = &doc.system else {
        panic!("expected modes")
    };
    let flat = flatten(ms);
    assert_eq!(
        format_machine_system(&flat),
        read_fixture("two_modes_flat.sw")
    );
    // Direct comparison over all four valuations, independent of `equivalent`.
    for v in all_valuations(ms.vars()) {
        let (a, b) = (flat.select(&v), ms.select(&v));
        assert_eq!(a, b);
        assert_ne!(a, Selection::Hold);
    }
    assert!(equivalent(&flat, ms, ms.vars()).unwrap().equal);
    let reparsed = parse_switching(&format_mode_system(ms)).unwrap();
    assert_eq!(reparsed.system, doc.system);
}

#[test]
fn perturbed_fixture_differs_exactly_where_expected() {
    let good = parse_switching(&read_fixture("two_modes_flat.sw"))
        .unwrap()
        .system
        .unwrap();
    let bad = parse_switching(&read_fixture("two_modes_perturbed.sw"))
        .unwrap()
        .system
        .unwrap();
    let differing: Vec<String> = all_valuations(good.vars())
        .into_iter()
        .filter(|v| good.select(v) != bad.select(v))
        .map(|v| v.to_string())
        .collect();
    assert_eq!(differing.len(), 2);
    assert!(differing.contains(&"{e,k}".to_string()));
    assert!(differing.contains(&"{e,!k}".to_string()));
    let eq = equivalent(&bad, &good, good.vars()).unwrap();
    assert_eq!(eq.counterexample.unwrap().to_string(), "{e,k}");
}

#[test]
fn environment_file_matches_universe() {
    let doc = parse_switching(&read_fixture("two_modes.sw")).unwrap();
    let vs = parse_valuations(&read_fixture("two_modes.env"), &doc.vars).unwrap();
    assert_eq!(vs.len(), 4);
    assert!(parse_valuations("{e}", &doc.vars).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_mode_systems_print_and_reparse(seed in any::<u64>()) {
        let ms = random_mode_system(&mut ChaCha8Rng::seed_from_u64(seed), 6);
        let doc = parse_switching(&format_mode_system(&ms)).unwrap();
        prop_assert_eq!(doc.system, Some(AdaptiveSystem::Mode(ms.clone())));
        let flat = flatten(&ms);
        let doc = parse_switching(&format_machine_system(&flat)).unwrap();
        prop_assert_eq!(doc.system, Some(AdaptiveSystem::Machine(flat)));
    }
}
