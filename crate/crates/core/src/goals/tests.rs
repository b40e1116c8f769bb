use super::*;
use crate::language::parse_requirements;
use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest, Strategy as _};

const OR_CHOICE: &str = "\
goal g mandatory
goal g' req R1
goal g'' req R3
decompose g OR g' g''
";

const OPTIONAL_GOAL: &str = "\
goal g mandatory req R1
goal o optional req R4
";

const SOFTGOAL_CONFLICT: &str = "\
goal g mandatory
goal g'
goal g''
soft s
soft s'
decompose g OR g' g''
contrib g' + s
contrib g' - s'
contrib g'' - s
contrib g'' + s'
";

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn sets(items: &[&[&str]]) -> BTreeSet<BTreeSet<String>> {
    items.iter().map(|s| set(s)).collect()
}

fn happy(m: &GoalModel) -> BTreeSet<BTreeSet<String>> {
    happy_sets(m)
        .unwrap()
        .sets
        .into_iter()
        .map(|h| h.leaves)
        .collect()
}

#[test]
fn parses_or_choice() {
    let m = parse_goal_model(OR_CHOICE).unwrap();
    assert_eq!(m.goals().count(), 3);
    assert_eq!(m.leaves(), ["g'", "g''"]);
}

#[test]
fn parse_errors() {
    assert!(matches!(
        parse_goal_model("goal a\ngoal b\ndecompose a AND b\ndecompose b OR a"),
        Err(GoalError::Cycle(_))
    ));
    assert!(matches!(
        parse_goal_model("goal a\ngoal b\ngoal c\ndecompose a AND b\ndecompose a OR c"),
        Err(GoalError::DuplicateDecomposition(_))
    ));
    assert!(matches!(
        parse_goal_model("goal a\ngoal b\ncontrib a + b"),
        Err(GoalError::ContributionToHardGoal { .. })
    ));
    assert!(matches!(
        parse_goal_model("goal a\ndecompose a AND zz"),
        Err(GoalError::UnknownGoal(_))
    ));
    assert!(matches!(
        parse_goal_model("goal a\nfrobnicate a"),
        Err(GoalError::Parse { line: 2, .. })
    ));
    assert!(matches!(
        parse_goal_model("goal a mandatory optional"),
        Err(GoalError::MandatoryAndOptional(_))
    ));
    assert!(matches!(
        parse_goal_model("goal a\ngoal b\ndecompose a OR b\nprefer {a}"),
        Err(GoalError::NotALeaf(_))
    ));
}

#[test]
fn empty_model() {
    let m = parse_goal_model("").unwrap();
    assert_eq!(m.goals().count(), 0);
    assert_eq!(variants(&m), sets(&[&[]]));
}

#[test]
fn propagation() {
    let m = parse_goal_model(OR_CHOICE).unwrap();
    assert!(propagate(&m, &set(&["g'"])).unwrap()["g"]);
    assert!(!propagate(&m, &set(&[])).unwrap()["g"]);
    assert!(matches!(
        propagate(&m, &set(&["g"])),
        Err(GoalError::NotALeaf(_))
    ));

    let and = parse_goal_model("goal p mandatory\ngoal a\ngoal b\ndecompose p AND a b").unwrap();
    assert!(!propagate(&and, &set(&["a"])).unwrap()["p"]);
    assert!(propagate(&and, &set(&["a", "b"])).unwrap()["p"]);
}

#[test]
fn variants_of_small_models() {
    let three = sets(&[&["g'"], &["g''"], &["g'", "g''"]]);
    assert_eq!(variants(&parse_goal_model(OR_CHOICE).unwrap()), three);
    assert_eq!(
        variants(&parse_goal_model(SOFTGOAL_CONFLICT).unwrap()),
        three
    );
    assert_eq!(
        variants(&parse_goal_model("goal g mandatory").unwrap()),
        sets(&[&["g"]])
    );
}

#[test]
fn happy_sets_of_small_models() {
    assert_eq!(
        happy(&parse_goal_model(OR_CHOICE).unwrap()),
        sets(&[&["g'"], &["g''"], &["g'", "g''"]])
    );
    assert_eq!(
        happy(&parse_goal_model(OPTIONAL_GOAL).unwrap()),
        sets(&[&["g"], &["g", "o"]])
    );
    let c = happy_sets(&parse_goal_model(SOFTGOAL_CONFLICT).unwrap()).unwrap();
    assert!(c.sets.is_empty());
    assert!(c
        .diagnostic
        .as_deref()
        .unwrap()
        .contains("requires further elicitation"));
    let pref = format!("{SOFTGOAL_CONFLICT}prefer {{g''}}\n");
    assert_eq!(happy(&parse_goal_model(&pref).unwrap()), sets(&[&["g''"]]));
}

#[test]
fn preference_must_be_a_variant() {
    let text = "goal g mandatory\ngoal a\ngoal b\ndecompose g AND a b\nprefer {a}";
    assert!(matches!(
        happy_sets(&parse_goal_model(text).unwrap()),
        Err(GoalError::InvalidPreference(_))
    ));
}

#[test]
fn same_sign_contributions_do_not_block() {
    let text = "goal g mandatory\ngoal a\ngoal b\nsoft s\ndecompose g OR a b\ncontrib a + s\ncontrib b + s";
    assert_eq!(happy(&parse_goal_model(text).unwrap()).len(), 3);
}

#[test]
fn designation() {
    let rs = parse_requirements(
        "req R1: when requested(x) then ordered(x) within 2 days\n\
         req R4: when requested(x) then eventually ordered(x)",
    )
    .unwrap();
    let m = parse_goal_model(OPTIONAL_GOAL).unwrap();

    let both = HappySet::new(&m, set(&["g", "o"])).unwrap();
    let d = designate(&m, &both, &rs).unwrap();
    assert_eq!(d.requirements().len(), 2);
    let report = check_designated(&d);
    assert!(!report.passes);
    assert_eq!(report.failures, ["R4"]);
    assert!(report.render().contains("R4: nonfalsifiable"));

    let g = HappySet::new(&m, set(&["g"])).unwrap();
    let d = designate(&m, &g, &rs).unwrap();
    assert_eq!(
        render_designated(&d),
        ["req R1: when requested(x) then ordered(x) within 2 days"]
    );
    assert!(check_designated(&d).passes);

    assert!(matches!(
        HappySet::new(&m, set(&["o"])),
        Err(GoalError::NotAHappySet(_))
    ));
}

#[test]
fn designation_requires_a_happy_set_and_references() {
    let rs = parse_requirements("req R1: when a(x) then b(x) within 1 days").unwrap();
    let m = parse_goal_model(SOFTGOAL_CONFLICT).unwrap();
    let h = HappySet::new(&m, set(&["g'"])).unwrap();
    assert!(matches!(
        designate(&m, &h, &rs),
        Err(GoalError::NotAHappySet(_))
    ));
    let m = parse_goal_model(OR_CHOICE).unwrap();
    let h = HappySet::new(&m, set(&["g''"])).unwrap();
    assert!(matches!(
        designate(&m, &h, &rs),
        Err(GoalError::UnresolvedRequirement { .. })
    ));
    let m = parse_goal_model("goal g mandatory").unwrap();
    let h = HappySet::new(&m, set(&["g"])).unwrap();
    assert!(matches!(
        designate(&m, &h, &rs),
        Err(GoalError::MissingRequirementRef(_))
    ));
}

#[test]
fn empty_designation_passes() {
    let d = DesignatedSet {
        requirements: RequirementSet::default(),
    };
    assert!(check_designated(&d).passes);
}

/// Random acyclic models: goal `i` may only decompose into goals `> i`.
fn arb_model() -> impl proptest::strategy::Strategy<Value = GoalModel> {
    (2usize..9, any::<u64>()).prop_map(|(n, seed)| {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut goals: Vec<Goal> = (0..n).map(|i| Goal::hard(&format!("n{i}"))).collect();
        let mut decompositions = Vec::new();
        let mut is_child = vec![false; n];
        for i in 0..n {
            if rng.gen_bool(0.4) && i + 1 < n {
                let children: Vec<usize> = (i + 1..n).filter(|_| rng.gen_bool(0.5)).collect();
                if !children.is_empty() {
                    for &c in &children {
                        is_child[c] = true;
                    }
                    decompositions.push(Decomposition {
                        parent: format!("n{i}"),
                        kind: if rng.gen_bool(0.5) {
                            DecompositionKind::And
                        } else {
                            DecompositionKind::Or
                        },
                        children: children.iter().map(|c| format!("n{c}")).collect(),
                    });
                }
            }
        }
        for (i, g) in goals.iter_mut().enumerate() {
            if !is_child[i] {
                match rng.gen_range(0..3) {
                    0 => g.mandatory = true,
                    1 => g.optional = true,
                    _ => {}
                }
            }
        }
        GoalModel::new(goals, decompositions, Vec::new(), Vec::new()).unwrap()
    })
}

/// Independent oracle: evaluates goals by recursion over the decomposition
/// map rather than the compiled topological order.
fn oracle_true(m: &GoalModel, adoption: &BTreeSet<String>, id: &str) -> bool {
    match m.decompositions.get(id) {
        None => adoption.contains(id),
        Some(d) => {
            let mut values = d.children.iter().map(|c| oracle_true(m, adoption, c));
            match d.kind {
                DecompositionKind::And => values.all(|v| v),
                DecompositionKind::Or => values.any(|v| v),
            }
        }
    }
}

fn oracle_variants(m: &GoalModel) -> BTreeSet<BTreeSet<String>> {
    let leaves = m.leaves();
    (0u32..1 << leaves.len())
        .map(|mask| {
            leaves
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, l)| l.clone())
                .collect::<BTreeSet<String>>()
        })
        .filter(|a| {
            m.goals()
                .filter(|g| g.mandatory)
                .all(|g| oracle_true(m, a, &g.id))
        })
        .collect()
}

proptest! {
    #[test]
    fn variants_match_exhaustive_oracle(m in arb_model()) {
        prop_assert!(m.leaves().len() <= 12);
        let v = variants(&m);
        prop_assert_eq!(&v, &oracle_variants(&m));
        prop_assert_eq!(&v, &variants_with(crate::Strategy::Sequential, &m));
    }

    #[test]
    fn happy_sets_are_variants_meeting_mandatory_roots(m in arb_model()) {
        let hs = happy_sets(&m).unwrap();
        let v = variants(&m);
        for h in &hs.sets {
            prop_assert!(v.contains(h.leaves()));
            let values = propagate(&m, h.leaves()).unwrap();
            for g in m.goals().filter(|g| g.mandatory) {
                prop_assert!(values[&g.id]);
            }
        }
    }

    #[test]
    fn optional_root_leaves_are_monotone(m in arb_model()) {
        let hs = happy_sets(&m).unwrap();
        let optional_leaves: Vec<&Goal> = m
            .roots()
            .into_iter()
            .filter(|g| g.optional && m.leaves().contains(&g.id))
            .collect();
        for h in &hs.sets {
            for o in &optional_leaves {
                let mut bigger = h.leaves().clone();
                bigger.insert(o.id.clone());
                prop_assert!(hs.contains(&bigger));
            }
        }
    }
}
