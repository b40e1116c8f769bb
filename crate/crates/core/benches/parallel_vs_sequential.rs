use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reqkit::goals::{variants_with, Decomposition, DecompositionKind, Goal, GoalModel};
use reqkit::language::parse_requirements;
use reqkit::monitor::{monitor_set_with, Event, Trace};
use reqkit::switching::{
    build_machine_switching, build_mode_switching, equivalent_with, flatten, Condition, Literal,
    MachineId, SwitchingSystem,
};
use reqkit::Strategy;

const STRATEGIES: [(&str, Strategy); 2] = [
    ("sequential", Strategy::Sequential),
    ("parallel", Strategy::Parallel),
];

/// Modes split on the first two variables; each inner system splits on
/// the next `depth` variables, so every valuation is covered.
fn wide_mode_system(n: usize, depth: usize) -> reqkit::switching::ModeSwitchingSystem {
    let vars: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let lit = |i: usize, positive: bool| Literal {
        var: vars[i].clone(),
        positive,
    };
    let mut modes = Vec::new();
    for m in 0..4usize {
        let e = Condition::new([lit(0, m & 1 == 1), lit(1, m & 2 == 2)]);
        let pairs = (0..1usize << depth)
            .map(|j| {
                let k = Condition::new((0..depth).map(|b| lit(2 + b, j >> b & 1 == 1)));
                (k, MachineId::new(&format!("S{m}_{j}")))
            })
            .collect();
        modes.push((e, build_machine_switching(&vars, pairs).unwrap().0));
    }
    build_mode_switching(&vars, modes).unwrap().0
}

fn bench_equivalence(c: &mut Criterion) {
    let mut group = c.benchmark_group("equivalence_sweep");
    group.sample_size(10);
    for n in [12usize, 16, 20] {
        let ms = wide_mode_system(n, 4);
        let flat = flatten(&ms);
        for (name, s) in STRATEGIES {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| equivalent_with(s, black_box(&flat), black_box(&ms), ms.vars()).unwrap())
            });
        }
    }
    group.finish();
}

/// A root OR over `leaves / 2` AND pairs of leaves.
fn wide_goal_model(leaves: usize) -> GoalModel {
    let mut goals = vec![Goal::hard("root").mandatory()];
    let mut decompositions = Vec::new();
    let mut mids = Vec::new();
    for p in 0..leaves / 2 {
        let mid = format!("m{p}");
        let children = vec![format!("l{}", 2 * p), format!("l{}", 2 * p + 1)];
        for c in &children {
            goals.push(Goal::hard(c));
        }
        goals.push(Goal::hard(&mid));
        decompositions.push(Decomposition {
            parent: mid.clone(),
            kind: DecompositionKind::And,
            children,
        });
        mids.push(mid);
    }
    decompositions.push(Decomposition {
        parent: "root".into(),
        kind: DecompositionKind::Or,
        children: mids,
    });
    GoalModel::new(goals, decompositions, Vec::new(), Vec::new()).unwrap()
}

fn bench_variants(c: &mut Criterion) {
    let mut group = c.benchmark_group("variant_enumeration");
    group.sample_size(10);
    for leaves in [10usize, 13, 16] {
        let m = wide_goal_model(leaves);
        for (name, s) in STRATEGIES {
            group.bench_with_input(BenchmarkId::new(name, leaves), &leaves, |b, _| {
                b.iter(|| variants_with(s, black_box(&m)))
            });
        }
    }
    group.finish();
}

fn bench_monitor_set(c: &mut Criterion) {
    let mut text = String::new();
    for i in 0..64 {
        text += &format!(
            "req B{i}: when requested(x) then ordered(x) within {} days\n",
            i % 5 + 1
        );
        text += &format!("req F{i}: fifo queued(x) -> served(x)\n");
        text += &format!(
            "req W{i}: when requested(x) then ordered(x) within 2 days in at least 60 % of instances per {} days\n",
            i % 30 + 1
        );
    }
    let rs = parse_requirements(&text).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let names = ["requested", "ordered", "queued", "served"];
    let mut t = 0;
    let events: Vec<Event> = (0..20_000)
        .map(|_| {
            t += rng.gen_range(0..30);
            Event {
                name: names[rng.gen_range(0..names.len())].to_string(),
                key: Some(format!("k{}", rng.gen_range(0..500))),
                t,
            }
        })
        .collect();
    let tr = Trace::new(events, Vec::new(), t + 10_000).unwrap();
    let mut group = c.benchmark_group("monitor_set");
    group.sample_size(10);
    for (name, s) in STRATEGIES {
        group.bench_function(name, |b| {
            b.iter(|| monitor_set_with(s, black_box(&rs), black_box(&tr)))
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_equivalence,
    bench_variants,
    bench_monitor_set
);
criterion_main!(benches);
