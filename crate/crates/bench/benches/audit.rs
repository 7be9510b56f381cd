use criterion::{criterion_group, criterion_main, Criterion};

use taskdiff_bench::random_scenario;
use taskdiff_core::audit::{Coverage, MicroSuite, TrueTypes};
use taskdiff_core::{bundled, check_ic, check_lemmas, rat, DeviationGrid, Mechanism, MechanismKind};

fn ic_search(c: &mut Criterion) {
    let mut group = c.benchmark_group("check_ic");
    group.sample_size(10);
    let pev = Mechanism::new(MechanismKind::Pev);
    let (scenario, _) = bundled::load("example2").unwrap();
    let grid = DeviationGrid::standard(&scenario, rat(1, 4), 0);
    group.bench_function("example2/step_1_4", |b| b.iter(|| check_ic(&scenario, pev, &grid)));
    group.finish();
}

fn lemmas(c: &mut Criterion) {
    let (scenario, _) = random_scenario(9, 3);
    let pev = Mechanism::new(MechanismKind::Pev);
    c.bench_function("check_lemmas/9_agents", |b| {
        b.iter(|| check_lemmas(&scenario, pev, rat(1, 10)))
    });
}

fn micro_suite(c: &mut Criterion) {
    let mut group = c.benchmark_group("micro_suite");
    group.sample_size(10);
    let suite = MicroSuite {
        agents: 2,
        step: rat(1, 4),
        true_types: TrueTypes::All,
        coverage: Coverage::Sampled {
            scenarios: 500,
            seed: 0,
        },
    };
    let pev = Mechanism::new(MechanismKind::Pev);
    group.bench_function("two_agents/500", |b| b.iter(|| suite.run(pev)));
    group.finish();
}

criterion_group!(benches, ic_search, lemmas, micro_suite);
criterion_main!(benches);
