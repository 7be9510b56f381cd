use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use taskdiff_bench::{point_mass_scenario, random_scenario};
use taskdiff_core::{build_graph, bundled, rat, run_trials, AgentId, Mechanism, MechanismKind};

fn example2(c: &mut Criterion) {
    let (scenario, reports) = bundled::load("example2").unwrap();
    let pev = Mechanism::new(MechanismKind::Pev);
    c.bench_function("pev/example2", |b| {
        b.iter(|| pev.run(black_box(&scenario), black_box(&reports)))
    });
}

fn scaling(c: &mut Criterion) {
    let mut group = c.benchmark_group("mechanism_run");
    for agents in [10, 100, 1000] {
        let (scenario, reports) = point_mass_scenario(agents, 1, rat(5, 1));
        for kind in [
            MechanismKind::Pev,
            MechanismKind::Idm,
            MechanismKind::Qaidm,
            MechanismKind::Vcg,
        ] {
            let mech = Mechanism::new(kind);
            group.bench_with_input(BenchmarkId::new(kind.name(), agents), &agents, |b, _| {
                b.iter(|| mech.run(&scenario, &reports).unwrap())
            });
        }
    }
    group.finish();
}

fn critical_sequence(c: &mut Criterion) {
    let mut group = c.benchmark_group("critical_sequence");
    for agents in [10, 100, 1000] {
        let (scenario, reports) = random_scenario(agents, 2);
        let graph = build_graph(&scenario, &reports).unwrap();
        let target = AgentId(agents as u32);
        group.bench_with_input(BenchmarkId::new("node_deletion", agents), &agents, |b, _| {
            b.iter(|| graph.critical_sequence(target).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("dominators", agents), &agents, |b, _| {
            b.iter(|| graph.critical_sequence_fast(target).unwrap())
        });
    }
    group.finish();
}

fn trials(c: &mut Criterion) {
    let (scenario, reports) = bundled::load("example2").unwrap();
    let pev = Mechanism::new(MechanismKind::Pev);
    c.bench_function("run_trials/example2/10000", |b| {
        b.iter(|| run_trials(&scenario, &reports, pev, 10_000, 7).unwrap())
    });
}

criterion_group!(benches, example2, scaling, critical_sequence, trials);
criterion_main!(benches);
