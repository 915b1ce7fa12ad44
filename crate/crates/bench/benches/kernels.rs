use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use qcycle_core::{
    build_brayton, build_carnot, isobaric_schedule, partition_function, run_cycle_sampled,
    NumericsPolicy, SpectrumModel, SubstanceKind,
};

fn partition(c: &mut Criterion) {
    let policy = NumericsPolicy::default();
    let mut group = c.benchmark_group("partition_function");
    for kind in [
        SubstanceKind::Box1D,
        SubstanceKind::CavityMode,
        SubstanceKind::Box3D,
        SubstanceKind::Harmonic3D,
    ] {
        let model = SpectrumModel::new(kind);
        for x in [1e-2, 0.1, 3.0] {
            let beta = x / model.energy_scale(1.0);
            group.bench_with_input(BenchmarkId::new(kind.name(), x), &beta, |b, &beta| {
                b.iter(|| partition_function(&model, black_box(beta), 1.0, &policy).unwrap())
            });
        }
    }
    group.finish();
}

fn schedule(c: &mut Criterion) {
    let policy = NumericsPolicy::default();
    let mut group = c.benchmark_group("isobaric_schedule");
    let cavity = SpectrumModel::cavity(1.0).unwrap();
    group.bench_function("cavity closed form", |b| {
        b.iter(|| isobaric_schedule(&cavity, black_box(2.0), 1.3, &policy).unwrap())
    });
    let boxed = SpectrumModel::box_1d();
    for length in [1.0, 100.0] {
        group.bench_with_input(
            BenchmarkId::new("box1d root solve", length),
            &length,
            |b, &l| b.iter(|| isobaric_schedule(&boxed, black_box(20.0), l, &policy).unwrap()),
        );
    }
    group.finish();
}

fn cycles(c: &mut Criterion) {
    let policy = NumericsPolicy::default();
    let mut group = c.benchmark_group("run_cycle");
    group.sample_size(10);
    let cavity = SpectrumModel::cavity(1.0).unwrap();
    let brayton = build_brayton(&cavity, 4.0, 1.0, 1.0, 2.0, &policy).unwrap();
    group.bench_function("cavity brayton", |b| {
        b.iter(|| run_cycle_sampled(&brayton, 16, &policy).unwrap())
    });
    let spin = SpectrumModel::spin_half();
    let carnot = build_carnot(&spin, 2.0, 1.0, 1.0, 2.0, &policy).unwrap();
    group.bench_function("spin carnot", |b| {
        b.iter(|| run_cycle_sampled(&carnot, 16, &policy).unwrap())
    });
    let boxed = SpectrumModel::box_1d();
    let box_brayton = build_brayton(&boxed, 80.0, 10.0, 1.0, 1.5, &policy).unwrap();
    group.bench_function("box1d brayton", |b| {
        b.iter(|| run_cycle_sampled(&box_brayton, 16, &policy).unwrap())
    });
    group.finish();
}

criterion_group!(benches, partition, schedule, cycles);
criterion_main!(benches);
