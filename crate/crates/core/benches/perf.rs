//! Criterion benches: distribution algebra, full solves on the built-in
//! instances, and the sequential-vs-rayon paths of the Monte-Carlo oracle
//! and the batch harness.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lotsched::{gen, harness, mc, search, Parallelism, SolveOptions};
use std::hint::black_box;

fn bench_convolution(c: &mut Criterion) {
    let unit = lotsched::DiscreteDistribution::truncated_normal(20.0, 2.0, 0.25).unwrap();
    c.bench_function("dist/self_convolve_11", |b| {
        b.iter(|| {
            let mut acc = unit.clone();
            for _ in 1..11 {
                acc = acc.convolve(black_box(&unit)).unwrap();
            }
            acc
        })
    });
}

fn bench_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    let two = gen::example_two_orders(1.0, 3.0);
    group.bench_function("two_orders", |b| {
        b.iter(|| search::solve(black_box(&two), &SolveOptions::default()).unwrap())
    });
    let three = gen::example_three_orders(1.0, 3.0, 2.0);
    group.bench_function("three_orders", |b| {
        b.iter(|| search::solve(black_box(&three), &SolveOptions::default()).unwrap())
    });
    let nova = gen::generate(&gen::GenSpec {
        n_orders: 6,
        target_capacity: 1.10,
        seed: 2,
        ..gen::GenSpec::default()
    })
    .unwrap();
    group.sample_size(10);
    group.bench_function("nova_six_orders", |b| {
        b.iter(|| search::solve(black_box(&nova), &SolveOptions::default()).unwrap())
    });
    group.finish();
}

fn bench_monte_carlo(c: &mut Criterion) {
    let problem = gen::example_two_orders(1.0, 1.0);
    let ops = gen::x_first_schedule(&problem);
    let mut group = c.benchmark_group("mc_simulate_20k");
    for (label, parallelism) in [
        ("sequential", Parallelism::Sequential),
        ("rayon", Parallelism::Auto),
    ] {
        group.bench_with_input(BenchmarkId::from_parameter(label), &parallelism, |b, &p| {
            b.iter(|| mc::simulate_with(&ops, &problem, 20_000, 7, p).unwrap())
        });
    }
    group.finish();
}

fn bench_harness(c: &mut Criterion) {
    let spec = harness::BenchSpec {
        orders: (3, 4),
        capacities: vec![0.95, 1.05],
        per_cell: 2,
        seed: 5,
        ..harness::BenchSpec::default()
    };
    let mut group = c.benchmark_group("harness_4_instances");
    group.sample_size(10);
    for (label, parallelism) in [
        ("sequential", Parallelism::Sequential),
        ("rayon", Parallelism::Auto),
    ] {
        group.bench_with_input(BenchmarkId::from_parameter(label), &parallelism, |b, &p| {
            b.iter(|| harness::run_bench_with(&spec, p))
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_convolution,
    bench_solve,
    bench_monte_carlo,
    bench_harness
);
criterion_main!(benches);
