use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use negdep::parallel::Execution;
use negdep::sweep;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn dominance(c: &mut Criterion) {
    let mut g = c.benchmark_group("dominance_sweep_n4");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| black_box(sweep::dominance_sweep(4, 20, 1, exec).unwrap()))
        });
    }
    g.finish();
}

fn hierarchy(c: &mut Criterion) {
    let mut g = c.benchmark_group("hierarchy_sweep");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| black_box(sweep::hierarchy_sweep(40, 4, 2, exec).unwrap()))
        });
    }
    g.finish();
}

fn crs(c: &mut Criterion) {
    let mut g = c.benchmark_group("crs_sweep_rank2");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| black_box(sweep::crs_sweep(4, 2, 10, 3, exec).unwrap()))
        });
    }
    g.finish();
}

fn probing(c: &mut Criterion) {
    let mut g = c.benchmark_group("probing_sweep");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| black_box(sweep::probing_sweep(20, 4, 50, 0.03, 4, exec).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, dominance, hierarchy, crs, probing);
criterion_main!(benches);
