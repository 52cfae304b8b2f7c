use std::hint::black_box;

use amrtriad::fde::{CaputoProblem, integrate_caputo};
use amrtriad::sde::{IncrementRule, simulate_ensemble_with};
use amrtriad::{Execution, ModelParams, TimeGrid};
use criterion::{BenchmarkId, Criterion, criterion_group, criterion_main};

fn ensembles(c: &mut Criterion) {
    let p = ModelParams::table(0.0, 1e-7, 1.0);
    let grid = TimeGrid::span(50.0, 0.01).unwrap().with_stride(10).unwrap();
    let mut group = c.benchmark_group("ensemble");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        for n_paths in [16usize, 128] {
            group.bench_with_input(
                BenchmarkId::new(format!("{exec:?}"), n_paths),
                &n_paths,
                |b, &n| {
                    b.iter(|| {
                        simulate_ensemble_with(
                            &p,
                            1.0,
                            &grid,
                            n,
                            1,
                            IncrementRule::GaussianInverseCdf,
                            exec,
                        )
                        .unwrap()
                    })
                },
            );
        }
    }
    group.finish();
}

fn increments(c: &mut Criterion) {
    let p = ModelParams::table(0.0, 1e-7, 1.0);
    let grid = TimeGrid::span(50.0, 0.01).unwrap().with_stride(10).unwrap();
    let mut group = c.benchmark_group("increment rule");
    group.sample_size(10);
    for rule in [IncrementRule::GaussianInverseCdf, IncrementRule::BoxMuller] {
        group.bench_function(format!("{rule:?}"), |b| {
            b.iter(|| {
                simulate_ensemble_with(&p, 1.0, &grid, 16, 1, rule, Execution::Sequential).unwrap()
            })
        });
    }
    group.finish();
}

fn fractional(c: &mut Criterion) {
    let mut group = c.benchmark_group("caputo");
    group.sample_size(10);
    for n_steps in [1_000usize, 10_000] {
        let grid = TimeGrid::span(n_steps as f64 * 0.01, 0.01).unwrap();
        let prob = CaputoProblem::new(ModelParams::table(0.2, 0.0, 0.7), 1.0, grid);
        group.bench_with_input(BenchmarkId::from_parameter(n_steps), &prob, |b, prob| {
            b.iter(|| integrate_caputo(black_box(prob)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, ensembles, increments, fractional);
criterion_main!(benches);
