use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gravimean::{analytic, run_ensemble, Forces, GridSpec, SplitStepSolver};
use gravimean_bench::{analytic_setup, grid_setup, smooth_grid_state};
use std::hint::black_box;

fn split_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("split_step");
    for n in [256usize, 1024, 4096] {
        let grid = GridSpec::new(32.0, n, 1e-3).unwrap();
        let mut solver = SplitStepSolver::new(grid);
        let mut state = smooth_grid_state(&grid).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| solver.step(black_box(&mut state), Forces::new(1.0, 0.0)).unwrap())
        });
    }
    group.finish();
}

fn analytic_evolve(c: &mut Criterion) {
    let s0 = gravimean::CoherentTwoBranchState::common_center(0.3, 0.0, 0.0).unwrap();
    c.bench_function("analytic_evolve", |b| {
        b.iter(|| analytic::evolve(black_box(&s0), Forces::new(1.0, 0.2), black_box(7.5), 0.1).unwrap())
    });
}

fn ensembles(c: &mut Criterion) {
    let mut group = c.benchmark_group("ensemble");
    group.sample_size(10);
    let setup = analytic_setup(0.7).unwrap();
    group.bench_function("analytic_1e5", |b| b.iter(|| run_ensemble(&setup, 100_000, 1, 1).unwrap()));
    let setup = grid_setup(0.7, GridSpec::new(16.0, 256, 1e-3).unwrap()).unwrap();
    group.bench_function("grid_n256_10", |b| b.iter(|| run_ensemble(&setup, 10, 1, 1).unwrap()));
    group.finish();
}

criterion_group!(benches, split_step, analytic_evolve, ensembles);
criterion_main!(benches);
