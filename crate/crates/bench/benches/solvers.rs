use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gsw_core::kwsolver::{solve, KwOptions, KwProblem};
use gsw_core::monopole::{critical_t, extract_divisor, holomorphic_data, residuals, solve_hk};
use gsw_core::suite::{run_suite, SuiteOptions};
use gsw_core::TorusGrid;
use std::f64::consts::PI;
use std::hint::black_box;

fn kw(c: &mut Criterion) {
    let mut group = c.benchmark_group("kw_constant");
    for n in [32usize, 64, 128] {
        let grid = TorusGrid::uniform(2, n, 2.0 * PI).unwrap();
        let prob = KwProblem::constant(&grid, 1.0, 2.0);
        group.bench_with_input(BenchmarkId::from_parameter(n), &prob, |b, p| {
            b.iter(|| solve(black_box(p), &KwOptions::with_tol(1e-12)).unwrap())
        });
    }
    group.finish();
}

fn vortex(c: &mut Criterion) {
    let grid = TorusGrid::uniform(2, 64, 2.0 * PI).unwrap();
    let mut group = c.benchmark_group("vortex_64");
    group.sample_size(20);
    for d in 1..=3i64 {
        let t = critical_t(d, grid.volume()) + 1.0;
        let holo = holomorphic_data(&grid, d, 1, t, false, 0).unwrap();
        group.bench_with_input(BenchmarkId::new("solve", d), &holo, |b, h| {
            b.iter(|| solve_hk(black_box(h), 1e-8).unwrap())
        });
        let sol = solve_hk(&holo, 1e-8).unwrap().config;
        group.bench_with_input(BenchmarkId::new("residuals", d), &sol, |b, s| {
            b.iter(|| residuals(black_box(s)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("divisor", d), &sol, |b, s| {
            b.iter(|| extract_divisor(black_box(s)).unwrap())
        });
    }
    group.finish();
}

fn invariants(c: &mut Criterion) {
    let mut group = c.benchmark_group("invariant_suite");
    group.sample_size(10);
    group.bench_function("serial", |b| b.iter(|| run_suite(&SuiteOptions::default())));
    group.bench_function("jobs4", |b| {
        b.iter(|| {
            run_suite(&SuiteOptions {
                jobs: 4,
                ..SuiteOptions::default()
            })
        })
    });
    group.finish();
}

criterion_group!(benches, kw, vortex, invariants);
criterion_main!(benches);
