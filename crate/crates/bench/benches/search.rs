use criterion::{criterion_group, criterion_main, Criterion, Throughput};
use std::hint::black_box;
use walkbell_core::*;

fn bench_coarse_trials(c: &mut Criterion) {
    let mut group = c.benchmark_group("coarse_search");
    let n_trials = 200u64;
    group.throughput(Throughput::Elements(n_trials));
    group.bench_function("trials_t60", |b| {
        let cfg = SearchConfig {
            t_steps: 60,
            r_norm: 1.45,
            n_direction_samples: 0,
            n_trials,
            x0_grid: vec![0.6],
            seeds: vec![1],
            tol: 1e-9,
            sign_of_zero: 1,
        };
        b.iter(|| coarse_search(black_box(&cfg)).unwrap());
    });
    group.finish();
}

fn bench_scan_directions(c: &mut Criterion) {
    let bench = build_benchmark(60, (0.843, 0.538), 0.005).unwrap();
    let grid: Vec<f64> = (0..=40).map(|k| k as f64 * 0.05).collect();
    let mut group = c.benchmark_group("magnitude_scan");
    let n_dirs = 100u64;
    group.throughput(Throughput::Elements(n_dirs));
    group.bench_function("directions_t60_full_grid", |b| {
        b.iter(|| {
            benchmark_scan_r(60, &bench.settings, black_box(&grid), n_dirs, 1, 1e-9, 3e-3)
                .unwrap()
        });
    });
    group.finish();
}

criterion_group!(search, bench_coarse_trials, bench_scan_directions);
criterion_main!(search);
