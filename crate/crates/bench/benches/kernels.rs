use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use walkbell_core::*;

fn bench_walk(c: &mut Criterion) {
    let mut group = c.benchmark_group("walk_evolve");
    for &t in &[20usize, 60, 200] {
        group.bench_with_input(BenchmarkId::from_parameter(t), &t, |b, &t| {
            let coin = coin_state_from_direction([0.0, 1.0, 0.0]).unwrap();
            let start = LatticeState::localized(t, coin.0, coin.1).unwrap();
            b.iter(|| black_box(&start).evolve(t).unwrap());
        });
    }
    group.finish();
}

fn bench_schmidt(c: &mut Criterion) {
    let coin = coin_state_from_direction([0.0, 0.0, -1.0]).unwrap();
    let state = LatticeState::localized(60, coin.0, coin.1)
        .unwrap()
        .evolve(60)
        .unwrap();
    c.bench_function("schmidt_decompose_t60", |b| {
        b.iter(|| schmidt_decompose(black_box(&state)).unwrap());
    });
}

fn bench_joint_table(c: &mut Criterion) {
    let t = 60;
    let prep = BlochVector::new(0.3, 1.2, -0.5).unwrap();
    let ensemble = signed_decomposition(&prep).evolve(t, t).unwrap();
    let a0 = CoinObservable::new([0.0, 0.0, 1.0]).unwrap();
    let a1 = CoinObservable::new([1.0, 0.0, 0.0]).unwrap();

    let b0 = sign_binning(t, 1);
    let b1 = threshold_binning(t, 36).unwrap();
    c.bench_function("joint_table_binned_t60", |b| {
        b.iter(|| joint_table(black_box(&ensemble), &a0, &a1, &b0, &b1, 1e-9).unwrap());
    });

    let bench = build_benchmark(t, (0.843, 0.538), 0.005).unwrap();
    let e0 = WalkerObservable::Embedded(bench.settings.bob[0].clone());
    let e1 = WalkerObservable::Embedded(bench.settings.bob[1].clone());
    c.bench_function("joint_table_embedded_t60", |b| {
        b.iter(|| joint_table(black_box(&ensemble), &a0, &a1, &e0, &e1, 1e-9).unwrap());
    });
}

criterion_group!(kernels, bench_walk, bench_schmidt, bench_joint_table);
criterion_main!(kernels);
