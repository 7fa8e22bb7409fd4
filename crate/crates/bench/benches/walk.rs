use std::hint::black_box;

use corral::analysis::{average_fidelity, BlochGrid};
use corral::{fft_evolve, step, CoinMatrix, GaussianSpec, Walker};
use corral_bench::{corral, packet};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn step_kernel(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    for half in [300i64, 1000, 3000] {
        let state = packet(half);
        let coins = vec![CoinMatrix::hadamard(); state.lattice().size()];
        group.bench_with_input(BenchmarkId::from_parameter(2 * half + 1), &state, |b, s| {
            b.iter(|| step(black_box(s), &coins).unwrap())
        });
    }
    group.finish();
}

fn corral_run(c: &mut Criterion) {
    let schedule = corral(600, 574);
    let state = packet(600);
    c.bench_function("corral 574 steps", |b| {
        b.iter(|| {
            let mut w = Walker::new(state.clone(), schedule.cursor()).unwrap();
            w.run_until(574).unwrap();
            black_box(w.into_state())
        })
    });
}

fn kspace(c: &mut Criterion) {
    let state = packet(600);
    c.bench_function("fft_evolve 200 steps", |b| {
        b.iter(|| fft_evolve(black_box(&state), 200).unwrap())
    });
}

fn coarse_grid(c: &mut Criterion) {
    let schedule = corral(600, 574);
    let grid = BlochGrid::new(2).unwrap();
    let g = GaussianSpec { s: 10.0, center: 0 };
    c.bench_function("coarse grid fidelity", |b| {
        b.iter(|| average_fidelity(&schedule, g, &grid, 574, 0).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = step_kernel, corral_run, kspace, coarse_grid
}
criterion_main!(benches);
