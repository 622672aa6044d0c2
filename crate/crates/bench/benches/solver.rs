use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use et6_bench::acoustic;
use et6_core::{hyperbolic_step, relaxation_step_exact, run_scenario, Model, Scheme};

fn solver(c: &mut Criterion) {
    let sc = acoustic(400, 1e-3);
    let grid = sc.initial_grid().unwrap();
    let dt = 1e-3;

    for scheme in [Scheme::Rusanov, Scheme::Muscl] {
        c.bench_function(&format!("{scheme:?} step, 400 cells"), |b| {
            b.iter(|| hyperbolic_step(black_box(&grid), dt, &sc.gas, scheme, Model::Et6).unwrap())
        });
    }
    c.bench_function("exact relaxation, 400 cells", |b| {
        b.iter(|| relaxation_step_exact(black_box(&grid), dt, &sc.gas).unwrap())
    });

    let mut group = c.benchmark_group("scenario");
    group.sample_size(10);
    group.bench_function("acoustic wave, 200 cells to t = 0.1", |b| {
        b.iter_batched(
            || {
                let mut sc = acoustic(200, 1e-3);
                sc.t_end = 0.1;
                sc
            },
            |sc| run_scenario(&sc).unwrap(),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

criterion_group!(benches, solver);
criterion_main!(benches);
