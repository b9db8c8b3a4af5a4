use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use orthokalman::scenarios::{random_orthogonal, Noise};
use orthokalman::{Covariance, Evolution, Kalman, Observation};

/// Random orthogonal evolutions and observations of dimension `n`.
fn model(n: usize, steps: usize) -> Vec<(Evolution, Observation)> {
    let mut noise = Noise::new(0);
    (0..steps)
        .map(|_| {
            let f = random_orthogonal(&mut noise, n);
            let g = random_orthogonal(&mut noise, n);
            let o = noise.normal_vec(n, 1.0);
            (
                Evolution::new(n, None, f, vec![0.0; n], Covariance::identity(n)),
                Observation::new(g, o, Covariance::identity(n)),
            )
        })
        .collect()
}

fn primed(first: &Observation) -> Kalman {
    let mut kf = Kalman::new();
    kf.observe(Some(first)).unwrap();
    kf
}

/// One evolve, observe and filtered estimate, keeping a 16-step window.
fn filter_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("filter_step");
    for n in [6, 48] {
        let steps = model(n, 256);
        let mut kf = primed(&steps[0].1);
        let mut k = 0;
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| {
                let (e, o) = &steps[k % steps.len()];
                kf.evolve(e).unwrap();
                kf.observe(Some(o)).unwrap();
                black_box(kf.estimate_latest().unwrap());
                k += 1;
                if k >= 16 {
                    kf.forget(k - 16).unwrap();
                }
            })
        });
    }
    group.finish();
}

/// Smoothing a filtered history of 1000 steps.
fn smooth(c: &mut Criterion) {
    let mut group = c.benchmark_group("smooth_1000");
    group.sample_size(20);
    for n in [6, 48] {
        let steps = model(n, 1000);
        let mut kf = primed(&steps[0].1);
        for (e, o) in &steps[1..] {
            kf.evolve(e).unwrap();
            kf.observe(Some(o)).unwrap();
        }
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter_batched(
                || kf.clone(),
                |mut kf| {
                    kf.smooth().unwrap();
                    kf
                },
                BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, filter_step, smooth);
criterion_main!(benches);
