use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gkb_core::verify::{random_gaussian, sweep_symmetry, SweepConfig};
use gkb_core::{kl, lambert_w, sup_reverse_kl, triangle_bound, Branch};

fn lambert(c: &mut Criterion) {
    let mut g = c.benchmark_group("lambert_w");
    for (name, branch, x) in [
        ("principal_near_branch", Branch::Principal, -0.3678),
        ("principal_large", Branch::Principal, 1e6),
        ("minus_one_mid", Branch::MinusOne, -0.1),
        ("minus_one_tiny", Branch::MinusOne, -1e-200),
    ] {
        g.bench_function(name, |b| b.iter(|| lambert_w(branch, black_box(x)).unwrap()));
    }
    g.finish();
}

fn bounds(c: &mut Criterion) {
    c.bench_function("sup_reverse_kl", |b| b.iter(|| sup_reverse_kl(black_box(0.5)).unwrap()));
    c.bench_function("triangle_bound", |b| b.iter(|| triangle_bound(black_box(0.1), black_box(0.2)).unwrap()));
}

fn divergence(c: &mut Criterion) {
    let mut g = c.benchmark_group("kl");
    for dim in [2usize, 10, 50] {
        let g1 = random_gaussian(dim, 1, (-1.5, 1.5), 1.0).unwrap();
        let g2 = random_gaussian(dim, 2, (-1.5, 1.5), 1.0).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(dim), &dim, |b, _| {
            b.iter(|| kl(black_box(&g1), black_box(&g2)).unwrap())
        });
    }
    g.finish();
}

fn sweep(c: &mut Criterion) {
    let cfg = SweepConfig::default().with_trials(50).with_seed(1);
    let mut g = c.benchmark_group("sweep");
    g.sample_size(10);
    g.bench_function("symmetry_eps0.5_dim5_50", |b| {
        b.iter(|| sweep_symmetry(&[0.5], &[5], black_box(&cfg)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, lambert, bounds, divergence, sweep);
criterion_main!(benches);
