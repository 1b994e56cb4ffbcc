use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use qmms_core::compactness::{frechet_certify, FrechetOptions};
use qmms_core::generators::{generate, random_euclidean, uniform_grid, GeneratorSpec};
use qmms_core::geometry::{doubling_constant, greedy_separated, integrability_functional};
use qmms_core::norms::{min_gradient_besov, min_gradient_sobolev};
use qmms_core::regularize::chain_metric;

fn geometry(c: &mut Criterion) {
    let dense = random_euclidean(128, 2, 1).unwrap();
    c.bench_function("chain_metric n=128", |b| b.iter(|| chain_metric(black_box(&dense), 0.7).unwrap()));
    c.bench_function("greedy_separated n=128", |b| b.iter(|| greedy_separated(black_box(&dense), 0.1).unwrap()));
    let line = generate(&GeneratorSpec::new("exp_density", &[("beta", 0.5), ("T", 10.0), ("resolution", 1e4)])).unwrap().space;
    c.bench_function("doubling_constant line n=1e5", |b| b.iter(|| doubling_constant(black_box(&line), 2.0, 0.5).unwrap()));
    c.bench_function("integrability_functional line n=1e5", |b| b.iter(|| integrability_functional(black_box(&line), 1.0)));
}

fn norms(c: &mut Criterion) {
    let s = random_euclidean(10, 2, 2).unwrap();
    let u: Vec<f64> = (0..10).map(|i| (i as f64 * 0.7).sin()).collect();
    c.bench_function("sobolev p=1.5 n=10", |b| b.iter(|| min_gradient_sobolev(black_box(&s), &u, 0.8, 1.5).unwrap()));
    c.bench_function("besov p=2 q=1 n=10", |b| b.iter(|| min_gradient_besov(black_box(&s), &u, 0.8, 2.0, 1.0).unwrap()));
}

fn certificates(c: &mut Criterion) {
    let s = uniform_grid(64, 1.0).unwrap();
    let family: Vec<Vec<f64>> = (1..=8).map(|k| (0..64).map(|i| (k as f64 * i as f64 / 64.0).sin()).collect()).collect();
    c.bench_function("frechet_certify grid n=64 x 8", |b| {
        b.iter(|| frechet_certify(black_box(&s), &family, 0.1, 64, &FrechetOptions::default()).unwrap())
    });
}

criterion_group!(benches, geometry, norms, certificates);
criterion_main!(benches);
