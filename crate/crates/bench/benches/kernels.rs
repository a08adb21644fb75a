//! Timings for the three kernels every experiment leans on: fiber root
//! solving, surface sampling and the neighbour graph.

use criterion::{criterion_group, criterion_main, Criterion};
use singlab_core::metric::{build_graph, DEFAULT_K_NN};
use singlab_core::sampling::{sample_ball, RegionKind, RegionSpec};
use singlab_core::{briancon_speder, Complex64};
use std::hint::black_box;

fn solve_fiber(c: &mut Criterion) {
    let s = briancon_speder(Complex64::new(1.0, 0.0));
    let (y, z) = (Complex64::new(0.3, -0.2), Complex64::new(0.1, 0.25));
    c.bench_function("solve_fiber quintic", |b| b.iter(|| s.solve_fiber(black_box(y), black_box(z)).unwrap()));
}

fn sampling(c: &mut Criterion) {
    let s = briancon_speder(Complex64::new(1.0, 0.0));
    let ball = RegionSpec::new(RegionKind::Ball, 0.1, 1.0, Vec::new()).unwrap();
    let wedge = RegionSpec::new(RegionKind::ThinWedge, 0.1, 0.1, Vec::new()).unwrap();
    let mut g = c.benchmark_group("sample_ball");
    g.sample_size(20);
    g.bench_function("ball n=2000", |b| b.iter(|| sample_ball(&s, 0.1, 2000, &ball, black_box(7)).unwrap()));
    g.bench_function("thin wedge n=2000", |b| b.iter(|| sample_ball(&s, 0.1, 2000, &wedge, black_box(7)).unwrap()));
    g.finish();
}

fn graph(c: &mut Criterion) {
    let s = briancon_speder(Complex64::new(1.0, 0.0));
    let ball = RegionSpec::new(RegionKind::Ball, 0.1, 1.0, Vec::new()).unwrap();
    let cloud = sample_ball(&s, 0.1, 3000, &ball, 11).unwrap();
    let mut g = c.benchmark_group("build_graph");
    g.sample_size(20);
    g.bench_function("k-nn graph n=3000", |b| b.iter(|| build_graph(black_box(&cloud), DEFAULT_K_NN)));
    g.finish();
}

criterion_group!(kernels, solve_fiber, sampling, graph);
criterion_main!(kernels);
