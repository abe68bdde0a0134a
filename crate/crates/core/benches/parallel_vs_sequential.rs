//! Parallel vs single-worker timings of the two hot loops: direct quadrature
//! of a non-linear phase and a power-iteration norm estimate.
//!
//! The single-worker runs go through a one-thread pool. Building with
//! `--no-default-features` replaces every parallel loop by a plain one.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fiolab_core::bounds::Exponent;
use fiolab_core::exec::{available_workers, with_threads};
use fiolab_core::normlab::estimate_operator_norm;
use fiolab_core::numgrid::{make_grid, SampledField};
use fiolab_core::oscint::{apply_fio, OperatorSpec};
use fiolab_core::symbols::builtins::{bump_multiplier, wave_phase};
use fiolab_core::Complex64;

fn worker_counts() -> Vec<usize> {
    let mut counts = vec![1, available_workers()];
    counts.dedup();
    counts
}

fn direct_quadrature(c: &mut Criterion) {
    let grid = make_grid(1, 512, 16.0).unwrap();
    let spec = OperatorSpec::new(bump_multiplier(1, 6.0), wave_phase(1).unwrap(), grid);
    let f = SampledField::from_fn(grid, |x| Complex64::new((-x[0] * x[0]).exp(), 0.0));
    let mut group = c.benchmark_group("direct_quadrature");
    group.sample_size(10);
    for workers in worker_counts() {
        group.bench_with_input(BenchmarkId::from_parameter(workers), &workers, |b, &w| {
            b.iter(|| with_threads(Some(w), || apply_fio(black_box(&spec), black_box(&f)).unwrap()).unwrap())
        });
    }
    group.finish();
}

fn power_iteration(c: &mut Criterion) {
    let grid = make_grid(1, 256, 8.0).unwrap();
    let spec = OperatorSpec::new(bump_multiplier(1, 12.0), wave_phase(1).unwrap(), grid);
    let two = Exponent::new(2.0).unwrap();
    let mut group = c.benchmark_group("power_iteration");
    group.sample_size(10);
    for workers in worker_counts() {
        group.bench_with_input(BenchmarkId::from_parameter(workers), &workers, |b, &w| {
            b.iter(|| with_threads(Some(w), || estimate_operator_norm(black_box(&spec), two, two, 0, 1).unwrap()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, direct_quadrature, power_iteration);
criterion_main!(benches);
