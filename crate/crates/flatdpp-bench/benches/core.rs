use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use flatdpp::sampling::{sample_dpp, sample_fixed_dpp};
use flatdpp::{enumerate_pmf, fixed_limit, rng_from_seed, KernelMinors, KernelSpec};
use flatdpp_bench::{ground_set, kernel_pair};
use std::hint::black_box;

fn enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("enumerate_pmf");
    for n in [8, 12] {
        let nnp = kernel_pair(n, 2);
        group.bench_with_input(BenchmarkId::from_parameter(n), &nnp, |b, nnp| {
            b.iter(|| enumerate_pmf(black_box(nnp), None).unwrap())
        });
    }
    group.finish();
}

fn samplers(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample");
    for n in [20, 100] {
        let nnp = kernel_pair(n, 2);
        let mut rng = rng_from_seed(1);
        group.bench_with_input(BenchmarkId::new("varying", n), &nnp, |b, nnp| {
            b.iter(|| sample_dpp(black_box(nnp), &mut rng).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("fixed", n), &nnp, |b, nnp| {
            b.iter(|| sample_fixed_dpp(black_box(nnp), 6, &mut rng).unwrap())
        });
    }
    group.finish();
}

fn limits(c: &mut Criterion) {
    let gs = ground_set(10, 2);
    let mut group = c.benchmark_group("fixed_limit");
    for kernel in [KernelSpec::gaussian(), KernelSpec::matern52()] {
        group.bench_function(kernel.name().to_string(), |b| {
            b.iter(|| fixed_limit(&kernel, black_box(&gs), 5).unwrap())
        });
    }
    group.finish();
}

fn minors(c: &mut Criterion) {
    let gs = ground_set(6, 2);
    let kernel = KernelSpec::gaussian();
    let mut group = c.benchmark_group("kernel_minors");
    group.sample_size(10);
    for eps in [1e-1, 1e-3] {
        group.bench_with_input(BenchmarkId::from_parameter(eps), &eps, |b, &eps| {
            b.iter(|| KernelMinors::new(&kernel, black_box(&gs), eps).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, enumeration, samplers, limits, minors);
criterion_main!(benches);
