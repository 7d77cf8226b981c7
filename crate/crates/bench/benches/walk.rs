use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use erw_bench::{params, table, MEMORY_PARAMETERS};
use erw_core::rng::replicate_rng;
use erw_core::{
    build_coeffs, exact_pmf, run_ensemble_threads, sample_path_markov, sample_path_memory,
    SamplerKind, SimulationPlan,
};

fn coefficients(c: &mut Criterion) {
    let mut group = c.benchmark_group("coeffs");
    for n in [10_000usize, 1_000_000] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| build_coeffs(black_box(0.6), n).unwrap())
        });
    }
    group.finish();
}

fn exact_dp(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact_pmf");
    group.sample_size(10);
    for n in [1_000usize, 10_000] {
        let t = table(0.25, n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| exact_pmf(&params(0.25, n), &t).unwrap())
        });
    }
    group.finish();
}

fn samplers(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_path");
    let n = 10_000;
    for p in MEMORY_PARAMETERS {
        let prm = params(p, n);
        group.bench_with_input(BenchmarkId::new("markov", p), &prm, |b, prm| {
            let mut rng = replicate_rng(1, 0);
            b.iter(|| sample_path_markov(prm, &mut rng))
        });
        group.bench_with_input(BenchmarkId::new("memory", p), &prm, |b, prm| {
            let mut rng = replicate_rng(1, 0);
            b.iter(|| sample_path_memory(prm, &mut rng))
        });
    }
    group.finish();
}

fn ensemble(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_ensemble");
    group.sample_size(10);
    for sampler in [SamplerKind::Markov, SamplerKind::Memory] {
        let plan = SimulationPlan::new(params(0.75, 1_000), 10_000, 7, sampler).unwrap();
        group.bench_function(sampler.as_str(), |b| {
            b.iter(|| run_ensemble_threads(&plan, None).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, coefficients, exact_dp, samplers, ensemble);
criterion_main!(benches);
