use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use subgrad_core::certifiers::{certify_subregularity, certify_verdier};
use subgrad_core::dynamics::{run_batch, TrialSettings};
use subgrad_core::par::Execution;
use subgrad_core::problems::{ProblemSpec, ReluL1Problem};

fn modes() -> Vec<(&'static str, Execution)> {
    let mut m = vec![("sequential", Execution::Sequential)];
    if Execution::Parallel.is_parallel() {
        m.push(("parallel", Execution::Parallel));
    }
    m
}

fn relu_trials(c: &mut Criterion) {
    let p = ReluL1Problem::new();
    let settings = TrialSettings {
        trials: 100,
        alpha_lo: 0.05,
        alpha_hi: 0.15,
        rel_init_radius: 1e-3,
        eps_escape: 0.5,
        max_iters: 10_000,
        seed: 42,
    };
    let mut g = c.benchmark_group("relu_trials");
    g.sample_size(10);
    for (name, exec) in modes() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| {
                run_batch(&p, black_box(&settings), exec, |o| {
                    o.result.map(|t| t.records.len()).ok()
                })
            })
        });
    }
    g.finish();
}

fn rpca_trials(c: &mut Criterion) {
    let p = ProblemSpec::from_id("rpca").unwrap().build().unwrap();
    let settings = TrialSettings {
        trials: 100,
        alpha_lo: 0.001,
        alpha_hi: 0.01,
        rel_init_radius: 1e-3,
        eps_escape: p.neighborhood_radius(),
        max_iters: 100_000,
        seed: 42,
    };
    let mut g = c.benchmark_group("rpca_trials");
    g.sample_size(10);
    for (name, exec) in modes() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| run_batch(p.as_ref(), black_box(&settings), exec, |o| o.result.is_ok()))
        });
    }
    g.finish();
}

fn certifier_sampling(c: &mut Criterion) {
    let p = ReluL1Problem::new();
    let mut g = c.benchmark_group("certifiers");
    g.sample_size(10);
    for (name, exec) in modes() {
        g.bench_with_input(BenchmarkId::new("verdier_10k", name), &exec, |b, &exec| {
            b.iter(|| certify_verdier(&p, black_box(10_000), 1, exec).unwrap())
        });
        g.bench_with_input(
            BenchmarkId::new("subregularity_10k", name),
            &exec,
            |b, &exec| b.iter(|| certify_subregularity(&p, black_box(10_000), 1, exec).unwrap()),
        );
    }
    g.finish();
}

criterion_group!(benches, relu_trials, rpca_trials, certifier_sampling);
criterion_main!(benches);
