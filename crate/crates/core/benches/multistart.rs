use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qes_core::apps::phi6::{self, Phi6Params};
use qes_core::bethe::solve_all;
use qes_core::exec::Execution;
use qes_core::{OdeSpec, SolverConfig};

fn bench_solve_all(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_all");
    group.sample_size(20);
    // generic four-pole spec: binom(n + 2, n) solutions
    for n in [2usize, 3] {
        let spec = OdeSpec::from_real([0.3, -1.0, 0.2, 1.0, 0.5], [0.2, -1.0, 0.7, 0.4], n).unwrap();
        for exec in [Execution::Sequential, Execution::Parallel] {
            let cfg = SolverConfig::default().with_restarts(500).with_execution(exec);
            group.bench_with_input(BenchmarkId::new(format!("{exec:?}").to_lowercase(), n), &spec, |b, s| {
                b.iter(|| solve_all(black_box(s), &cfg).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_augmented(c: &mut Criterion) {
    let mut group = c.benchmark_group("phi6_augmented");
    group.sample_size(10);
    let p = Phi6Params { mu: 1.0, n: 3 };
    for exec in [Execution::Sequential, Execution::Parallel] {
        let cfg = SolverConfig::default().with_restarts(200).with_execution(exec);
        group.bench_function(format!("{exec:?}").to_lowercase(), |b| {
            b.iter(|| phi6::solve(black_box(&p), &cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_solve_all, bench_augmented);
criterion_main!(benches);
