use std::hint::black_box;

use cascade::experiments::{run_simulation, SimConfig};
use cascade::solvers::solve_efficient;
use cascade::verify::{problem_rng, random_problem, verify_all_with, Tolerances};
use cascade::{Execution, SolveOptions};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn simulation(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulation");
    group.sample_size(10);
    for reps in [100usize, 1000] {
        for (name, execution) in MODES {
            let cfg = SimConfig {
                reps,
                seed: 1,
                execution,
                ..SimConfig::default()
            };
            group.bench_with_input(BenchmarkId::new(name, reps), &cfg, |b, cfg| {
                b.iter(|| run_simulation(black_box(cfg)).unwrap())
            });
        }
    }
    group.finish();
}

fn multistart(c: &mut Criterion) {
    let mut group = c.benchmark_group("multistart");
    let pr = random_problem(&mut problem_rng(3, 8, 0), 8);
    for (name, execution) in MODES {
        let opts = SolveOptions {
            multistart: 15,
            execution,
            ..SolveOptions::default()
        };
        group.bench_function(name, |b| b.iter(|| solve_efficient(black_box(&pr), &opts).unwrap()));
    }
    group.finish();
}

fn verification(c: &mut Criterion) {
    let mut group = c.benchmark_group("verify_all");
    group.sample_size(10);
    for (name, execution) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| verify_all_with(black_box(7), &[2, 3, 5, 8], &Tolerances::default(), execution))
        });
    }
    group.finish();
}

criterion_group!(benches, simulation, multistart, verification);
criterion_main!(benches);
