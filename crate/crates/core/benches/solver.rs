use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dtopt::dictionary::{build_dictionary, BuildOptions};
use dtopt::generate::{generate, ClassSpec, GenConfig, Variant};
use dtopt::{solve, Execution, SolveOptions};

const STRATEGIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn instance(n: usize) -> dtopt::Instance {
    generate(&GenConfig {
        n,
        seed: 7,
        variant: Variant::Successful,
        classes: ClassSpec::Identity,
        weight_max: 100,
        overlap: 0.0,
    })
    .unwrap()
}

fn dictionary(c: &mut Criterion) {
    let mut group = c.benchmark_group("dictionary");
    group.sample_size(10);
    for n in [25, 50] {
        let inst = instance(n);
        for (name, exec) in STRATEGIES {
            let opts = BuildOptions {
                exec,
                ..BuildOptions::default()
            };
            group.bench_with_input(BenchmarkId::new(name, n), &inst, |b, inst| {
                b.iter(|| build_dictionary(black_box(inst), &opts).unwrap().len())
            });
        }
    }
    group.finish();
}

fn full_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    for n in [25, 50] {
        let inst = instance(n);
        for (name, exec) in STRATEGIES {
            let opts = SolveOptions {
                exec,
                ..SolveOptions::default()
            };
            group.bench_with_input(BenchmarkId::new(name, n), &inst, |b, inst| {
                b.iter(|| solve(black_box(inst), &opts).unwrap().cost)
            });
        }
    }
    group.finish();
}

criterion_group!(benches, dictionary, full_solve);
criterion_main!(benches);
