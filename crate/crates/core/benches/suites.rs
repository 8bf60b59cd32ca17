use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use conepersist::conv1d::{ray_gamma_module, RaySheaf};
use conepersist::interleave::{interleaving_distance, DecisionOptions, DistanceMode, DEFAULT_BUDGET};
use conepersist::par::Parallelism;
use conepersist::suites::{run_suite, Suite};
use conepersist::Rat;

const MODES: [(&str, Parallelism); 2] = [("sequential", Parallelism::Sequential), ("parallel", Parallelism::Parallel)];

fn suites(c: &mut Criterion) {
    let mut group = c.benchmark_group("suite");
    group.sample_size(10);
    for (suite, count) in [(Suite::Decision, 40), (Suite::Isometry, 40), (Suite::ConvVsInt, 10)] {
        for (name, par) in MODES {
            group.bench_with_input(BenchmarkId::new(suite.name(), name), &par, |b, &par| {
                b.iter(|| black_box(run_suite(suite, 1, count, par)))
            });
        }
    }
    group.finish();
}

fn rays(xs: &[i64]) -> RaySheaf {
    RaySheaf::new(xs.iter().map(|&x| Rat::new(x, 2)).collect())
}

// a single distance on five-ray modules: the decision search fans out
fn single_distance(c: &mut Criterion) {
    let f = ray_gamma_module(&rays(&[0, 1, 2, 3, 4]), 2);
    let g = ray_gamma_module(&rays(&[1, 2, 2, 4, 5]), 2);
    let mut group = c.benchmark_group("distance/five-rays");
    group.sample_size(10);
    for (name, par) in MODES {
        let opts = DecisionOptions { budget: DEFAULT_BUDGET, parallelism: par };
        group.bench_function(name, |b| {
            b.iter(|| {
                interleaving_distance(f.module(), g.module(), &[Rat::one()], &DistanceMode::Exact, &opts).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, suites, single_distance);
criterion_main!(benches);
