use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use miplab::measures::{bregman_mi, conditional_mi, f_mutual_information};
use miplab::{ConvexGenerator, Measure, ScoringRule};
use miplab_bench::{joint, tensor};

fn mutual_information(c: &mut Criterion) {
    let mut group = c.benchmark_group("f_mutual_information");
    for m in [2, 4, 16] {
        let u = joint(m);
        for f in ConvexGenerator::ALL {
            group.bench_with_input(BenchmarkId::new(f.name(), m), &u, |b, u| {
                b.iter(|| f_mutual_information(u, f).unwrap())
            });
        }
    }
    group.finish();

    let mut group = c.benchmark_group("bregman_mi");
    for m in [2, 4, 16] {
        let u = joint(m);
        for rule in ScoringRule::ALL {
            group
                .bench_with_input(BenchmarkId::new(rule.name(), m), &u, |b, u| b.iter(|| bregman_mi(u, rule).unwrap()));
        }
    }
    group.finish();
}

fn conditional(c: &mut Criterion) {
    let t = tensor(4, 4);
    c.bench_function("conditional_mi/kl/4x4x4", |b| {
        b.iter(|| conditional_mi(&t, Measure::F(ConvexGenerator::Kl)).unwrap())
    });
}

criterion_group!(benches, mutual_information, conditional);
criterion_main!(benches);
