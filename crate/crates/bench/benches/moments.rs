use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tensor_moments::maps::enumerate_rooted_connected;
use tensor_moments::tensor::{
    expected_trace_partition, sample_gote, trace_invariant, BalancedInvariant, EntryDistribution,
};

fn enumeration(c: &mut Criterion) {
    let mut g = c.benchmark_group("enumerate");
    for (p, n) in [(3, 4), (3, 6), (4, 4)] {
        g.bench_with_input(
            BenchmarkId::from_parameter(format!("p{p}n{n}")),
            &(p, n),
            |b, &(p, n)| b.iter(|| enumerate_rooted_connected(black_box(p), black_box(n)).unwrap()),
        );
    }
    g.finish();
}

fn contraction(c: &mut Criterion) {
    let mut g = c.benchmark_group("trace");
    let maps = enumerate_rooted_connected(3, 4).unwrap();
    for dim in [16, 32] {
        let t = sample_gote(3, dim, 1).unwrap();
        g.bench_with_input(BenchmarkId::new("all_p3n4", dim), &t, |b, t| {
            b.iter(|| {
                maps.iter()
                    .map(|m| trace_invariant(m, t).unwrap())
                    .sum::<f64>()
            })
        });
        let inv = BalancedInvariant::new(3, 4).unwrap();
        g.bench_with_input(BenchmarkId::new("balanced_I4", dim), &t, |b, t| {
            b.iter(|| inv.evaluate(t).unwrap())
        });
    }
    g.finish();
}

fn exact_expectation(c: &mut Criterion) {
    let mut g = c.benchmark_group("expected_trace_partition");
    let maps = enumerate_rooted_connected(3, 4).unwrap();
    let dist = EntryDistribution::GaussianGote;
    g.bench_function("p3n4_N30", |b| {
        b.iter(|| {
            maps.iter()
                .map(|m| expected_trace_partition(m, black_box(30), &dist).unwrap())
                .sum::<f64>()
        })
    });
    g.finish();
}

criterion_group!(benches, enumeration, contraction, exact_expectation);
criterion_main!(benches);
