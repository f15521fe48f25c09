use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use safegp::{decide, DeciderConfig, Method, SamplingSchedule};
use safegp_bench::toy_posterior;
use std::hint::black_box;

fn deciders(c: &mut Criterion) {
    let tp = toy_posterior();
    let mut group = c.benchmark_group("decide_toy");
    group.sample_size(10);
    for method in Method::ALL {
        let cfg = DeciderConfig::new(method, 0.01, 0.05, SamplingSchedule::doubling(10)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(method), &cfg, |b, cfg| {
            b.iter(|| decide(black_box(&tp), cfg, 7).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, deciders);
criterion_main!(benches);
