use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mpmab_bench::experiment_instance;
use mpmab_core::{run_episode, Algorithm, PolicySpec};

fn episodes(c: &mut Criterion) {
    let mut group = c.benchmark_group("episode/T=5000");
    group.sample_size(10);
    let instance = experiment_instance(20, 8, 1);
    for algo in [Algorithm::RobustAggAdapted, Algorithm::NaiveAgg, Algorithm::IndUcb, Algorithm::RobustAggAgnostic] {
        let spec = PolicySpec::new(algo, 0.15);
        group.bench_with_input(BenchmarkId::from_parameter(algo), &spec, |b, spec| {
            b.iter(|| {
                let mut policy = spec.build().unwrap();
                run_episode(&instance, policy.as_mut(), 5000, 7).unwrap().final_regret()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, episodes);
criterion_main!(benches);
