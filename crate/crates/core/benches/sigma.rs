use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use wfootrule::estimation::{rank_data, sigma_hat, EstimationOptions, TiePolicy};
use wfootrule::{sampling, Execution};

fn sigma(c: &mut Criterion) {
    let mut group = c.benchmark_group("sigma_hat");
    for n in [200, 500, 2000] {
        let batch = sampling::sample(&"frank:theta=-5".parse().unwrap(), n, 1).unwrap();
        let (us, vs) = batch.columns();
        let rs = rank_data(&us, &vs, TiePolicy::Error).unwrap();
        for (name, execution) in [
            ("sequential", Execution::Sequential),
            ("parallel", Execution::Parallel),
        ] {
            let opts = EstimationOptions {
                execution,
                ..Default::default()
            };
            group.bench_with_input(BenchmarkId::new(name, n), &rs, |b, rs| {
                b.iter(|| sigma_hat(rs, &opts).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, sigma);
criterion_main!(benches);
