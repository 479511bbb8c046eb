use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use wfootrule::montecarlo::{replicates, Scenario};
use wfootrule::{Copula, Execution, DEFAULT_SEED};

fn replications(c: &mut Criterion) {
    let mut group = c.benchmark_group("replicates");
    group.sample_size(10);
    for (spec, n) in [("frank:theta=-5", 200), ("gaussian:rho=-0.7", 500)] {
        let copula: Copula = spec.parse().unwrap();
        let s = Scenario::new(copula, n, 500, DEFAULT_SEED).unwrap();
        for (name, exec) in [
            ("sequential", Execution::Sequential),
            ("parallel", Execution::Parallel),
        ] {
            group.bench_with_input(BenchmarkId::new(name, s.label()), &s, |b, s| {
                b.iter(|| replicates(s, exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, replications);
criterion_main!(benches);
