use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use slsid_core::{bcd_solve, fixtures, generate_random_scenario, oracle_global, NoiseSpec, OracleOptions, SolverConfig};

fn bcd(c: &mut Criterion) {
    let mut group = c.benchmark_group("bcd_solve");
    for &n in &[500usize, 1000, 10_000] {
        let noise = NoiseSpec::gaussian(0.1, 1).unwrap();
        let (_, data) = generate_random_scenario(2, 2, n, (-5.0, 5.0), &noise, 7).unwrap();
        let cfg = SolverConfig::new(2).with_restarts(1).with_seed(3);
        group.bench_with_input(BenchmarkId::from_parameter(n), &data, |b, d| {
            b.iter(|| bcd_solve(d, &cfg).unwrap())
        });
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let (_, data) = fixtures::example2();
    c.bench_function("oracle_example2", |b| {
        b.iter(|| oracle_global(&data, 2, &OracleOptions::default()).unwrap())
    });
}

criterion_group!(benches, bcd, oracle);
criterion_main!(benches);
