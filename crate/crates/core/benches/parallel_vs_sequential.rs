use asym_core::companion::MatrixSeries;
use asym_core::expansion::{assemble_columns, compute_expansion, evaluate_many};
use asym_core::integrate::{integrate_many, IntegratorConfig};
use asym_core::numerics::{re, CMatrix};
use asym_core::par::Exec;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn series() -> MatrixSeries {
    let a0 = CMatrix::from_real(&[&[-1.0, 0.0], &[0.0, -0.5]]);
    let a1 = CMatrix::from_real(&[&[1.0, 1.0], &[1.0, 0.0]]);
    let a2 = CMatrix::from_real(&[&[0.0, -1.0], &[-1.0, 0.0]]);
    MatrixSeries::new(1, vec![a0, a1, a2]).unwrap()
}

fn integration(c: &mut Criterion) {
    let sys = series();
    let initial: Vec<_> = (0..64).map(|k| vec![re(1.0 + k as f64), re(5.0)]).collect();
    let cfg = IntegratorConfig { rtol: 1e-10, atol: 1e-12, ..IntegratorConfig::default() };
    let mut group = c.benchmark_group("integrate_many");
    for exec in [Exec::Sequential, Exec::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| integrate_many(exec, &sys, &initial, 2.0, 11.0, &cfg))
        });
    }
    group.finish();
}

fn evaluation(c: &mut Criterion) {
    let cols = assemble_columns(&compute_expansion(&series()).unwrap());
    let ts: Vec<f64> = (0..20_000).map(|k| 1.0 + k as f64 * 0.01).collect();
    let mut group = c.benchmark_group("evaluate_many");
    for exec in [Exec::Sequential, Exec::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| evaluate_many(exec, &cols, &ts, None))
        });
    }
    group.finish();
}

criterion_group!(benches, integration, evaluation);
criterion_main!(benches);
