use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ridc_core::mol::AdvectionDiffusionSpec;
use ridc_core::ridc::{run_pipelined, run_serial};
use ridc_core::{qr_factor, qr_solve, DenseMatrix, ImplicitSolver, RidcConfig};

fn shifted_laplacian(n: usize) -> DenseMatrix {
    DenseMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
        0 => 3.0,
        1 => -1.0,
        _ => 0.0,
    })
}

fn qr(c: &mut Criterion) {
    let mut group = c.benchmark_group("qr");
    for n in [100, 200, 400] {
        let m = shifted_laplacian(n);
        group.bench_with_input(BenchmarkId::new("factor", n), &m, |b, m| {
            b.iter(|| qr_factor(black_box(m)).unwrap())
        });
        let f = qr_factor(&m).unwrap();
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        group.bench_with_input(BenchmarkId::new("solve", n), &rhs, |b, rhs| {
            b.iter(|| qr_solve(&f, black_box(rhs)).unwrap())
        });
    }
    group.finish();
}

fn ridc4(c: &mut Criterion) {
    let problem = AdvectionDiffusionSpec {
        t_end: 0.4,
        ..AdvectionDiffusionSpec::desk()
    }
    .build()
    .unwrap();
    let solver = ImplicitSolver::new();
    let mut group = c.benchmark_group("ridc4_adv_diff");
    group.sample_size(10);
    group.bench_function("serial", |b| {
        let cfg = RidcConfig::new(4, 200);
        b.iter(|| run_serial(&problem.ivp, &cfg, &solver).unwrap())
    });
    for workers in [1, 2, 4] {
        let cfg = RidcConfig::new(4, 200).with_workers(workers);
        group.bench_with_input(BenchmarkId::new("pipelined", workers), &cfg, |b, cfg| {
            b.iter(|| run_pipelined(&problem.ivp, cfg, &solver).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, qr, ridc4);
criterion_main!(benches);
