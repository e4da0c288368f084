//! Oracle sampling and cross approximation on the active backend. Run once
//! with default features and once with `--no-default-features`; the group
//! names carry the backend so criterion reports the two side by side.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tucker_cross::par::is_parallel;
use tucker_cross::spectral::{Boundary, Laplace1D, PoissonProblem};
use tucker_cross::tucker::cold_start_factors;
use tucker_cross::{c2d, C2DConfig, FnOracle, TensorOracle, TuckerTensor};

fn backend() -> &'static str {
    if is_parallel() {
        "parallel"
    } else {
        "sequential"
    }
}

fn smooth(idx: &[usize]) -> f64 {
    let s: f64 = idx.iter().map(|&i| (i + 1) as f64).sum();
    (1.0 / s).sqrt() * (0.01 * s).cos()
}

fn bench_sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group(format!("sampling/{}", backend()));
    let n = 200;
    let oracle = FnOracle::new(vec![n; 3], smooth);
    let rows: Vec<usize> = (0..n).step_by(4).collect();
    g.bench_function("block 50x50x50", |b| b.iter(|| black_box(oracle.block(&[&rows, &rows, &rows]))));
    let tuples: Vec<Vec<usize>> = (0..64).map(|t| vec![(7 * t) % n, (13 * t) % n]).collect();
    g.bench_function("64 fibers", |b| b.iter(|| black_box(oracle.fibers(1, &tuples))));
    g.bench_function("c2d cold start 200^3", |b| {
        b.iter(|| {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let guess = cold_start_factors(&[n; 3], &mut rng);
            black_box(c2d(&oracle, &guess, &C2DConfig::new(1e-8)).unwrap())
        })
    });
    g.finish();
}

fn bench_poisson(c: &mut Criterion) {
    let mut g = c.benchmark_group(format!("poisson/{}", backend()));
    g.sample_size(20);
    let n = 255;
    let ops = vec![Laplace1D::new(n, 2.0, Boundary::Dirichlet).unwrap(); 3];
    let vecs: Vec<nalgebra::DVector<f64>> = ops
        .iter()
        .map(|op| nalgebra::DVector::from_iterator(n, op.points().into_iter().map(|x| (-36.0 * (x - 1.0).powi(2)).exp())))
        .collect();
    let rhs = TuckerTensor::rank_one(&vecs).unwrap();
    let problem = PoissonProblem::new(ops, rhs, None).unwrap();
    g.bench_function("solve n=255", |b| b.iter(|| black_box(problem.solve(&C2DConfig::new(1e-6), None).unwrap())));
    g.finish();
}

criterion_group!(benches, bench_sampling, bench_poisson);
criterion_main!(benches);
