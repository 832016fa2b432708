use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fnls::evolution::StrangStepper;
use fnls::ground_state::{solve_ground_state, InitialGuess};
use fnls::SolverOptions;
use fnls_bench::{gaussian, problem_1d, problem_3d};

fn riesz(c: &mut Criterion) {
    let mut group = c.benchmark_group("riesz_convolution");
    for n in [1024, 8192] {
        let p = problem_1d(n);
        let rho = p.density(&gaussian(&p));
        group.bench_with_input(BenchmarkId::new("1d", n), &rho, |b, rho| b.iter(|| p.kernel().convolve(black_box(rho)).unwrap()));
    }
    for n in [16, 32] {
        let p = problem_3d(n);
        let rho = p.density(&gaussian(&p));
        group.bench_with_input(BenchmarkId::new("3d", n), &rho, |b, rho| b.iter(|| p.kernel().convolve(black_box(rho)).unwrap()));
    }
    group.finish();
}

fn strang(c: &mut Criterion) {
    let mut group = c.benchmark_group("strang_step");
    for n in [1024, 8192] {
        let p = problem_1d(n);
        let stepper = StrangStepper::new(&p, 0.01).unwrap();
        let phi0 = gaussian(&p);
        group.bench_function(BenchmarkId::new("1d", n), |b| {
            let mut phi = phi0.clone();
            b.iter(|| stepper.step(black_box(&mut phi)).unwrap())
        });
    }
    let p = problem_3d(32);
    let stepper = StrangStepper::new(&p, 0.01).unwrap();
    let phi0 = gaussian(&p);
    group.bench_function(BenchmarkId::new("3d", 32), |b| {
        let mut phi = phi0.clone();
        b.iter(|| stepper.step(black_box(&mut phi)).unwrap())
    });
    group.finish();
}

fn solver(c: &mut Criterion) {
    let mut group = c.benchmark_group("gradient_flow");
    group.sample_size(20);
    // a fixed number of iterations, never converged
    let opts = SolverOptions { tau: Some(1.0), tol: 1e-300, max_iters: 10, ..SolverOptions::default() };
    for n in [1024, 8192] {
        let p = problem_1d(n);
        group.bench_function(BenchmarkId::new("10_iterations_1d", n), |b| {
            b.iter(|| solve_ground_state(&p, InitialGuess::Gaussian, black_box(&opts)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, riesz, strang, solver);
criterion_main!(benches);
