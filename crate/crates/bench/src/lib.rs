//! Fixtures shared by the benchmarks.

use fnls::{ComplexField, Grid, KernelQuadrature, NonlinearitySpec, PhysicsParams, Problem};

/// Reference one-dimensional problem (`s = 0.7`, `β = 0.8`, unit mass) on
/// `n` points of a box of length `n/8`.
pub fn problem_1d(n: usize) -> Problem {
    let params = PhysicsParams::new(1, 0.7, 0.8, 1.0).expect("valid parameters");
    let grid = Grid::cubic(1, n, n as f64 / 8.0).expect("valid grid");
    Problem::new(params, NonlinearitySpec::quadratic(1.0), &grid, KernelQuadrature::Spectral).expect("problem builds")
}

/// Three-dimensional Coulomb-type problem on an `n³` grid.
pub fn problem_3d(n: usize) -> Problem {
    let params = PhysicsParams::new(3, 0.8, 2.0, 1.0).expect("valid parameters");
    let grid = Grid::cubic(3, n, 16.0).expect("valid grid");
    Problem::new(params, NonlinearitySpec::quadratic(1.0), &grid, KernelQuadrature::Spectral).expect("problem builds")
}

/// Unit-mass centred Gaussian on the problem grid.
pub fn gaussian(problem: &Problem) -> ComplexField {
    let grid = problem.grid();
    let width = grid.lengths().iter().cloned().fold(f64::INFINITY, f64::min) / 16.0;
    ComplexField::gaussian(grid, &vec![0.0; grid.ndim()], width, 1.0)
        .normalized_to(problem.params.mass)
        .expect("nonzero field")
}
