//! Closed-form oracles for the Hartree pairing and the nonlinear operator.

use fnls::*;
use num_complex::Complex64;

fn coulomb_problem(n: usize, l: f64) -> Problem {
    let params = PhysicsParams::new(3, 0.5, 2.0, 1.0).unwrap();
    let grid = Grid::cubic(3, n, l).unwrap();
    Problem::new(params, NonlinearitySpec::quadratic(1.0), &grid, KernelQuadrature::Spectral).unwrap()
}

#[test]
fn gaussian_self_pairing_matches_closed_form() {
    // ∬ e^{−|x|²/2σ²} e^{−|y|²/2σ²} / |x−y| = M²·E|Z|^{-1}, Z ~ N(0, 2σ²I),
    // with M = (2πσ²)^{3/2} and E|Z|^{-1} = 1/(σ√π)
    let sigma = 1.0;
    let p = coulomb_problem(48, 16.0);
    let g: Vec<f64> = p.grid().sample(|x| (-x.iter().map(|v| v * v).sum::<f64>() / (2.0 * sigma * sigma)).exp());
    let d = p.interaction_d(&g, &g).unwrap();
    let mass = (std::f64::consts::TAU * sigma * sigma).powf(1.5);
    let exact = mass * mass / (sigma * std::f64::consts::PI.sqrt());
    assert!((d - exact).abs() / exact <= 1e-6, "{d} vs {exact}");
}

#[test]
fn coulomb_nonlinear_operator_matches_erf_potential() {
    // G(ψ) = ψ² for a real Gaussian u = e^{−r²/4σ²} gives G(u) a normalised
    // Gaussian of variance σ² times (2πσ²)^{3/2}, so 𝒩(u) = 2u·M·erf(r/√2σ)/r
    let sigma = 1.0;
    let p = coulomb_problem(48, 16.0);
    let u = ComplexField::from_fn(p.grid(), |x| Complex64::new((-x.iter().map(|v| v * v).sum::<f64>() / (4.0 * sigma * sigma)).exp(), 0.0));
    let nu = p.el_operator(&u).unwrap();
    let mass = (std::f64::consts::TAU * sigma * sigma).powf(1.5);
    let exact = p.grid().sample(|x| {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let pot = if r == 0.0 { (2.0 / std::f64::consts::PI).sqrt() / sigma } else { libm::erf(r / (2f64.sqrt() * sigma)) / r };
        2.0 * mass * pot * (-r * r / (4.0 * sigma * sigma)).exp()
    });
    let scale = exact.iter().cloned().fold(0.0, f64::max);
    let err = nu.values().iter().zip(&exact).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale;
    assert!(err <= 1e-6, "{err:e}");
}

#[test]
fn interaction_is_exactly_symmetric_on_distinct_fields() {
    let p = coulomb_problem(16, 8.0);
    let a: Vec<f64> = p.grid().sample(|x| (-(x[0] - 1.0).powi(2) - x[1] * x[1] - x[2] * x[2]).exp());
    let b: Vec<f64> = p.grid().sample(|x| (-x[0] * x[0] - 2.0 * (x[1] + 0.5).powi(2) - x[2] * x[2]).exp());
    assert_eq!(p.interaction_d(&a, &b).unwrap(), p.interaction_d(&b, &a).unwrap());
    assert!(p.interaction_d(&a, &b).unwrap() > 0.0);
}

#[test]
fn linear_problem_gradient_is_the_fractional_laplacian() {
    let params = PhysicsParams::new(1, 0.4, 0.5, 1.0).unwrap();
    let grid = Grid::cubic(1, 64, 6.0).unwrap();
    let p = Problem::new(params, NonlinearitySpec::linear(), &grid, KernelQuadrature::Spectral).unwrap();
    let k0 = std::f64::consts::TAU * 4.0 / 6.0;
    let u = ComplexField::from_fn(&grid, |x| Complex64::from_polar(0.7, k0 * x[0]));
    let grad = p.energy_gradient(&u).unwrap();
    let expected = u.scaled(Complex64::new(k0.powf(0.8), 0.0));
    assert!(grad.sub(&expected).unwrap().max_abs() <= 1e-12);
    let kappa = p.lagrange_multiplier(&u).unwrap();
    assert!((kappa - k0.powf(0.8)).abs() <= 1e-12 * kappa);
    assert!(p.el_residual(&u, kappa).unwrap().max_abs() <= 1e-12);
}
