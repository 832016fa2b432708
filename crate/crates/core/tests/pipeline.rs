//! Solver → snapshot → integrator → analysis, on small grids.

use fnls::analysis::{orbit_distance, ShiftSearch};
use fnls::evolution::{evolve, EvolveOptions};
use fnls::ground_state::{gauge_fix, mass_energy_curve, mass_energy_curve_parallel, solve_ground_state, InitialGuess};
use fnls::spectral::{load_snapshot, save_snapshot};
use fnls::*;

fn problem() -> Problem {
    let params = PhysicsParams::new(1, 0.7, 0.8, 1.0).unwrap();
    let grid = Grid::cubic(1, 512, 64.0).unwrap();
    Problem::new(params, NonlinearitySpec::quadratic(1.0), &grid, KernelQuadrature::Spectral).unwrap()
}

fn options() -> SolverOptions {
    SolverOptions { tau: Some(1.0), tol: 1e-9, ..SolverOptions::default() }
}

#[test]
fn random_starts_reach_the_same_profile() {
    let p = problem();
    let a = solve_ground_state(&p, InitialGuess::Random(1), &options()).unwrap();
    let b = solve_ground_state(&p, InitialGuess::Random(99), &options()).unwrap();
    assert!(a.converged && b.converged);
    assert!((a.energy.total - b.energy.total).abs() <= 1e-8);
    // The two starts settle a fraction of a cell apart, so compare modulo translation and phase.
    let d = orbit_distance(p.ops(), &b.state, &a.state, p.s(), ShiftSearch::SubGrid).unwrap();
    assert!(d.distance <= 1e-6 * a.hs_norm, "{:e}", d.distance / a.hs_norm);
}

#[test]
fn converged_state_is_consistent() {
    let p = problem();
    let r = solve_ground_state(&p, InitialGuess::Gaussian, &options()).unwrap();
    assert!(r.converged);
    assert!((r.state.mass() - 1.0).abs() <= 1e-12);
    assert!(r.el_residual <= 1e-8);
    assert!((r.kappa - p.lagrange_multiplier(&r.state).unwrap()).abs() <= 1e-8);
    assert!(r.state.values().iter().all(|v| v.re >= -1e-10 && v.im.abs() <= 1e-10));
    assert_eq!(gauge_fix(&r.state).unwrap().values().len(), r.state.values().len());
    assert!(r.history.iter().all(|h| (h.energy.mass - 1.0).abs() <= 1e-13));
}

#[test]
fn single_point_curve_matches_direct_solve() {
    let p = problem();
    let direct = solve_ground_state(&p, InitialGuess::Gaussian, &options()).unwrap();
    let curve = mass_energy_curve(&p, &[1.0], &options());
    assert_eq!(curve.points.len(), 1);
    assert_eq!(curve.points[0].energy, direct.energy.total);
    let par = mass_energy_curve_parallel(&p, &[1.0, 0.5], &options());
    assert_eq!(par.points[0].energy, direct.energy.total);
    assert!(par.points.iter().all(|c| c.energy < 0.0));
}

#[test]
fn snapshot_hand_off_preserves_the_orbit() {
    let p = problem();
    let r = solve_ground_state(&p, InitialGuess::Gaussian, &options()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gs.bin");
    save_snapshot(&path, &r.state).unwrap();
    let loaded = load_snapshot(&path).unwrap();
    assert_eq!(loaded, r.state);

    let mut opts = EvolveOptions::new(2.0, 0.01);
    opts.record_stride = 20;
    let traj = evolve(&p, &loaded, &opts, Some(&loaded), |_, _| Ok(())).unwrap();
    assert!(traj.failure.is_none());
    for rec in &traj.records {
        assert!(rec.orbit_distance.unwrap() <= 1e-5 * r.hs_norm);
        let expected = (r.kappa * rec.t + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
        assert!((rec.overlap_phase.unwrap() - expected).abs() <= 1e-4, "t {}", rec.t);
    }
    let d = orbit_distance(p.ops(), &traj.state, &r.state, 0.7, ShiftSearch::SubGrid).unwrap();
    assert!(d.distance <= 1e-5 * r.hs_norm);
}

#[test]
fn supercritical_configuration_is_refused() {
    let params = PhysicsParams::new(1, 0.2, 0.3, 1.0).unwrap();
    let grid = Grid::cubic(1, 64, 20.0).unwrap();
    let p = Problem::new(params, NonlinearitySpec::quadratic(1.0), &grid, KernelQuadrature::Spectral).unwrap();
    assert!(matches!(solve_ground_state(&p, InitialGuess::Gaussian, &options()), Err(FnlsError::Inadmissible(_))));
}
