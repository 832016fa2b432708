//! Constrained minimisation `I_λ = inf{ℰ(u) : ‖u‖₂² = λ}` by a normalised
//! gradient flow.
//!
//! Each iteration takes one semi-implicit step of the projected flow
//! `∂_t u = −((−Δ)^s u − 𝒩(u) − κ(u)u)`, with the fractional Laplacian and a
//! shift `α = max(−κ, 0)` backward-Euler in spectral space and the rest
//! explicit,
//!
//! ```text
//! û* = (ûⁿ + τ(𝒩̂(uⁿ) + (κⁿ + α)ûⁿ)) / (1 + τ(|k|^{2s} + α)),    uⁿ⁺¹ = √λ·u*/‖u*‖₂,
//! ```
//!
//! and halves `τ` whenever the energy would go up. Fixed points satisfy the
//! Euler–Lagrange equation exactly.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::perturb::random_smooth;
use crate::error::{FnlsError, Result};
use crate::functionals::{EnergyBreakdown, Problem};
use crate::model::validate_existence;
use crate::report::fmt_f64;
use crate::spectral::{ComplexField, Grid};

/// Energy increase tolerated per accepted step.
pub const DESCENT_TOLERANCE: f64 = 1e-12;

/// Iterations between centroid checks. The kinetic term is periodic but the
/// Riesz interaction is free-space, so an off-centre state only drifts back
/// to the middle very slowly; a circular shift does it in one move.
pub const RECENTRE_EVERY: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Pseudo-time step; `None` selects `0.1·h_min^{2s}`.
    pub tau: Option<f64>,
    pub tol: f64,
    pub max_iters: usize,
    pub max_halvings: usize,
    /// Energies below this are treated as collapse.
    pub energy_floor: f64,
    /// `max|u|` above this is treated as collapse.
    pub field_ceiling: f64,
    /// Warn when the outer 10% shell of the box holds more than this
    /// fraction of the mass.
    pub boundary_tolerance: f64,
    /// Refuse configurations outside the negative-energy window.
    pub require_admissible: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tau: None,
            tol: 1e-8,
            max_iters: 50_000,
            max_halvings: 5,
            energy_floor: -1e8,
            field_ceiling: 1e8,
            boundary_tolerance: 1e-6,
            require_admissible: true,
        }
    }
}

pub fn default_tau(grid: &Grid, s: f64) -> f64 {
    0.1 * grid.min_spacing().powf(2.0 * s)
}

#[derive(Debug, Clone)]
pub enum InitialGuess {
    /// Centred Gaussian of width `L_min/8`.
    Gaussian,
    /// Smooth random field from the given seed.
    Random(u64),
    Field(ComplexField),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistoryEntry {
    pub iter: usize,
    pub energy: EnergyBreakdown,
    pub residual: f64,
    pub kappa: f64,
    pub tau: f64,
}

impl HistoryEntry {
    pub const CSV_HEADER: &'static str = "iter,energy,kinetic,interaction,residual,kappa";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.iter,
            fmt_f64(self.energy.total),
            fmt_f64(self.energy.kinetic),
            fmt_f64(self.energy.interaction),
            fmt_f64(self.residual),
            fmt_f64(self.kappa)
        )
    }
}

#[derive(Debug, Clone)]
pub struct GroundStateResult {
    /// Gauge-fixed minimiser: real, nonnegative, centred.
    pub state: ComplexField,
    pub kappa: f64,
    pub energy: EnergyBreakdown,
    /// `‖(−Δ)^s u − κu − 𝒩(u)‖₂ / ‖u‖_{H^s}`.
    pub el_residual: f64,
    pub hs_norm: f64,
    /// Residual-scale bound on the energy error, `max(el_residual·‖u‖_{H^s}·√λ, |ΔE|)`.
    pub energy_uncertainty: f64,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<HistoryEntry>,
    pub boundary_fraction: f64,
    pub warnings: Vec<String>,
}

/// Per-iterate quantities sharing one Hartree convolution.
struct Iterate {
    u: ComplexField,
    spectrum: Vec<Complex64>,
    nonlinear: Vec<Complex64>,
    energy: EnergyBreakdown,
}

impl Iterate {
    fn new(problem: &Problem, u: ComplexField) -> Result<Self> {
        let ops = problem.ops();
        let spectrum = ops.forward(&u)?;
        let kinetic = 0.5 * ops.kinetic_spectral(&spectrum, problem.s());
        let (interaction, nonlinear) = if problem.nonlinearity.is_linear() {
            (0.0, vec![Complex64::default(); spectrum.len()])
        } else {
            let density = problem.density(&u);
            let hartree = problem.kernel().convolve(&density)?;
            let dv = u.grid().cell_volume();
            let d: f64 = density.iter().zip(&hartree).map(|(a, b)| a * b).sum::<f64>() * dv;
            let mut nl: Vec<Complex64> = u
                .values()
                .iter()
                .zip(&hartree)
                .map(|(v, h)| v * (h * problem.nonlinearity.f(v.norm())))
                .collect();
            ops.forward_in_place(&mut nl);
            (0.5 * d, nl)
        };
        let energy = EnergyBreakdown { kinetic, interaction, total: kinetic - interaction, mass: u.mass() };
        Ok(Iterate { u, spectrum, nonlinear, energy })
    }

    /// Multiplier and normalised residual from the cached spectra.
    fn kappa_and_residual(&self, problem: &Problem, symbol: &[f64]) -> (f64, f64) {
        let ops = problem.ops();
        let w = ops.parseval_weight();
        let mass = self.energy.mass;
        let kin2 = 2.0 * self.energy.kinetic;
        let pairing: f64 = self.nonlinear.iter().zip(&self.spectrum).map(|(n, u)| (n * u.conj()).re).sum::<f64>() * w;
        let kappa = (kin2 - pairing) / mass;
        let res2: f64 = self
            .spectrum
            .iter()
            .zip(&self.nonlinear)
            .zip(symbol)
            .map(|((u, n), &sym)| (u * (sym - kappa) - n).norm_sqr())
            .sum::<f64>()
            * w;
        let hs = (mass + kin2).sqrt();
        (kappa, res2.sqrt() / hs)
    }
}

/// The iterate moved to the box centre, if that is a move and does not
/// raise the energy.
fn recentred(problem: &Problem, it: &Iterate) -> Result<Option<Iterate>> {
    let shift = centroid_shift(problem.grid(), &it.u);
    if shift.iter().all(|&v| v == 0) {
        return Ok(None);
    }
    let moved = Iterate::new(problem, it.u.shifted(&shift))?;
    Ok((moved.energy.total <= it.energy.total).then_some(moved))
}

pub fn solve_ground_state(problem: &Problem, init: InitialGuess, opts: &SolverOptions) -> Result<GroundStateResult> {
    let lambda = problem.params.mass;
    let grid = problem.grid().clone();
    let s = problem.s();
    if opts.require_admissible && !problem.nonlinearity.is_linear() {
        let report = validate_existence(&problem.params, &problem.nonlinearity);
        if !report.existence_ok || !report.negative_energy_ok {
            let msgs: Vec<String> = report.violations.iter().map(|v| format!("{}: {}", v.constraint, v.message)).collect();
            return Err(FnlsError::Inadmissible(msgs.join("; ")));
        }
    }
    if !(opts.tol > 0.0) {
        return Err(FnlsError::domain(format!("tolerance must be positive, got {}", opts.tol)));
    }

    let start = match init {
        InitialGuess::Gaussian => {
            let width = grid.lengths().iter().cloned().fold(f64::INFINITY, f64::min) / 8.0;
            ComplexField::gaussian(&grid, &vec![0.0; grid.ndim()], width, 1.0)
        }
        InitialGuess::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            random_smooth(&grid, &mut rng, true)
        }
        InitialGuess::Field(f) => {
            grid.ensure_same(f.grid())?;
            f
        }
    };
    let start = start.normalized_to(lambda)?;

    let ops = problem.ops();
    let symbol = ops.symbol(s);
    let mut tau = opts.tau.unwrap_or_else(|| default_tau(&grid, s));
    if !(tau > 0.0) {
        return Err(FnlsError::domain(format!("tau must be positive, got {tau}")));
    }

    let mut current = Iterate::new(problem, start)?;
    if let Some(moved) = recentred(problem, &current)? {
        current = moved;
    }
    let mut history = Vec::new();
    let mut warnings = Vec::new();
    let mut change = f64::INFINITY;
    let mut last_delta_e = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    loop {
        let (kappa, residual) = current.kappa_and_residual(problem, &symbol);
        history.push(HistoryEntry { iter: iterations, energy: current.energy, residual, kappa, tau });
        if current.energy.total < opts.energy_floor || current.u.max_abs() > opts.field_ceiling {
            return Err(FnlsError::BlowUp {
                iteration: iterations,
                reason: format!(
                    "energy {:e}, max |u| {:e}; the configuration may be critical or supercritical",
                    current.energy.total,
                    current.u.max_abs()
                ),
            });
        }
        if !current.energy.total.is_finite() {
            return Err(FnlsError::BlowUp { iteration: iterations, reason: "non-finite energy".into() });
        }
        if change < opts.tol && residual < 10.0 * opts.tol {
            converged = true;
            break;
        }
        if iterations >= opts.max_iters {
            break;
        }

        let shift = (-kappa).max(0.0);
        let mut halvings = 0;
        let next = loop {
            let mut spec: Vec<Complex64> = current
                .spectrum
                .iter()
                .zip(&current.nonlinear)
                .zip(&symbol)
                .map(|((u, n), &sym)| (u * (1.0 + tau * (kappa + shift)) + n * tau) / (1.0 + tau * (sym + shift)))
                .collect();
            ops.inverse_in_place(&mut spec);
            let candidate = ComplexField::new(grid.clone(), spec)?.normalized_to(lambda)?;
            let next = Iterate::new(problem, candidate)?;
            let increase = next.energy.total - current.energy.total;
            if increase <= DESCENT_TOLERANCE || halvings >= opts.max_halvings {
                if increase > DESCENT_TOLERANCE {
                    warnings.push(format!(
                        "iteration {iterations}: energy rose by {increase:e} after {halvings} halvings of tau"
                    ));
                }
                break next;
            }
            tau *= 0.5;
            halvings += 1;
        };
        let diff = next.u.sub(&current.u)?.l2_norm();
        change = diff / (tau * current.u.l2_norm());
        last_delta_e = (next.energy.total - current.energy.total).abs();
        current = next;
        iterations += 1;
        if iterations % RECENTRE_EVERY == 0 {
            if let Some(moved) = recentred(problem, &current)? {
                current = moved;
                change = f64::INFINITY;
            }
        }
    }

    let state = gauge_fix(&current.u)?;
    let final_iter = Iterate::new(problem, state)?;
    let (kappa, el_residual) = final_iter.kappa_and_residual(problem, &symbol);
    let hs_norm = (final_iter.energy.mass + 2.0 * final_iter.energy.kinetic).sqrt();
    let boundary_fraction = final_iter.u.boundary_mass_fraction(0.1);
    if boundary_fraction > opts.boundary_tolerance {
        warnings.push(format!(
            "outer 10% shell holds {boundary_fraction:.3e} of the mass; enlarge the box"
        ));
    }
    if !converged {
        warnings.push(format!("not converged after {iterations} iterations (residual {el_residual:.3e})"));
    }
    Ok(GroundStateResult {
        energy: final_iter.energy,
        state: final_iter.u,
        kappa,
        el_residual,
        hs_norm,
        energy_uncertainty: f64::max(el_residual * hs_norm * lambda.sqrt(), last_delta_e),
        iterations,
        converged,
        history,
        boundary_fraction,
        warnings,
    })
}

/// Remove the global phase (making `⟨|u|, u⟩` real positive) and move the
/// periodic centroid of `|u|²` to the nearest node of the box centre.
pub fn gauge_fix(u: &ComplexField) -> Result<ComplexField> {
    let mass = u.mass();
    if !(mass > 0.0) {
        return Err(FnlsError::ZeroField(mass));
    }
    let overlap: Complex64 = u.values().iter().map(|v| v * v.norm()).sum();
    let phase = if overlap.norm() > 0.0 { overlap.conj() / overlap.norm() } else { Complex64::new(1.0, 0.0) };
    let rotated = u.scaled(phase);

    let grid = u.grid();
    let shift = centroid_shift(grid, &rotated);
    let mut out = rotated.shifted(&shift);
    if overlap.norm() > 0.0 {
        // a real nonnegative input must come back bit-identical
        if u.values().iter().all(|v| v.im == 0.0 && v.re >= 0.0) {
            out = u.shifted(&shift);
        }
    }
    Ok(out)
}

/// Grid shift moving the periodic centroid of `|u|²` to index `n/2`.
pub fn centroid_shift(grid: &Grid, u: &ComplexField) -> Vec<i64> {
    let nd = grid.ndim();
    let mut moments = vec![Complex64::default(); nd];
    let phases: Vec<Vec<Complex64>> = grid
        .dims()
        .iter()
        .map(|&n| (0..n).map(|j| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / n as f64)).collect())
        .collect();
    crate::spectral::grid::for_each_multi_index(grid.dims(), |idx| {
        let w = u.values()[grid.flat_index(idx)].norm_sqr();
        for a in 0..nd {
            moments[a] += phases[a][idx[a]] * w;
        }
    });
    (0..nd)
        .map(|a| {
            let n = grid.dims()[a] as f64;
            let centroid = moments[a].arg().rem_euclid(2.0 * std::f64::consts::PI) * n / (2.0 * std::f64::consts::PI);
            (n / 2.0 - centroid).round() as i64
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvePoint {
    pub lambda: f64,
    pub energy: f64,
    pub kappa: f64,
    pub el_residual: f64,
    pub energy_uncertainty: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl CurvePoint {
    pub const CSV_HEADER: &'static str = "lambda,energy,kappa,residual,uncertainty,converged";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            fmt_f64(self.lambda),
            fmt_f64(self.energy),
            fmt_f64(self.kappa),
            fmt_f64(self.el_residual),
            fmt_f64(self.energy_uncertainty),
            self.converged
        )
    }

    fn from_result(lambda: f64, r: &GroundStateResult) -> Self {
        CurvePoint {
            lambda,
            energy: r.energy.total,
            kappa: r.kappa,
            el_residual: r.el_residual,
            energy_uncertainty: r.energy_uncertainty,
            converged: r.converged,
            iterations: r.iterations,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct MassEnergyCurve {
    pub points: Vec<CurvePoint>,
    pub failures: Vec<(f64, String)>,
}

/// Solve for each `λ` in turn, warm-starting from the previous minimiser
/// rescaled by `√(λ_new/λ_old)`. Failed masses are reported alongside the
/// successful ones.
pub fn mass_energy_curve(problem: &Problem, lambdas: &[f64], opts: &SolverOptions) -> MassEnergyCurve {
    let mut curve = MassEnergyCurve::default();
    let mut previous: Option<(f64, ComplexField)> = None;
    for &lambda in lambdas {
        let init = match &previous {
            Some((prev_lambda, state)) => {
                InitialGuess::Field(state.scaled(Complex64::new((lambda / prev_lambda).sqrt(), 0.0)))
            }
            None => InitialGuess::Gaussian,
        };
        match problem.with_mass(lambda).and_then(|p| solve_ground_state(&p, init, opts)) {
            Ok(r) => {
                curve.points.push(CurvePoint::from_result(lambda, &r));
                previous = Some((lambda, r.state));
            }
            Err(e) => curve.failures.push((lambda, e.to_string())),
        }
    }
    curve
}

/// Independent cold-started solves, run concurrently.
pub fn mass_energy_curve_parallel(problem: &Problem, lambdas: &[f64], opts: &SolverOptions) -> MassEnergyCurve {
    let results: Vec<_> = lambdas
        .par_iter()
        .map(|&lambda| {
            let r = problem.with_mass(lambda).and_then(|p| solve_ground_state(&p, InitialGuess::Gaussian, opts));
            (lambda, r)
        })
        .collect();
    let mut curve = MassEnergyCurve::default();
    for (lambda, r) in results {
        match r {
            Ok(r) => curve.points.push(CurvePoint::from_result(lambda, &r)),
            Err(e) => curve.failures.push((lambda, e.to_string())),
        }
    }
    curve
}
