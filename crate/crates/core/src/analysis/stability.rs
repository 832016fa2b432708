//! Orbital stability experiment: perturb a ground state, evolve, and track
//! the `H^s` distance to its orbit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::orbit::ShiftSearch;
use super::perturb::{perturb, PerturbationKind};
use super::scaling::fit_line;
use crate::error::Result;
use crate::evolution::{evolve, EvolveOptions};
use crate::functionals::Problem;
use crate::report::{fmt_f64, fmt_opt};
use crate::spectral::ComplexField;

#[derive(Debug, Clone, Serialize)]
pub struct StabilityRow {
    pub delta: f64,
    pub kind: PerturbationKind,
    pub initial_distance: Option<f64>,
    pub sup_distance: Option<f64>,
    pub error: Option<String>,
}

impl StabilityRow {
    pub const CSV_HEADER: &'static str = "delta,kind,initial_distance,sup_distance,error";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            fmt_f64(self.delta),
            self.kind,
            fmt_opt(self.initial_distance),
            fmt_opt(self.sup_distance),
            self.error.as_deref().unwrap_or("").replace(',', ";")
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KindFit {
    pub kind: PerturbationKind,
    /// Slope of `log sup_t d` against `log δ` over the `δ > 0` rows.
    pub slope: Option<f64>,
    pub r_squared: Option<f64>,
    /// `max sup_t d / δ`.
    pub constant: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub rows: Vec<StabilityRow>,
    pub fits: Vec<KindFit>,
    pub hs_norm: f64,
    /// `max_rows sup_t d / ‖u‖_{H^s}`.
    pub max_relative_distance: f64,
}

#[derive(Debug, Clone)]
pub struct StabilitySetup {
    pub deltas: Vec<f64>,
    pub kinds: Vec<PerturbationKind>,
    pub t_final: f64,
    pub dt: f64,
    pub record_stride: usize,
    pub seed: u64,
    pub shift_search: ShiftSearch,
}

/// One trajectory per `(δ, kind)`, run concurrently. Failed rows carry
/// their error instead of a distance.
pub fn stability_experiment(problem: &Problem, ground_state: &ComplexField, setup: &StabilitySetup) -> Result<StabilityReport> {
    let s = problem.s();
    let ops = problem.ops();
    let hs_norm = ops.hs_norm(ground_state, s)?;
    let jobs: Vec<(usize, f64, PerturbationKind)> = setup
        .kinds
        .iter()
        .enumerate()
        .flat_map(|(ki, &k)| setup.deltas.iter().map(move |&d| (ki, d, k)))
        .collect();

    let rows: Vec<StabilityRow> = jobs
        .par_iter()
        .map(|&(ki, delta, kind)| {
            let run = || -> Result<(f64, f64)> {
                let mut rng = ChaCha8Rng::seed_from_u64(setup.seed.wrapping_add(ki as u64));
                let phi0 = perturb(ops, ground_state, s, kind, delta, &mut rng)?;
                let mut opts = EvolveOptions::new(setup.t_final, setup.dt);
                opts.record_stride = setup.record_stride;
                opts.shift_search = setup.shift_search;
                let traj = evolve(problem, &phi0, &opts, Some(ground_state), |_, _| Ok(()))?;
                if let Some(f) = traj.failure {
                    return Err(crate::FnlsError::Domain(format!("trajectory aborted: {f}")));
                }
                let d0 = traj.records[0].orbit_distance.unwrap_or(f64::NAN);
                Ok((d0, traj.max_orbit_distance().unwrap_or(f64::NAN)))
            };
            match run() {
                Ok((d0, sup)) => StabilityRow { delta, kind, initial_distance: Some(d0), sup_distance: Some(sup), error: None },
                Err(e) => StabilityRow { delta, kind, initial_distance: None, sup_distance: None, error: Some(e.to_string()) },
            }
        })
        .collect();

    let fits = setup
        .kinds
        .iter()
        .map(|&kind| {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.kind == kind && r.delta > 0.0)
                .filter_map(|r| r.sup_distance.filter(|d| *d > 0.0).map(|d| (r.delta, d)))
                .collect();
            if pts.len() < 2 {
                return KindFit { kind, slope: None, r_squared: None, constant: None };
            }
            let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
            let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
            let fit = fit_line(&xs, &ys);
            let constant = pts.iter().map(|(d, sup)| sup / d).fold(0.0, f64::max);
            KindFit { kind, slope: Some(fit.slope), r_squared: Some(fit.r_squared), constant: Some(constant) }
        })
        .collect();
    let max_relative_distance = rows.iter().filter_map(|r| r.sup_distance).fold(0.0, f64::max) / hs_norm;
    Ok(StabilityReport { rows, fits, hs_norm, max_relative_distance })
}
