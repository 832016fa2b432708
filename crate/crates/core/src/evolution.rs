//! Strang splitting for `i∂_tφ + (−Δ)^sφ = 𝒩(φ)`.
//!
//! The nonlinear sub-flow `i∂_tφ = W(x)φ` with real `W = (V⋆G(|φ|))F(|φ|)`
//! leaves `|φ|` unchanged, so `W` stays frozen along it and the sub-step
//! `φ ← e^{−iτW}φ` is exact. The linear sub-flow is exact in Fourier space,
//! `φ̂ ← e^{iτ|k|^{2s}}φ̂`. Both are unitary, so mass is conserved to roundoff.

use num_complex::Complex64;
use serde::Serialize;

use crate::analysis::orbit::{orbit_distance, ShiftSearch};
use crate::error::{FnlsError, Result};
use crate::functionals::Problem;
use crate::report::{fmt_f64, fmt_opt};
use crate::spectral::{ComplexField, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub mass: f64,
    pub energy_j: f64,
    pub linf: f64,
    pub orbit_distance: Option<f64>,
    /// `arg ∫ conj(u_ref)·φ`.
    pub overlap_phase: Option<f64>,
}

impl TrajectoryRecord {
    pub const CSV_HEADER: &'static str = "t,mass,energy_J,linf,orbit_distance,overlap_phase";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            fmt_f64(self.t),
            fmt_f64(self.mass),
            fmt_f64(self.energy_j),
            fmt_f64(self.linf),
            fmt_opt(self.orbit_distance),
            fmt_opt(self.overlap_phase)
        )
    }
}

/// `0.01·(π/k_max)^{2s}` with `k_max` the grid Nyquist wavenumber.
pub fn default_dt(grid: &Grid, s: f64) -> f64 {
    0.01 * (std::f64::consts::PI / grid.nyquist()).powf(2.0 * s)
}

/// Precomputed sub-flows for one `(problem, dt)`.
pub struct StrangStepper<'a> {
    problem: &'a Problem,
    dt: f64,
    linear: Vec<Complex64>,
}

impl<'a> StrangStepper<'a> {
    /// `dt` may be negative (backward in time).
    pub fn new(problem: &'a Problem, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt != 0.0) {
            return Err(FnlsError::domain(format!("time step must be finite and nonzero, got {dt}")));
        }
        let linear = problem.ops().symbol(problem.s()).iter().map(|&w| Complex64::from_polar(1.0, dt * w)).collect();
        Ok(StrangStepper { problem, dt, linear })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `φ ← e^{−i·fraction·dt·W}φ`.
    pub fn nonlinear(&self, phi: &mut ComplexField, fraction: f64) -> Result<()> {
        if self.problem.nonlinearity.is_linear() {
            return Ok(());
        }
        let (w, _) = self.problem.potential(phi)?;
        let tau = fraction * self.dt;
        for (v, wi) in phi.values_mut().iter_mut().zip(&w) {
            *v *= Complex64::from_polar(1.0, -tau * wi);
        }
        Ok(())
    }

    pub fn linear(&self, phi: &mut ComplexField) {
        let ops = self.problem.ops();
        let buf = phi.values_mut();
        ops.forward_in_place(buf);
        for (v, e) in buf.iter_mut().zip(&self.linear) {
            *v *= e;
        }
        ops.inverse_in_place(buf);
    }

    /// One N(dt/2)·L(dt)·N(dt/2) step.
    pub fn step(&self, phi: &mut ComplexField) -> Result<()> {
        self.nonlinear(phi, 0.5)?;
        self.linear(phi);
        self.nonlinear(phi, 0.5)
    }

    /// `steps` chained steps with adjacent nonlinear halves merged into one
    /// full nonlinear step.
    pub fn steps_fused(&self, phi: &mut ComplexField, steps: usize) -> Result<()> {
        if steps == 0 {
            return Ok(());
        }
        self.nonlinear(phi, 0.5)?;
        for k in 0..steps {
            self.linear(phi);
            self.nonlinear(phi, if k + 1 == steps { 0.5 } else { 1.0 })?;
        }
        Ok(())
    }
}

/// One Strang step of size `dt` (negative `dt` runs backwards).
pub fn step_strang(problem: &Problem, phi: &ComplexField, dt: f64) -> Result<ComplexField> {
    problem.grid().ensure_same(phi.grid())?;
    let mut out = phi.clone();
    StrangStepper::new(problem, dt)?.step(&mut out)?;
    if !out.is_finite() {
        return Err(FnlsError::NonFinite { t: dt });
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct EvolveOptions {
    pub t_final: f64,
    pub dt: f64,
    pub record_stride: usize,
    /// Merge nonlinear half-steps between records.
    pub fuse: bool,
    /// Translation search used for the orbit distance.
    pub shift_search: ShiftSearch,
}

impl EvolveOptions {
    pub fn new(t_final: f64, dt: f64) -> Self {
        EvolveOptions { t_final, dt, record_stride: 1, fuse: true, shift_search: ShiftSearch::default() }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<TrajectoryRecord>,
    /// Final state, or the last finite state if the run aborted.
    pub state: ComplexField,
    pub steps: usize,
    /// Actual step used, `T/steps`.
    pub dt: f64,
    pub failure: Option<String>,
}

impl Trajectory {
    pub fn max_mass_drift(&self) -> f64 {
        let m0 = self.records[0].mass;
        self.records.iter().map(|r| (r.mass - m0).abs() / m0).fold(0.0, f64::max)
    }

    pub fn max_energy_drift(&self) -> f64 {
        let e0 = self.records[0].energy_j;
        self.records.iter().map(|r| (r.energy_j - e0).abs()).fold(0.0, f64::max)
    }

    pub fn max_orbit_distance(&self) -> Option<f64> {
        self.records.iter().map(|r| r.orbit_distance).try_fold(0.0, |acc: f64, d| d.map(|d| acc.max(d)))
    }
}

pub fn record(problem: &Problem, phi: &ComplexField, t: f64, reference: Option<&ComplexField>, search: ShiftSearch) -> Result<TrajectoryRecord> {
    let energy = problem.energy(phi)?;
    let (orbit, phase) = match reference {
        Some(u) => {
            let d = orbit_distance(problem.ops(), phi, u, problem.s(), search)?;
            (Some(d.distance), Some(phi.l2_inner(u)?.arg()))
        }
        None => (None, None),
    };
    Ok(TrajectoryRecord {
        t,
        mass: energy.mass,
        energy_j: energy.total,
        linf: phi.max_abs(),
        orbit_distance: orbit,
        overlap_phase: phase,
    })
}

/// Integrate over `[0, T]` recording every `record_stride` steps (and at
/// the end). Each record is also passed to `sink`, together with the state
/// it describes, as soon as it exists, so an aborted run leaves its partial
/// trajectory behind.
pub fn evolve(
    problem: &Problem,
    phi0: &ComplexField,
    opts: &EvolveOptions,
    reference: Option<&ComplexField>,
    mut sink: impl FnMut(&TrajectoryRecord, &ComplexField) -> Result<()>,
) -> Result<Trajectory> {
    problem.grid().ensure_same(phi0.grid())?;
    if !(opts.t_final > 0.0) {
        return Err(FnlsError::domain(format!("final time must be positive, got {}", opts.t_final)));
    }
    if !(opts.dt > 0.0) {
        return Err(FnlsError::domain(format!("time step must be positive, got {}", opts.dt)));
    }
    if let Some(u) = reference {
        problem.grid().ensure_same(u.grid())?;
    }
    let stride = opts.record_stride.max(1);
    let steps = ((opts.t_final / opts.dt) - 1e-9).ceil().max(1.0) as usize;
    let dt = opts.t_final / steps as f64;
    let stepper = StrangStepper::new(problem, dt)?;

    let mut phi = phi0.clone();
    let first = record(problem, &phi, 0.0, reference, opts.shift_search)?;
    sink(&first, &phi)?;
    let mut records = vec![first];
    let mut done = 0;
    let mut failure = None;
    while done < steps {
        let block = stride.min(steps - done);
        let mut next = phi.clone();
        let advanced = if opts.fuse {
            stepper.steps_fused(&mut next, block)
        } else {
            (0..block).try_for_each(|_| stepper.step(&mut next))
        };
        let t = (done + block) as f64 * dt;
        if let Err(e) = advanced {
            failure = Some(e.to_string());
            break;
        }
        if !next.is_finite() {
            failure = Some(FnlsError::NonFinite { t }.to_string());
            break;
        }
        phi = next;
        done += block;
        let rec = record(problem, &phi, t, reference, opts.shift_search)?;
        sink(&rec, &phi)?;
        records.push(rec);
    }
    Ok(Trajectory { records, state: phi, steps: done, dt, failure })
}

/// `‖φ − e^{iκt}u‖_{H^s} / ‖u‖_{H^s}`.
pub fn standing_wave_error(problem: &Problem, phi: &ComplexField, u: &ComplexField, kappa: f64, t: f64) -> Result<f64> {
    let ops = problem.ops();
    let target = u.scaled(Complex64::from_polar(1.0, kappa * t));
    Ok(ops.hs_norm(&phi.sub(&target)?, problem.s())? / ops.hs_norm(u, problem.s())?)
}
