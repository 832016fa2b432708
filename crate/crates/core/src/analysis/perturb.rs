//! Deterministic smooth test fields and ground-state perturbations.

use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{FnlsError, Result};
use crate::spectral::{ComplexField, Grid, SpectralOps};

/// Sum of four Gaussians with random centres in the middle third of the
/// box, widths in `[L/16, L/8]` and amplitudes in `[0.5, 1.5]` (with a
/// random phase each when `complex`).
pub fn random_smooth<R: Rng>(grid: &Grid, rng: &mut R, complex: bool) -> ComplexField {
    let nd = grid.ndim();
    let lmin = grid.lengths().iter().cloned().fold(f64::INFINITY, f64::min);
    let bumps: Vec<(Vec<f64>, f64, Complex64)> = (0..4)
        .map(|_| {
            let centre = grid.lengths().iter().map(|l| rng.random_range(-l / 6.0..l / 6.0)).collect();
            let width = rng.random_range(lmin / 16.0..lmin / 8.0);
            let amp = rng.random_range(0.5..1.5);
            let phase = if complex { rng.random_range(0.0..std::f64::consts::TAU) } else { 0.0 };
            (centre, width, Complex64::from_polar(amp, phase))
        })
        .collect();
    ComplexField::from_fn(grid, |x| {
        bumps
            .iter()
            .map(|(c, w, a)| {
                let r2: f64 = (0..nd).map(|i| (x[i] - c[i]).powi(2)).sum();
                a * (-r2 / (2.0 * w * w)).exp()
            })
            .sum()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationKind {
    /// Complex random smooth field.
    RandomSmooth,
    /// Shape change `|u|·cos(x₁/ℓ)` with `ℓ` the width of `|u|²`.
    ModeBump,
    /// Momentum kick `u·e^{iδθ(x)}` with `θ` a periodic ramp along `x₁`.
    PhaseRamp,
}

impl PerturbationKind {
    pub const ALL: [PerturbationKind; 3] = [PerturbationKind::RandomSmooth, PerturbationKind::ModeBump, PerturbationKind::PhaseRamp];
}

impl FromStr for PerturbationKind {
    type Err = FnlsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random-smooth" => Ok(PerturbationKind::RandomSmooth),
            "mode-bump" => Ok(PerturbationKind::ModeBump),
            "phase-ramp" => Ok(PerturbationKind::PhaseRamp),
            other => Err(FnlsError::domain(format!("unknown perturbation kind '{other}'"))),
        }
    }
}

impl std::fmt::Display for PerturbationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PerturbationKind::RandomSmooth => "random-smooth",
            PerturbationKind::ModeBump => "mode-bump",
            PerturbationKind::PhaseRamp => "phase-ramp",
        })
    }
}

/// Perturbed initial state with the mass of `u`. The perturbation is scaled
/// to `‖ξ‖_{H^s} = ‖u‖_{H^s}`, so `δ` is a relative size.
pub fn perturb<R: Rng>(ops: &SpectralOps, u: &ComplexField, s: f64, kind: PerturbationKind, delta: f64, rng: &mut R) -> Result<ComplexField> {
    let grid = ops.grid();
    grid.ensure_same(u.grid())?;
    let norm = ops.hs_norm(u, s)?;
    if !(norm > 0.0) {
        return Err(FnlsError::ZeroField(u.mass()));
    }
    if delta == 0.0 {
        return Ok(u.clone());
    }
    let x1 = grid.coords(0);
    let stride = grid.stride(0);
    let n1 = grid.dims()[0];
    let axis_coord = |i: usize| x1[(i / stride) % n1];
    let xi = match kind {
        PerturbationKind::RandomSmooth => random_smooth(grid, rng, true),
        PerturbationKind::ModeBump => {
            let mass = u.mass();
            let spread = (u.values().iter().enumerate().map(|(i, v)| v.norm_sqr() * axis_coord(i).powi(2)).sum::<f64>()
                * grid.cell_volume()
                / mass)
                .sqrt()
                .max(grid.spacing(0));
            let values = u.values().iter().enumerate().map(|(i, v)| Complex64::new(v.norm() * (axis_coord(i) / spread).cos(), 0.0)).collect();
            ComplexField::new(grid.clone(), values)?
        }
        PerturbationKind::PhaseRamp => {
            let l = grid.lengths()[0];
            let theta: Vec<f64> = (0..grid.len()).map(|i| l / std::f64::consts::TAU * (std::f64::consts::TAU * axis_coord(i) / l).sin()).collect();
            let tu = ComplexField::new(grid.clone(), u.values().iter().zip(&theta).map(|(v, t)| v * t).collect())?;
            let scale = norm / ops.hs_norm(&tu, s)?;
            let values = u.values().iter().zip(&theta).map(|(v, t)| v * Complex64::from_polar(1.0, delta * scale * t)).collect();
            return ComplexField::new(grid.clone(), values);
        }
    };
    let xi_norm = ops.hs_norm(&xi, s)?;
    let kicked = u.axpy(Complex64::new(delta * norm / xi_norm, 0.0), &xi)?;
    kicked.normalized_to(u.mass())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_smooth_is_seeded() {
        let grid = Grid::cubic(2, 16, 8.0).unwrap();
        let a = random_smooth(&grid, &mut ChaCha8Rng::seed_from_u64(3), true);
        let b = random_smooth(&grid, &mut ChaCha8Rng::seed_from_u64(3), true);
        let c = random_smooth(&grid, &mut ChaCha8Rng::seed_from_u64(4), true);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn perturbations_keep_mass_and_scale_with_delta() {
        let grid = Grid::cubic(1, 128, 20.0).unwrap();
        let ops = SpectralOps::new(&grid);
        let u = ComplexField::gaussian(&grid, &[0.0], 1.0, 1.0);
        let norm = ops.hs_norm(&u, 0.7).unwrap();
        for kind in PerturbationKind::ALL {
            for delta in [1e-3, 1e-2] {
                let mut rng = ChaCha8Rng::seed_from_u64(9);
                let p = perturb(&ops, &u, 0.7, kind, delta, &mut rng).unwrap();
                assert!((p.mass() - u.mass()).abs() < 1e-13);
                let d = ops.hs_norm(&p.sub(&u).unwrap(), 0.7).unwrap() / norm;
                assert!(d > 0.0 && d <= 1.5 * delta, "{kind} {delta}: {d}");
            }
        }
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in PerturbationKind::ALL {
            assert_eq!(kind.to_string().parse::<PerturbationKind>().unwrap(), kind);
        }
        assert!("bogus".parse::<PerturbationKind>().is_err());
    }
}
