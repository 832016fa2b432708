//! Lévy concentration function `Q(r) = sup_y ∫_{B(y,r)} |u|²`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{FnlsError, Result};
use crate::spectral::{ComplexField, SpectralOps};

pub const COMPACT_FRACTION: f64 = 0.99;
pub const VANISHING_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Concentration {
    VanishingLike,
    DichotomyLike,
    CompactLike,
}

impl std::fmt::Display for Concentration {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Concentration::VanishingLike => "vanishing-like",
            Concentration::DichotomyLike => "dichotomy-like",
            Concentration::CompactLike => "compact-like",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationProfile {
    pub radii: Vec<f64>,
    pub q: Vec<f64>,
    pub mass: f64,
    /// Mass captured at the largest radius, `m∞ = Q(r_max)`.
    pub limit_mass: f64,
    pub classification: Concentration,
}

pub fn classify(limit_mass: f64, mass: f64) -> Concentration {
    if limit_mass >= COMPACT_FRACTION * mass {
        Concentration::CompactLike
    } else if limit_mass <= VANISHING_FRACTION * mass {
        Concentration::VanishingLike
    } else {
        Concentration::DichotomyLike
    }
}

/// `Q(r)` for each radius, maximising over all grid centres by a circular
/// FFT convolution of `|u|²` with the ball indicator (cell centres within
/// periodic distance `r`).
pub fn levy_concentration(ops: &SpectralOps, u: &ComplexField, radii: &[f64]) -> Result<ConcentrationProfile> {
    let grid = ops.grid();
    grid.ensure_same(u.grid())?;
    if radii.is_empty() {
        return Err(FnlsError::domain("no radii given"));
    }
    let half = grid.lengths().iter().cloned().fold(f64::INFINITY, f64::min) / 2.0;
    for (i, &r) in radii.iter().enumerate() {
        if !(r > 0.0) || r >= half {
            return Err(FnlsError::domain(format!("radius {r} outside (0, {half})")));
        }
        if i > 0 && r <= radii[i - 1] {
            return Err(FnlsError::domain("radii must be strictly increasing"));
        }
    }
    let mut density: Vec<Complex64> = u.values().iter().map(|v| Complex64::new(v.norm_sqr(), 0.0)).collect();
    ops.forward_in_place(&mut density);
    let dv = grid.cell_volume();
    let mass = u.mass();
    let r2 = grid.r_squared();

    let mut q = Vec::with_capacity(radii.len());
    let mut running = 0.0f64;
    for &r in radii {
        // the centred ball moved to the origin makes the convolution a
        // correlation about every node
        let centre: Vec<i64> = grid.dims().iter().map(|&n| -((n / 2) as i64)).collect();
        let ball = ComplexField::new(
            grid.clone(),
            r2.iter().map(|&d| Complex64::new(if d <= r * r { 1.0 } else { 0.0 }, 0.0)).collect(),
        )?
        .shifted(&centre);
        let mut conv = ops.forward(&ball)?;
        for (c, d) in conv.iter_mut().zip(&density) {
            *c = d * c.conj();
        }
        ops.inverse_in_place(&mut conv);
        let best = conv.iter().map(|c| c.re).fold(0.0, f64::max) * dv;
        // nested balls: only roundoff can make this decrease
        running = running.max(best).min(mass);
        q.push(running);
    }
    let limit_mass = *q.last().expect("nonempty");
    Ok(ConcentrationProfile { radii: radii.to_vec(), q, mass, limit_mass, classification: classify(limit_mass, mass) })
}
