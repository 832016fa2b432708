//! `H^s` distance from a field to the orbit `{e^{iσ}w(·−y)}` of a ground
//! state, over translations `y` and phases `σ`.

use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{FnlsError, Result};
use crate::spectral::grid::{for_each_multi_index, signed_mode};
use crate::spectral::{ComplexField, SpectralOps};

/// How far the translation search goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftSearch {
    /// Peak of the `L²` cross-correlation only.
    Grid,
    /// Also the `3^N` neighbouring grid shifts, scored in `H^s`.
    #[default]
    Neighborhood,
    /// Neighbourhood, then a continuous (band-limited) shift within one
    /// cell. Needed when the state drifts between nodes.
    SubGrid,
}

impl FromStr for ShiftSearch {
    type Err = FnlsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(ShiftSearch::Grid),
            "neighborhood" => Ok(ShiftSearch::Neighborhood),
            "sub-grid" => Ok(ShiftSearch::SubGrid),
            other => Err(FnlsError::domain(format!("unknown shift search '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitDistanceResult {
    /// `‖φ − e^{iσ}w(·−y)‖_{H^s}` at the optimum.
    pub distance: f64,
    /// Grid part of `y` (same convention as [`ComplexField::shifted`]).
    pub best_shift: Vec<i64>,
    /// Fractional part of `y` in grid units; zero unless sub-grid search.
    pub subgrid_offset: Vec<f64>,
    pub best_phase: f64,
}

struct Correlator<'a> {
    /// `(1 + |k|^{2s}) φ̂ conj(ŵ)` per mode.
    weighted: Vec<Complex64>,
    /// `2π m_a / n_a` per axis and spectral index.
    angles: Vec<Vec<f64>>,
    ops: &'a SpectralOps,
}

impl Correlator<'_> {
    /// `⟨φ, w(·−y)⟩_{H^s}` for a shift `y` in grid units.
    fn at(&self, y: &[f64]) -> Complex64 {
        let grid = self.ops.grid();
        let mut sum = Complex64::default();
        let mut i = 0;
        let phases: Vec<Vec<Complex64>> =
            self.angles.iter().zip(y).map(|(ang, &ya)| ang.iter().map(|t| Complex64::from_polar(1.0, t * ya)).collect()).collect();
        for_each_multi_index(grid.dims(), |idx| {
            let mut e = Complex64::new(1.0, 0.0);
            for (a, &m) in idx.iter().enumerate() {
                e *= phases[a][m];
            }
            sum += self.weighted[i] * e;
            i += 1;
        });
        sum * self.ops.parseval_weight()
    }
}

/// Distance from `phi` to the orbit of `w`.
///
/// The grid shift maximises the `L²` cross-correlation `|⟨φ, w(·−y)⟩|`,
/// computed for all grid shifts at once by FFT. Given the shift the phase is
/// `σ = arg⟨φ, w(·−y)⟩_{H^s}`.
pub fn orbit_distance(ops: &SpectralOps, phi: &ComplexField, w: &ComplexField, s: f64, search: ShiftSearch) -> Result<OrbitDistanceResult> {
    let grid = ops.grid();
    grid.ensure_same(phi.grid())?;
    grid.ensure_same(w.grid())?;
    if !(w.mass() > 0.0) {
        return Err(FnlsError::ZeroField(w.mass()));
    }
    let a = ops.forward(phi)?;
    let b = ops.forward(w)?;
    let weights: Vec<f64> = ops.k_squared().iter().map(|&k2| 1.0 + if k2 == 0.0 { 0.0 } else { k2.powf(s) }).collect();

    let mut l2: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * y.conj()).collect();
    ops.inverse_in_place(&mut l2);
    let weighted: Vec<Complex64> = a.iter().zip(&b).zip(&weights).map(|((x, y), wt)| x * y.conj() * wt).collect();
    let mut hs = weighted.clone();
    ops.inverse_in_place(&mut hs);

    let peak = l2
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, c)| if c.norm() > best.1 { (i, c.norm()) } else { best })
        .0;
    let dims = grid.dims();
    let nd = dims.len();
    let centre = grid.multi_index(peak);

    let mut candidates = vec![centre.clone()];
    if search != ShiftSearch::Grid {
        for_each_multi_index(&vec![3; nd], |off| {
            if off.iter().all(|&o| o == 1) {
                return;
            }
            candidates.push((0..nd).map(|a| (centre[a] + dims[a] + off[a] - 1) % dims[a]).collect());
        });
    }
    // ‖φ − e^{iσ}w_y‖² = ‖φ‖² + ‖w‖² − 2|c(y)|, so the best candidate has
    // the largest |c|
    let best = candidates
        .iter()
        .map(|idx| grid.flat_index(idx))
        .fold((0usize, f64::NEG_INFINITY), |acc, i| if hs[i].norm() > acc.1 { (i, hs[i].norm()) } else { acc })
        .0;
    let shift: Vec<i64> = grid.multi_index(best).iter().zip(dims).map(|(&m, &n)| signed_mode(m, n)).collect();

    let correlator = Correlator {
        weighted,
        angles: dims.iter().map(|&n| (0..n).map(|m| std::f64::consts::TAU * signed_mode(m, n) as f64 / n as f64).collect()).collect(),
        ops,
    };
    let mut y: Vec<f64> = shift.iter().map(|&v| v as f64).collect();
    if search == ShiftSearch::SubGrid {
        for _sweep in 0..2 {
            for axis in 0..nd {
                let base = y.clone();
                let score = |t: f64| {
                    let mut trial = base.clone();
                    trial[axis] = base[axis] + t;
                    correlator.at(&trial).norm()
                };
                y[axis] = base[axis] + golden_max(score, -1.0, 1.0, 1e-9);
            }
        }
    }
    let c = correlator.at(&y);
    let phase = if c.norm() > 0.0 { c.arg() } else { 0.0 };

    // distance evaluated mode by mode to avoid cancellation
    let rot = Complex64::from_polar(1.0, phase);
    let mut i = 0;
    let mut d2 = 0.0;
    let phases: Vec<Vec<Complex64>> =
        correlator.angles.iter().zip(&y).map(|(ang, &ya)| ang.iter().map(|t| Complex64::from_polar(1.0, -t * ya)).collect()).collect();
    for_each_multi_index(dims, |idx| {
        let mut e = rot;
        for (ax, &m) in idx.iter().enumerate() {
            e *= phases[ax][m];
        }
        d2 += (a[i] - b[i] * e).norm_sqr() * weights[i];
        i += 1;
    });
    let distance = (d2 * ops.parseval_weight()).sqrt();
    let subgrid_offset = y.iter().zip(&shift).map(|(yf, &si)| yf - si as f64).collect();
    Ok(OrbitDistanceResult { distance, best_shift: shift, subgrid_offset, best_phase: phase })
}

/// Golden-section maximisation of a unimodal `f` on `[lo, hi]`.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        }
    }
    let mid = 0.5 * (lo + hi);
    // never worse than the grid optimum
    if f(0.0) >= f(mid) {
        0.0
    } else {
        mid
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;

    fn bump(grid: &Grid) -> ComplexField {
        ComplexField::from_fn(grid, |x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            Complex64::new((-r2).exp() * (1.0 + 0.3 * x[0]), 0.0)
        })
    }

    #[test]
    fn exact_orbit_element_has_zero_distance() {
        let grid = Grid::new(vec![32, 16], vec![12.0, 8.0]).unwrap();
        let ops = SpectralOps::new(&grid);
        let w = bump(&grid);
        let phi = w.shifted(&[5, -3]).scaled(Complex64::from_polar(1.0, 0.7));
        for search in [ShiftSearch::Grid, ShiftSearch::Neighborhood, ShiftSearch::SubGrid] {
            let r = orbit_distance(&ops, &phi, &w, 0.6, search).unwrap();
            assert!(r.distance <= 1e-10, "{:e}", r.distance);
            assert!((r.best_phase - 0.7).abs() <= 1e-10);
            assert_eq!(r.best_shift, vec![5, -3]);
        }
    }

    #[test]
    fn zero_field_is_at_distance_norm_w() {
        let grid = Grid::cubic(1, 64, 10.0).unwrap();
        let ops = SpectralOps::new(&grid);
        let w = bump(&grid);
        let r = orbit_distance(&ops, &ComplexField::zeros(&grid), &w, 0.7, ShiftSearch::Neighborhood).unwrap();
        let norm = ops.hs_norm(&w, 0.7).unwrap();
        assert!((r.distance - norm).abs() <= 1e-12 * norm);
    }

    #[test]
    fn zero_reference_is_an_error() {
        let grid = Grid::cubic(1, 16, 4.0).unwrap();
        let ops = SpectralOps::new(&grid);
        let w = ComplexField::zeros(&grid);
        assert!(orbit_distance(&ops, &w, &w, 0.5, ShiftSearch::Grid).is_err());
    }

    #[test]
    fn invariant_under_orbit_action_on_phi() {
        let grid = Grid::cubic(1, 64, 12.0).unwrap();
        let ops = SpectralOps::new(&grid);
        let w = bump(&grid);
        let phi = ComplexField::from_fn(&grid, |x| Complex64::new(0.5 * (-(x[0] - 0.4).powi(2)).exp(), 0.1 * (-x[0] * x[0]).exp()));
        for search in [ShiftSearch::Neighborhood, ShiftSearch::SubGrid] {
            let d0 = orbit_distance(&ops, &phi, &w, 0.7, search).unwrap().distance;
            let moved = phi.shifted(&[7]).scaled(Complex64::from_polar(1.0, -2.1));
            let d1 = orbit_distance(&ops, &moved, &w, 0.7, search).unwrap().distance;
            assert!((d0 - d1).abs() <= 1e-10);
        }
    }

    #[test]
    fn subgrid_recovers_fractional_translation() {
        let grid = Grid::cubic(1, 128, 20.0).unwrap();
        let ops = SpectralOps::new(&grid);
        let w = ComplexField::gaussian(&grid, &[0.0], 1.0, 1.0);
        let h = grid.spacing(0);
        let phi = ComplexField::gaussian(&grid, &[3.37 * h], 1.0, 1.0);
        let coarse = orbit_distance(&ops, &phi, &w, 0.7, ShiftSearch::Neighborhood).unwrap();
        let fine = orbit_distance(&ops, &phi, &w, 0.7, ShiftSearch::SubGrid).unwrap();
        assert_eq!(fine.best_shift, vec![3]);
        assert!((fine.subgrid_offset[0] - 0.37).abs() < 1e-6);
        assert!(fine.distance < 1e-7 && coarse.distance > 1e-2, "{} {}", fine.distance, coarse.distance);
    }
}
