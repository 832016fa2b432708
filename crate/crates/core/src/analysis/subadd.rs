//! Checks on the mass–energy curve `λ ↦ I_λ`: strict subadditivity, the
//! `θ`-scaling inequality, continuity and the small-mass limit.

use serde::Serialize;

use crate::error::{FnlsError, Result};
use crate::ground_state::CurvePoint;
use crate::model::PhysicsParams;

/// Margin factor on the summed energy uncertainties.
pub const MARGIN_FACTOR: f64 = 10.0;

pub fn lookup(curve: &[CurvePoint], lambda: f64) -> Result<&CurvePoint> {
    curve
        .iter()
        .find(|p| (p.lambda - lambda).abs() <= 1e-12 * lambda.abs().max(1.0))
        .ok_or_else(|| FnlsError::Missing(format!("no curve point at lambda = {lambda}")))
}

#[derive(Debug, Clone, Serialize)]
pub struct SubadditivityRow {
    pub lambda: f64,
    pub pi: f64,
    pub i_lambda: f64,
    pub i_pi: f64,
    pub i_rest: f64,
    /// `I_π + I_{λ−π} − I_λ`
    pub gap: f64,
    pub margin: f64,
    pub holds: bool,
}

/// `I_λ < I_π + I_{λ−π} − margin` with margin ten times the summed
/// uncertainties of the three energies.
pub fn subadditivity_check(curve: &[CurvePoint], pairs: &[(f64, f64)]) -> Result<Vec<SubadditivityRow>> {
    pairs
        .iter()
        .map(|&(pi, lambda)| {
            let a = lookup(curve, lambda)?;
            let b = lookup(curve, pi)?;
            let c = lookup(curve, lambda - pi)?;
            let gap = b.energy + c.energy - a.energy;
            let margin = MARGIN_FACTOR * (a.energy_uncertainty + b.energy_uncertainty + c.energy_uncertainty);
            Ok(SubadditivityRow { lambda, pi, i_lambda: a.energy, i_pi: b.energy, i_rest: c.energy, gap, margin, holds: gap > margin })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ThetaRow {
    pub theta: f64,
    pub i_theta_lambda: f64,
    /// `θ^{κ̃(1+2s/N)}·I_λ`
    pub bound: f64,
    pub holds: bool,
}

/// `I_{θλ} ≤ θ^{κ̃(1+2s/N)} I_λ` for every curve point `θλ ≤ λ`, up to
/// the two energy uncertainties.
pub fn theta_scaling_check(curve: &[CurvePoint], lambda: f64, params: &PhysicsParams, kappa_tilde: f64) -> Result<Vec<ThetaRow>> {
    let top = lookup(curve, lambda)?;
    let exponent = kappa_tilde * (1.0 + 2.0 * params.frac_order / params.dim_f());
    Ok(curve
        .iter()
        .filter(|p| p.lambda > 0.0 && p.lambda <= lambda * (1.0 + 1e-12))
        .map(|p| {
            let theta = p.lambda / lambda;
            let scale = theta.powf(exponent);
            let bound = scale * top.energy;
            let slack = p.energy_uncertainty + scale * top.energy_uncertainty;
            ThetaRow { theta, i_theta_lambda: p.energy, bound, holds: p.energy <= bound + slack }
        })
        .collect())
}

/// `|I_{λ(1+ε)} − I_λ|` for each `ε`; continuity asks these to shrink.
pub fn continuity_proxy(curve: &[CurvePoint], lambda: f64, epsilons: &[f64]) -> Result<Vec<(f64, f64)>> {
    let base = lookup(curve, lambda)?.energy;
    epsilons.iter().map(|&e| Ok((e, (lookup(curve, lambda * (1.0 + e))?.energy - base).abs()))).collect()
}

/// All energies negative and `|I_λ|` strictly increasing in `λ`.
pub fn small_mass_limit(curve: &[CurvePoint]) -> bool {
    let mut pts: Vec<&CurvePoint> = curve.iter().collect();
    pts.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    pts.iter().all(|p| p.energy < 0.0) && pts.windows(2).all(|w| w[0].energy.abs() < w[1].energy.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(lambda: f64, energy: f64) -> CurvePoint {
        CurvePoint { lambda, energy, kappa: 0.0, el_residual: 0.0, energy_uncertainty: 1e-9, converged: true, iterations: 1 }
    }

    /// `I_λ = −λ^e` with `e > 1` is strictly subadditive.
    fn power_curve(e: f64) -> Vec<CurvePoint> {
        [0.1, 0.25, 0.5, 0.75, 1.0].iter().map(|&l| point(l, -f64::powf(l, e))).collect()
    }

    #[test]
    fn power_law_is_subadditive() {
        let rows = subadditivity_check(&power_curve(2.0), &[(0.5, 1.0), (0.25, 1.0)]).unwrap();
        assert!(rows.iter().all(|r| r.holds));
        assert!((rows[0].gap - 0.5).abs() < 1e-14);
    }

    #[test]
    fn linear_curve_is_not_strictly_subadditive() {
        let curve: Vec<_> = [0.5, 1.0].iter().map(|&l| point(l, -l)).collect();
        assert!(!subadditivity_check(&curve, &[(0.5, 1.0)]).unwrap()[0].holds);
    }

    #[test]
    fn missing_point_is_an_error() {
        assert!(matches!(subadditivity_check(&power_curve(2.0), &[(0.3, 1.0)]), Err(FnlsError::Missing(_))));
    }

    #[test]
    fn theta_check_follows_exponents() {
        let params = PhysicsParams::new(1, 0.7, 0.8, 1.0).unwrap();
        // exponent 1 + 1.4 = 2.4 against a curve of power 2.1667
        let rows = theta_scaling_check(&power_curve(2.1667), 1.0, &params, 1.0).unwrap();
        assert!(rows.iter().all(|r| r.holds));
        let rows = theta_scaling_check(&power_curve(2.6), 1.0, &params, 1.0).unwrap();
        assert!(rows.iter().any(|r| !r.holds));
    }

    #[test]
    fn small_mass_ordering() {
        assert!(small_mass_limit(&power_curve(2.0)));
        let mut c = power_curve(2.0);
        c[0].energy = 0.1;
        assert!(!small_mass_limit(&c));
    }
}
