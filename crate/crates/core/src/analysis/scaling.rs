//! Homogeneity exponents: dilation slopes of the energy terms and the
//! Gagliardo–Nirenberg / Hardy–Littlewood–Sobolev split of the Hartree
//! pairings between `‖·‖₂` and `‖·‖_{Ḣ^s}`.

use serde::Serialize;

use crate::error::{FnlsError, Result};
use crate::functionals::Problem;
use crate::model::{NonlinearitySpec, PhysicsParams};
use crate::spectral::ComplexField;

pub const MIN_R_SQUARED: f64 = 0.999;
pub const MIN_SAMPLES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares line. A constant response has `R² = 1`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if syy <= 1e-28 * (1.0 + my * my) { 1.0 } else { 1.0 - sse / syy };
    LineFit { slope, intercept, r_squared }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentFit {
    pub name: String,
    pub predicted: f64,
    pub fitted: f64,
    /// `|fitted − predicted| / max(|predicted|, 1e-12)`
    pub rel_error: f64,
    pub abs_error: f64,
    pub r_squared: f64,
    /// `R²` below [`MIN_R_SQUARED`] or fewer than [`MIN_SAMPLES`] points.
    pub flagged: bool,
    pub sample_points: Vec<(f64, f64)>,
}

impl ExponentFit {
    pub fn from_samples(name: impl Into<String>, predicted: f64, sample_points: Vec<(f64, f64)>) -> Self {
        let (xs, ys): (Vec<f64>, Vec<f64>) = sample_points.iter().cloned().unzip();
        let fit = fit_line(&xs, &ys);
        let abs_error = (fit.slope - predicted).abs();
        ExponentFit {
            name: name.into(),
            predicted,
            fitted: fit.slope,
            rel_error: abs_error / predicted.abs().max(1e-12),
            abs_error,
            r_squared: fit.r_squared,
            flagged: fit.r_squared < MIN_R_SQUARED || sample_points.len() < MIN_SAMPLES,
            sample_points,
        }
    }
}

/// `ladder` geometric points from `lo` to `hi`.
pub fn geometric_ladder(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| lo * (hi / lo).powf(i as f64 / (points - 1) as f64)).collect()
}

/// Pure-power components `(c, α)` of `G`.
fn components(spec: &NonlinearitySpec) -> Vec<(&'static str, f64)> {
    let mut out = Vec::new();
    if spec.c2 != 0.0 {
        out.push(("2", 2.0));
    }
    if spec.cmu != 0.0 {
        out.push(("mu", spec.mu));
    }
    out
}

fn power(u: &ComplexField, alpha: f64) -> Vec<f64> {
    u.values().iter().map(|v| v.norm().powf(alpha)).collect()
}

/// Slopes of `log(·)` against `log κ` along `u_κ = κ^{1/2}u(κ^{1/N}·)` for
/// the mass (0), the kinetic term (`2s/N`) and every pairing
/// `𝒟(|u|^{α_i}, |u|^{α_j})` (`(α_i+α_j)/2 − (1+β/N)`).
pub fn scaling_exponents(problem: &Problem, u: &ComplexField, kappas: &[f64]) -> Result<Vec<ExponentFit>> {
    let ops = problem.ops();
    let s = problem.s();
    let nd = problem.params.dim_f();
    let beta = problem.params.kernel_exponent;
    let comps = components(&problem.nonlinearity);
    let pairs: Vec<(usize, usize)> = (0..comps.len()).flat_map(|i| (i..comps.len()).map(move |j| (i, j))).collect();

    let mut mass = Vec::new();
    let mut kinetic = Vec::new();
    let mut pairings = vec![Vec::new(); pairs.len()];
    for &kappa in kappas {
        let uk = ops.dilate(u, kappa)?;
        let lk = kappa.ln();
        mass.push((lk, uk.mass().ln()));
        kinetic.push((lk, ops.kinetic(&uk, s)?.ln()));
        for (p, &(i, j)) in pairs.iter().enumerate() {
            let d = problem.interaction_d(&power(&uk, comps[i].1), &power(&uk, comps[j].1))?;
            pairings[p].push((lk, d.ln()));
        }
    }
    let mut out = vec![
        ExponentFit::from_samples("mass", 0.0, mass),
        ExponentFit::from_samples("kinetic", 2.0 * s / nd, kinetic),
    ];
    for (p, &(i, j)) in pairs.iter().enumerate() {
        let predicted = (comps[i].1 + comps[j].1) / 2.0 - (1.0 + beta / nd);
        out.push(ExponentFit::from_samples(format!("D_{}_{}", comps[i].0, comps[j].0), predicted, std::mem::take(&mut pairings[p])));
    }
    Ok(out)
}

/// `γ_{ij} = (N/s)(1+β/N) − (N/(2s) − 1)(μ_i + μ_j)`.
pub fn gamma(params: &PhysicsParams, mu_i: f64, mu_j: f64) -> f64 {
    let n = params.dim_f();
    let s = params.frac_order;
    n / s * (1.0 + params.kernel_exponent / n) - (n / (2.0 * s) - 1.0) * (mu_i + mu_j)
}

/// Young exponents `(e₁, e₂, e₃)` of the λ-powers in the coercivity bound.
pub fn young_exponents(params: &PhysicsParams, mu: f64) -> [f64; 3] {
    let n = params.dim_f();
    let s = params.frac_order;
    let b = params.kernel_exponent;
    [
        (4.0 * s + b - n) / (2.0 * s + b - n),
        (2.0 * s * mu + b - n * (mu - 1.0)) / (2.0 * s + b - n * (mu - 1.0)),
        1.0 + 2.0 * s * mu / (4.0 * s - n * mu + 2.0 * b),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct PairingBound {
    pub i: usize,
    pub j: usize,
    pub mu_i: f64,
    pub mu_j: f64,
    /// Exponent of `‖u‖₂`.
    pub gamma: f64,
    /// Exponent of `‖u‖_{Ḣ^s}`, `μ_i + μ_j − γ`.
    pub hs_exponent: f64,
    /// `Ḣ^s` exponent outside `[0, 2]`: the bound cannot be absorbed.
    pub flagged: bool,
    /// Sup of `𝒟_{ij}/bound` over the sweep, the measured constant.
    pub eta: f64,
    pub amplitude_trend: f64,
    pub dilation_trend: f64,
    /// `(log a, log κ, log ratio)` per sample.
    pub samples: Vec<(f64, f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GnHlsReport {
    pub pairings: Vec<PairingBound>,
    pub e: [f64; 3],
    pub e_above_one: bool,
}

/// Evaluate `𝒟_{ij}(|u|) = ∬ |u(x)|^{μ_i}|u(y)|^{μ_j}|x−y|^{β−N}` against
/// `‖u‖₂^{γ}‖u‖_{Ḣ^s}^{μ_i+μ_j−γ}` over an amplitude × dilation sweep of
/// `u`, with `μ₁ = 2`, `μ₂ = μ`.
pub fn gn_hls_exponents(problem: &Problem, u: &ComplexField, amplitudes: &[f64], kappas: &[f64]) -> Result<GnHlsReport> {
    if amplitudes.len() < 2 || kappas.len() < 2 {
        return Err(FnlsError::domain("the sweep needs at least two amplitudes and two dilations"));
    }
    let ops = problem.ops();
    let s = problem.s();
    let mu = problem.nonlinearity.mu;
    let mus = [2.0, mu];
    let mut pairings = Vec::new();
    let dilated: Vec<ComplexField> = kappas.iter().map(|&k| ops.dilate(u, k)).collect::<Result<_>>()?;
    for i in 0..2 {
        for j in 0..2 {
            let g = gamma(&problem.params, mus[i], mus[j]);
            let q = mus[i] + mus[j] - g;
            let mut samples = Vec::new();
            for (&kappa, uk) in kappas.iter().zip(&dilated) {
                let l2 = uk.l2_norm();
                let hs = ops.kinetic(uk, s)?.sqrt();
                let pi = power(uk, mus[i]);
                let pj = power(uk, mus[j]);
                let d1 = problem.interaction_d(&pi, &pj)?;
                for &a in amplitudes {
                    let d = d1 * a.powf(mus[i] + mus[j]);
                    let bound = (a * l2).powf(g) * (a * hs).powf(q);
                    samples.push((a.ln(), kappa.ln(), (d / bound).ln()));
                }
            }
            let eta = samples.iter().map(|v| v.2.exp()).fold(0.0, f64::max);
            let (la, lk, lr): (Vec<f64>, Vec<f64>, Vec<f64>) = samples.iter().fold((vec![], vec![], vec![]), |mut acc, v| {
                acc.0.push(v.0);
                acc.1.push(v.1);
                acc.2.push(v.2);
                acc
            });
            pairings.push(PairingBound {
                i: i + 1,
                j: j + 1,
                mu_i: mus[i],
                mu_j: mus[j],
                gamma: g,
                hs_exponent: q,
                flagged: !(0.0..=2.0).contains(&q),
                eta,
                amplitude_trend: fit_line(&la, &lr).slope,
                dilation_trend: fit_line(&lk, &lr).slope,
                samples,
            });
        }
    }
    let e = young_exponents(&problem.params, mu);
    Ok(GnHlsReport { pairings, e_above_one: e.iter().all(|&x| x > 1.0), e })
}
