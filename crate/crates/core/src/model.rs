//! Physical parameters, the two-term nonlinearity family and the
//! admissibility windows the existence, negativity and uniqueness results
//! are stated under.
//!
//! The nonlinearity is `G(ψ) = c₂ψ² + c_μψ^μ`, so `G'(ψ) = F(ψ)ψ` with
//! `F(ψ) = 2c₂ + μc_μψ^{μ-2}`. Its two exponents are the pair `μ₁ = 2`,
//! `μ₂ = μ` used by the interaction estimates in [`crate::analysis`].

use serde::{Deserialize, Serialize};

use crate::error::{FnlsError, Result};

/// Dimension `N`, fractional order `s`, kernel exponent `β` and constraint
/// mass `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicsParams {
    pub dimension: usize,
    pub frac_order: f64,
    pub kernel_exponent: f64,
    pub mass: f64,
}

impl PhysicsParams {
    pub fn new(dimension: usize, frac_order: f64, kernel_exponent: f64, mass: f64) -> Result<Self> {
        if !(1..=3).contains(&dimension) {
            return Err(FnlsError::domain(format!("dimension must be 1, 2 or 3, got {dimension}")));
        }
        if !(frac_order > 0.0 && frac_order < 1.0) {
            return Err(FnlsError::domain(format!("s must lie in (0, 1), got {frac_order}")));
        }
        if !(kernel_exponent > 0.0 && kernel_exponent < dimension as f64) {
            return Err(FnlsError::domain(format!(
                "beta must lie in (0, N) = (0, {dimension}), got {kernel_exponent}"
            )));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(FnlsError::domain(format!("lambda must be positive, got {mass}")));
        }
        Ok(PhysicsParams { dimension, frac_order, kernel_exponent, mass })
    }

    pub fn with_mass(&self, mass: f64) -> Result<Self> {
        PhysicsParams::new(self.dimension, self.frac_order, self.kernel_exponent, mass)
    }

    /// `N − β ≤ 2s`.
    pub fn is_subcritical(&self) -> bool {
        self.dim_f() - self.kernel_exponent <= 2.0 * self.frac_order
    }

    pub(crate) fn dim_f(&self) -> f64 {
        self.dimension as f64
    }
}

/// `G(ψ) = c₂ψ² + c_μψ^μ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearitySpec {
    pub c2: f64,
    pub cmu: f64,
    pub mu: f64,
}

impl NonlinearitySpec {
    pub fn new(c2: f64, cmu: f64, mu: f64) -> Result<Self> {
        if !(c2 >= 0.0 && c2.is_finite()) || !(cmu >= 0.0 && cmu.is_finite()) {
            return Err(FnlsError::domain(format!(
                "coefficients must be finite and nonnegative, got c2 = {c2}, cmu = {cmu}"
            )));
        }
        if !(mu > 1.0 && mu.is_finite()) {
            return Err(FnlsError::domain(format!("mu must be a finite exponent > 1, got {mu}")));
        }
        Ok(NonlinearitySpec { c2, cmu, mu })
    }

    pub fn quadratic(c2: f64) -> Self {
        NonlinearitySpec { c2, cmu: 0.0, mu: 2.0 }
    }

    /// No interaction at all; the problem is the free fractional equation.
    pub fn linear() -> Self {
        NonlinearitySpec { c2: 0.0, cmu: 0.0, mu: 2.0 }
    }

    pub fn is_linear(&self) -> bool {
        self.c2 == 0.0 && self.cmu == 0.0
    }

    /// Dominant exponent of `G` as `ψ → 0⁺`.
    pub fn small_amplitude_exponent(&self) -> f64 {
        if self.c2 > 0.0 {
            2.0
        } else {
            self.mu
        }
    }

    #[inline]
    pub fn g(&self, psi: f64) -> f64 {
        let mut v = self.c2 * psi * psi;
        if self.cmu != 0.0 {
            v += self.cmu * psi.powf(self.mu);
        }
        v
    }

    #[inline]
    pub fn g_prime(&self, psi: f64) -> f64 {
        let mut v = 2.0 * self.c2 * psi;
        if self.cmu != 0.0 {
            v += self.mu * self.cmu * psi.powf(self.mu - 1.0);
        }
        v
    }

    /// `F(ψ) = G'(ψ)/ψ`, finite at `ψ = 0` since `μ ≥ 2` on admissible specs.
    #[inline]
    pub fn f(&self, psi: f64) -> f64 {
        let mut v = 2.0 * self.c2;
        if self.cmu != 0.0 {
            v += self.mu * self.cmu * psi.powf(self.mu - 2.0);
        }
        v
    }
}

fn check_psi(psi: f64) -> Result<()> {
    if psi >= 0.0 && psi.is_finite() {
        Ok(())
    } else {
        Err(FnlsError::domain(format!("G is defined on [0, inf), got psi = {psi}")))
    }
}

pub fn evaluate_g(psi: f64, spec: &NonlinearitySpec) -> Result<f64> {
    check_psi(psi)?;
    Ok(spec.g(psi))
}

pub fn evaluate_g_prime(psi: f64, spec: &NonlinearitySpec) -> Result<f64> {
    check_psi(psi)?;
    Ok(spec.g_prime(psi))
}

pub fn evaluate_f(psi: f64, spec: &NonlinearitySpec) -> Result<f64> {
    check_psi(psi)?;
    Ok(spec.f(psi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintClass {
    /// Blocks existence-mode runs.
    Existence,
    /// The small-amplitude window that makes `I_λ < 0` provable.
    NegativeEnergy,
    /// Outside the proven uniqueness regime; a warning only.
    Uniqueness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub class: ConstraintClass,
    pub constraint: String,
    pub message: String,
}

/// Outcome of checking a configuration against the hypothesis windows.
///
/// Each flag is true iff no violation of its class was recorded. A report
/// produced by only one of the entry points leaves the other classes
/// unchecked; use [`validate`] for the complete picture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub existence_ok: bool,
    pub uniqueness_ok: bool,
    pub negative_energy_ok: bool,
    pub violations: Vec<Violation>,
}

impl AdmissibilityReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        let ok = |c| !violations.iter().any(|v: &Violation| v.class == c);
        AdmissibilityReport {
            existence_ok: ok(ConstraintClass::Existence),
            uniqueness_ok: ok(ConstraintClass::Uniqueness),
            negative_energy_ok: ok(ConstraintClass::NegativeEnergy),
            violations,
        }
    }

    pub fn merge(mut self, other: AdmissibilityReport) -> Self {
        self.violations.extend(other.violations);
        AdmissibilityReport::from_violations(self.violations)
    }

    pub fn violations_of(&self, class: ConstraintClass) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(move |v| v.class == class)
    }
}

fn push(out: &mut Vec<Violation>, class: ConstraintClass, constraint: &str, message: String) {
    out.push(Violation { class, constraint: constraint.to_string(), message });
}

/// Existence window `N − β ≤ 2s`, the growth window `μ ∈ [2, 1 + (2s+β)/N)`
/// and, recorded separately as `negative_energy_ok`, the small-amplitude
/// window `1 + β/N < α < 1 + (2s+β)/N`.
pub fn validate_existence(params: &PhysicsParams, spec: &NonlinearitySpec) -> AdmissibilityReport {
    let n = params.dim_f();
    let s = params.frac_order;
    let beta = params.kernel_exponent;
    let upper = 1.0 + (2.0 * s + beta) / n;
    let mut v = Vec::new();

    if !params.is_subcritical() {
        push(
            &mut v,
            ConstraintClass::Existence,
            "subcritical",
            format!("N - beta = {} exceeds 2s = {}", n - beta, 2.0 * s),
        );
    }
    if spec.is_linear() {
        push(
            &mut v,
            ConstraintClass::Existence,
            "nontrivial-G",
            "c2 and cmu are both zero; G vanishes identically".to_string(),
        );
    }
    if spec.cmu > 0.0 && !(spec.mu >= 2.0 && spec.mu < upper) {
        push(
            &mut v,
            ConstraintClass::Existence,
            "mu-window",
            format!("mu = {} outside [2, 1 + (2s+beta)/N) = [2, {upper})", spec.mu),
        );
    }

    let alpha = spec.small_amplitude_exponent();
    let lower = 1.0 + beta / n;
    if !(alpha > lower && alpha < upper) {
        push(
            &mut v,
            ConstraintClass::NegativeEnergy,
            "alpha-window",
            format!("alpha = {alpha} outside (1 + beta/N, 1 + (2s+beta)/N) = ({lower}, {upper})"),
        );
    }
    AdmissibilityReport::from_violations(v)
}

/// Bounds of the `μ` uniqueness window for `N ≥ 3`:
/// `max(2, 1 + (2β−N)/(N−2s)) < μ < 2 + N/(N−2s)·(2s−1−2N+2β)/(2s−1+N)`.
pub fn uniqueness_mu_window(params: &PhysicsParams) -> (f64, f64) {
    let n = params.dim_f();
    let s = params.frac_order;
    let b = params.kernel_exponent;
    let lo = f64::max(2.0, 1.0 + (2.0 * b - n) / (n - 2.0 * s));
    let hi = 2.0 + n / (n - 2.0 * s) * (2.0 * s - 1.0 - 2.0 * n + 2.0 * b) / (2.0 * s - 1.0 + n);
    (lo, hi)
}

/// Upper end of the `β` uniqueness window, `min(N, 3N/2 − s − N/(4s))`.
pub fn uniqueness_beta_window(params: &PhysicsParams) -> (f64, f64) {
    let n = params.dim_f();
    let s = params.frac_order;
    (n - s + 0.5, f64::min(n, 1.5 * n - s - n / (4.0 * s)))
}

/// Proven-uniqueness regime of the Cauchy problem. Violations are warnings:
/// runs outside the regime are allowed and labelled.
pub fn validate_uniqueness(params: &PhysicsParams, spec: &NonlinearitySpec) -> AdmissibilityReport {
    let n = params.dim_f();
    let s = params.frac_order;
    let beta = params.kernel_exponent;
    let mut v = Vec::new();
    let class = ConstraintClass::Uniqueness;

    match params.dimension {
        1 => {
            if !(s > 0.5 && s < 1.0) {
                push(&mut v, class, "s-window", format!("N = 1 requires 1/2 < s < 1, got s = {s}"));
            }
        }
        2 => push(
            &mut v,
            class,
            "dimension",
            "no uniqueness result is available for N = 2".to_string(),
        ),
        _ => {
            let s_lo = n / (2.0 * (n - 1.0));
            if !(s > s_lo && s < 1.0) {
                push(&mut v, class, "s-window", format!("requires {s_lo} < s < 1, got s = {s}"));
            }
            let (b_lo, b_hi) = uniqueness_beta_window(params);
            if !(beta > b_lo && beta < b_hi) {
                push(
                    &mut v,
                    class,
                    "beta-window",
                    format!("requires {b_lo} < beta < {b_hi}, got beta = {beta}"),
                );
            }
            let (m_lo, m_hi) = uniqueness_mu_window(params);
            if spec.cmu > 0.0 {
                if !(spec.mu > m_lo) {
                    push(&mut v, class, "mu-lower", format!("requires mu > {m_lo}, got mu = {}", spec.mu));
                }
                if !(spec.mu < m_hi) {
                    push(&mut v, class, "mu-upper", format!("requires mu < {m_hi}, got mu = {}", spec.mu));
                }
            } else if !(m_lo < m_hi) {
                // a pure quadratic G satisfies the growth bound for any mu, so
                // only an empty window rules it out
                push(
                    &mut v,
                    class,
                    "mu-window",
                    format!("empty window ({m_lo}, {m_hi}) for the growth exponent"),
                );
            }
        }
    }
    AdmissibilityReport::from_violations(v)
}

pub fn validate(params: &PhysicsParams, spec: &NonlinearitySpec) -> AdmissibilityReport {
    validate_existence(params, spec).merge(validate_uniqueness(params, spec))
}
