//! Energy `ℰ(u) = ½‖∇_s u‖² − ½𝒟(G(|u|), G(|u|))`, the Hartree pairing `𝒟`,
//! the nonlinear operator `𝒩(u) = (V⋆G(|u|))·F(|u|)·u` and the quantities
//! derived from them. Complex arguments give `𝒥(z)`; every term depends on
//! `|z|` or `|ẑ|` only.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FnlsError, Result};
use crate::model::{NonlinearitySpec, PhysicsParams};
use crate::report::fmt_f64;
use crate::spectral::{ComplexField, Grid, KernelQuadrature, RieszKernelPlan, SpectralOps};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    /// `½‖∇_s u‖₂²`
    pub kinetic: f64,
    /// `½𝒟(G(|u|), G(|u|))`
    pub interaction: f64,
    pub total: f64,
    pub mass: f64,
}

impl EnergyBreakdown {
    pub const CSV_HEADER: &'static str = "mass,kinetic,interaction,total";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            fmt_f64(self.mass),
            fmt_f64(self.kinetic),
            fmt_f64(self.interaction),
            fmt_f64(self.total)
        )
    }
}

/// Everything needed to evaluate the functionals on one grid: parameters,
/// nonlinearity, transform plans and the Riesz kernel. Immutable and
/// shareable across threads.
#[derive(Debug, Clone)]
pub struct Problem {
    pub params: PhysicsParams,
    pub nonlinearity: NonlinearitySpec,
    ops: SpectralOps,
    kernel: RieszKernelPlan,
}

impl Problem {
    pub fn new(
        params: PhysicsParams,
        nonlinearity: NonlinearitySpec,
        grid: &Grid,
        quadrature: KernelQuadrature,
    ) -> Result<Self> {
        if grid.ndim() != params.dimension {
            return Err(FnlsError::GridMismatch(format!(
                "grid has {} axes but dimension is {}",
                grid.ndim(),
                params.dimension
            )));
        }
        let kernel = RieszKernelPlan::new(grid, params.kernel_exponent, quadrature)?;
        Ok(Problem { params, nonlinearity, ops: SpectralOps::new(grid), kernel })
    }

    /// Same grid and kernel, different constraint mass.
    pub fn with_mass(&self, mass: f64) -> Result<Self> {
        Ok(Problem { params: self.params.with_mass(mass)?, ..self.clone() })
    }

    pub fn ops(&self) -> &SpectralOps {
        &self.ops
    }

    pub fn kernel(&self) -> &RieszKernelPlan {
        &self.kernel
    }

    pub fn grid(&self) -> &Grid {
        self.ops.grid()
    }

    pub fn s(&self) -> f64 {
        self.params.frac_order
    }

    /// `𝒟(a, b) = ∫ a (V⋆b)`, symmetrised so that swapping the arguments
    /// gives a bit-identical result.
    pub fn interaction_d(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        let dv = self.grid().cell_volume();
        let vb = self.kernel.convolve(b)?;
        let ab: f64 = a.iter().zip(&vb).map(|(x, y)| x * y).sum::<f64>() * dv;
        if a == b {
            return Ok(ab);
        }
        let va = self.kernel.convolve(a)?;
        let ba: f64 = b.iter().zip(&va).map(|(x, y)| x * y).sum::<f64>() * dv;
        Ok(0.5 * (ab + ba))
    }

    /// `G(|u|)` at every node.
    pub fn density(&self, u: &ComplexField) -> Vec<f64> {
        u.values().iter().map(|v| self.nonlinearity.g(v.norm())).collect()
    }

    /// Real potential `W = (V⋆G(|u|))·F(|u|)` with `𝒩(u) = W u`, and the
    /// Hartree field `V⋆G(|u|)` it was built from.
    pub fn potential(&self, u: &ComplexField) -> Result<(Vec<f64>, Vec<f64>)> {
        self.grid().ensure_same(u.grid())?;
        if self.nonlinearity.is_linear() {
            let zeros = vec![0.0; u.values().len()];
            return Ok((zeros.clone(), zeros));
        }
        let hartree = self.kernel.convolve(&self.density(u))?;
        let w = u
            .values()
            .iter()
            .zip(&hartree)
            .map(|(v, h)| h * self.nonlinearity.f(v.norm()))
            .collect();
        Ok((w, hartree))
    }

    pub fn energy(&self, u: &ComplexField) -> Result<EnergyBreakdown> {
        let spec = self.ops.forward(u)?;
        let kinetic = 0.5 * self.ops.kinetic_spectral(&spec, self.s());
        let interaction = if self.nonlinearity.is_linear() {
            0.0
        } else {
            let g = self.density(u);
            0.5 * self.interaction_d(&g, &g)?
        };
        Ok(EnergyBreakdown { kinetic, interaction, total: kinetic - interaction, mass: u.mass() })
    }

    pub fn el_operator(&self, u: &ComplexField) -> Result<ComplexField> {
        let (w, _) = self.potential(u)?;
        let values = u.values().iter().zip(&w).map(|(v, wi)| v * *wi).collect();
        ComplexField::new(u.grid().clone(), values)
    }

    /// `L²`-gradient `(−Δ)^s u − 𝒩(u)` of `ℰ` (with respect to the real
    /// pairing `Re⟨·,·⟩` for complex fields).
    pub fn energy_gradient(&self, u: &ComplexField) -> Result<ComplexField> {
        let lap = self.ops.frac_laplacian(u, self.s())?;
        lap.sub(&self.el_operator(u)?)
    }

    /// `κ = (‖∇_s u‖² − Re⟨𝒩(u), u⟩)/‖u‖²`, the multiplier of the
    /// stationary equation `(−Δ)^s u − κu = 𝒩(u)`.
    pub fn lagrange_multiplier(&self, u: &ComplexField) -> Result<f64> {
        let mass = u.mass();
        if !(mass > 0.0) {
            return Err(FnlsError::ZeroField(mass));
        }
        let kin = self.ops.kinetic(u, self.s())?;
        let nu = self.el_operator(u)?.l2_inner(u)?.re;
        Ok((kin - nu) / mass)
    }

    /// `(−Δ)^s u − κu − 𝒩(u)`.
    pub fn el_residual(&self, u: &ComplexField, kappa: f64) -> Result<ComplexField> {
        self.energy_gradient(u)?.axpy(Complex64::new(-kappa, 0.0), u)
    }

    pub fn hs_norm(&self, u: &ComplexField) -> Result<f64> {
        self.ops.hs_norm(u, self.s())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn problem_1d(spec: NonlinearitySpec, quadrature: KernelQuadrature) -> Problem {
        let params = PhysicsParams::new(1, 0.7, 0.8, 1.0).unwrap();
        let grid = Grid::cubic(1, 128, 20.0).unwrap();
        Problem::new(params, spec, &grid, quadrature).unwrap()
    }

    fn smooth_random(grid: &Grid, rng: &mut ChaCha8Rng, complex: bool) -> ComplexField {
        let c: Vec<(f64, f64, f64, f64)> = (0..4)
            .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(0.5..1.5), rng.random_range(-2.0..2.0)))
            .collect();
        ComplexField::from_fn(grid, |x| {
            c.iter()
                .map(|&(a, b, w, x0)| {
                    let env = (-(x[0] - x0).powi(2) / (2.0 * w * w)).exp();
                    Complex64::new(a * env, if complex { b * env } else { 0.0 })
                })
                .sum()
        })
    }

    #[test]
    fn zero_field_has_zero_energy() {
        let p = problem_1d(NonlinearitySpec::quadratic(1.0), KernelQuadrature::Spectral);
        let e = p.energy(&ComplexField::zeros(p.grid())).unwrap();
        assert_eq!(e, EnergyBreakdown::default());
        assert_eq!(p.interaction_d(&vec![0.0; 128], &vec![0.0; 128]).unwrap(), 0.0);
        assert!(p.el_operator(&ComplexField::zeros(p.grid())).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn plane_wave_kinetic_energy() {
        let p = problem_1d(NonlinearitySpec::linear(), KernelQuadrature::Spectral);
        let k0 = 2.0 * PI * 3.0 / 20.0;
        let amp = 0.7;
        let u = ComplexField::from_fn(p.grid(), |x| Complex64::from_polar(amp, k0 * x[0]));
        let e = p.energy(&u).unwrap();
        let expected = 0.5 * k0.powf(1.4) * amp * amp * 20.0;
        assert!((e.kinetic - expected).abs() < 1e-12 * expected);
        assert_eq!(e.interaction, 0.0);
        // linear problem: gradient is exactly the fractional Laplacian and the
        // plane wave is an eigenmode with κ = |k₀|^{2s}
        let g = p.energy_gradient(&u).unwrap();
        let lap = p.ops().frac_laplacian(&u, 0.7).unwrap();
        assert_eq!(g, lap);
        let kappa = p.lagrange_multiplier(&u).unwrap();
        assert!((kappa - k0.powf(1.4)).abs() < 1e-12 * kappa);
        assert!(p.el_residual(&u, kappa).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn phase_invariance_of_energy_and_covariance_of_n() {
        let p = problem_1d(NonlinearitySpec::new(1.0, 0.5, 2.4).unwrap(), KernelQuadrature::Spectral);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = smooth_random(p.grid(), &mut rng, true);
        let e0 = p.energy(&u).unwrap().total;
        let n0 = p.el_operator(&u).unwrap();
        for _ in 0..20 {
            let sigma = rng.random_range(0.0..2.0 * PI);
            let rot = Complex64::from_polar(1.0, sigma);
            let v = u.scaled(rot);
            let e = p.energy(&v).unwrap().total;
            assert!((e - e0).abs() <= 1e-10 * e0.abs());
            let nv = p.el_operator(&v).unwrap();
            let diff = nv.sub(&n0.scaled(rot)).unwrap().max_abs();
            assert!(diff <= 1e-12 * n0.max_abs());
        }
    }

    #[test]
    fn translation_invariance_of_energy() {
        let p = problem_1d(NonlinearitySpec::quadratic(1.0), KernelQuadrature::Spectral);
        let u = ComplexField::gaussian(p.grid(), &[0.0], 1.0, 1.0);
        let e0 = p.energy(&u).unwrap().total;
        for shift in [-7, 3, 11] {
            let v = u.shifted(&[shift]).scaled(Complex64::from_polar(1.0, 0.3 * shift as f64));
            let e = p.energy(&v).unwrap().total;
            assert!((e - e0).abs() <= 1e-10 * e0.abs(), "{e} vs {e0}");
        }
    }

    #[test]
    fn interaction_is_exactly_symmetric() {
        let p = problem_1d(NonlinearitySpec::quadratic(1.0), KernelQuadrature::Spectral);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a: Vec<f64> = (0..128).map(|_| rng.random_range(0.0..1.0)).collect();
        let b: Vec<f64> = (0..128).map(|_| rng.random_range(0.0..1.0)).collect();
        assert_eq!(p.interaction_d(&a, &b).unwrap(), p.interaction_d(&b, &a).unwrap());
    }

    #[test]
    fn real_embedding_matches_complex_energy() {
        let p = problem_1d(NonlinearitySpec::quadratic(1.0), KernelQuadrature::Spectral);
        let re: Vec<f64> = p.grid().sample(|x| (-(x[0] * x[0])).exp());
        let u = ComplexField::from_real(p.grid(), &re).unwrap();
        let e = p.energy(&u).unwrap();
        assert!(e.kinetic > 0.0 && e.interaction > 0.0);
        assert_eq!(e.total, e.kinetic - e.interaction);
    }

    #[test]
    fn two_impulse_interaction_with_cell_average_kernel() {
        let p = problem_1d(NonlinearitySpec::quadratic(1.0), KernelQuadrature::CellAverage);
        let grid = p.grid();
        let dv = grid.cell_volume();
        let mut a = vec![0.0; grid.len()];
        a[40] = 1.0 / dv;
        a[70] = 1.0 / dv;
        let r = 30.0 * grid.spacing(0);
        let self_term = crate::spectral::riesz::singular_cell_average(grid, 0.8);
        let expected = 2.0 * r.powf(0.8 - 1.0) + 2.0 * self_term;
        let d = p.interaction_d(&a, &a).unwrap();
        assert!((d - expected).abs() < 1e-12 * expected, "{d} vs {expected}");
    }

    #[test]
    fn quadratic_pairing_identity() {
        // G'(ψ)ψ = 2G(ψ) for G = ψ², so ⟨𝒩(u), u⟩ = 2𝒟(u², u²)
        let p = problem_1d(NonlinearitySpec::quadratic(1.0), KernelQuadrature::Spectral);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = smooth_random(p.grid(), &mut rng, true);
        let lhs = p.el_operator(&u).unwrap().l2_inner(&u).unwrap();
        let g = p.density(&u);
        let rhs = 2.0 * p.interaction_d(&g, &g).unwrap();
        assert!(lhs.im.abs() < 1e-12 * lhs.re);
        assert!((lhs.re - rhs).abs() < 1e-12 * rhs);
    }

    #[test]
    fn diamagnetic_inequality() {
        let p = problem_1d(NonlinearitySpec::quadratic(1.0), KernelQuadrature::Spectral);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let z = smooth_random(p.grid(), &mut rng, true);
            let modulus = ComplexField::from_real(p.grid(), &z.modulus()).unwrap();
            let kz = p.ops().kinetic(&z, 0.7).unwrap();
            let km = p.ops().kinetic(&modulus, 0.7).unwrap();
            assert!(kz >= km * (1.0 - 1e-9), "{kz} < {km}");
        }
    }

    #[test]
    fn zero_mass_multiplier_is_an_error() {
        let p = problem_1d(NonlinearitySpec::quadratic(1.0), KernelQuadrature::Spectral);
        assert!(matches!(p.lagrange_multiplier(&ComplexField::zeros(p.grid())), Err(FnlsError::ZeroField(_))));
    }
}
