use std::f64::consts::PI;

use num_complex::Complex64;

use super::fft::FftNd;
use super::field::ComplexField;
use super::grid::{for_each_multi_index, Grid};
use crate::error::{FnlsError, Result};

/// Relative spectral or boundary mass a dilation may discard before it is
/// rejected as under-resolved.
pub const DILATION_LOSS_TOLERANCE: f64 = 1e-10;

/// Transform plans and wavenumber tables for one grid. Immutable after
/// construction and cheap to share between threads.
#[derive(Debug, Clone)]
pub struct SpectralOps {
    grid: Grid,
    fft: FftNd,
    k_squared: Vec<f64>,
}

impl SpectralOps {
    pub fn new(grid: &Grid) -> Self {
        SpectralOps { grid: grid.clone(), fft: FftNd::new(grid.dims()), k_squared: grid.k_squared() }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn k_squared(&self) -> &[f64] {
        &self.k_squared
    }

    /// `|k|^{2s}` per spectral index; zero at `k = 0` for every `s > 0`.
    pub fn symbol(&self, s: f64) -> Vec<f64> {
        self.k_squared.iter().map(|&k2| if k2 == 0.0 { 0.0 } else { k2.powf(s) }).collect()
    }

    pub fn forward(&self, u: &ComplexField) -> Result<Vec<Complex64>> {
        self.grid.ensure_same(u.grid())?;
        let mut buf = u.values().to_vec();
        self.fft.forward(&mut buf);
        Ok(buf)
    }

    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        self.fft.forward(buf);
    }

    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        self.fft.inverse(buf);
    }

    pub fn inverse(&self, mut spectrum: Vec<Complex64>) -> Result<ComplexField> {
        self.grid.ensure_len(spectrum.len())?;
        self.fft.inverse(&mut spectrum);
        ComplexField::new(self.grid.clone(), spectrum)
    }

    /// Parseval weight turning `Σ_k |û_k|²` into `∫|u|²`.
    pub fn parseval_weight(&self) -> f64 {
        self.grid.cell_volume() / self.grid.len() as f64
    }

    /// `(−Δ)^s u` through the multiplier `|k|^{2s}`. `s = 1` is accepted as
    /// the classical Laplacian.
    pub fn frac_laplacian(&self, u: &ComplexField, s: f64) -> Result<ComplexField> {
        check_order(s)?;
        let mut spec = self.forward(u)?;
        for (v, &k2) in spec.iter_mut().zip(&self.k_squared) {
            *v *= if k2 == 0.0 { 0.0 } else { k2.powf(s) };
        }
        self.inverse(spec)
    }

    /// `⟨u, v⟩_{H^s} = Σ_k (1 + |k|^{2s}) û conj(v̂) · dV/n`.
    pub fn hs_inner(&self, u: &ComplexField, v: &ComplexField, s: f64) -> Result<Complex64> {
        u.grid().ensure_same(v.grid())?;
        let a = self.forward(u)?;
        let b = self.forward(v)?;
        Ok(self.hs_inner_spectral(&a, &b, s))
    }

    pub fn hs_inner_spectral(&self, a: &[Complex64], b: &[Complex64], s: f64) -> Complex64 {
        let sum: Complex64 = a
            .iter()
            .zip(b)
            .zip(&self.k_squared)
            .map(|((x, y), &k2)| x * y.conj() * (1.0 + weight(k2, s)))
            .sum();
        sum * self.parseval_weight()
    }

    pub fn hs_norm(&self, u: &ComplexField, s: f64) -> Result<f64> {
        Ok(self.hs_inner(u, u, s)?.re.max(0.0).sqrt())
    }

    pub fn mass(&self, u: &ComplexField) -> f64 {
        u.mass()
    }

    /// `‖∇_s u‖₂² = Σ_k |k|^{2s}|û_k|²·dV/n`.
    pub fn kinetic(&self, u: &ComplexField, s: f64) -> Result<f64> {
        let a = self.forward(u)?;
        Ok(self.kinetic_spectral(&a, s))
    }

    pub fn kinetic_spectral(&self, a: &[Complex64], s: f64) -> f64 {
        a.iter().zip(&self.k_squared).map(|(x, &k2)| x.norm_sqr() * weight(k2, s)).sum::<f64>()
            * self.parseval_weight()
    }

    /// Mass-preserving dilation `u_κ(x) = κ^{1/2}u(κ^{1/N}x)` about the box
    /// centre, by band-limited (trigonometric) resampling along each axis.
    ///
    /// Fails when the compressed field would alias (`κ > 1`) or the
    /// stretched field would leave the box (`κ < 1`).
    pub fn dilate(&self, u: &ComplexField, kappa: f64) -> Result<ComplexField> {
        self.grid.ensure_same(u.grid())?;
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(FnlsError::domain(format!("dilation factor must be positive, got {kappa}")));
        }
        if kappa == 1.0 {
            return Ok(u.clone());
        }
        let nd = self.grid.ndim();
        let c = kappa.powf(1.0 / nd as f64);
        let total = u.mass();
        if total == 0.0 {
            return Ok(u.clone());
        }

        if c > 1.0 {
            // modes above k_nyq/c fold back once compressed
            let spec = self.forward(u)?;
            let ks: Vec<Vec<f64>> = (0..nd).map(|a| self.grid.wavenumbers(a)).collect();
            let cut: Vec<f64> = (0..nd).map(|a| PI / self.grid.spacing(a) / c).collect();
            let mut lost = 0.0;
            let mut i = 0;
            for_each_multi_index(self.grid.dims(), |idx| {
                if idx.iter().enumerate().any(|(a, &m)| ks[a][m].abs() >= cut[a]) {
                    lost += spec[i].norm_sqr();
                }
                i += 1;
            });
            lost *= self.parseval_weight();
            if lost > DILATION_LOSS_TOLERANCE * total {
                return Err(FnlsError::Resolution(format!(
                    "dilation by {kappa} aliases a relative spectral mass {:.3e}",
                    lost / total
                )));
            }
        } else {
            // nodes beyond c·L/2 are pushed out of the box
            let limits: Vec<f64> = self.grid.lengths().iter().map(|l| c * l / 2.0).collect();
            let outside = self.grid.sample(|x| x.iter().zip(&limits).any(|(xi, lim)| xi.abs() > *lim));
            let lost: f64 = u
                .values()
                .iter()
                .zip(&outside)
                .filter(|(_, &o)| o)
                .map(|(v, _)| v.norm_sqr())
                .sum::<f64>()
                * self.grid.cell_volume();
            if lost > DILATION_LOSS_TOLERANCE * total {
                return Err(FnlsError::Resolution(format!(
                    "dilation by {kappa} pushes a relative mass {:.3e} out of the box",
                    lost / total
                )));
            }
        }

        let mut values = u.values().to_vec();
        let mut line = Vec::new();
        let mut out_line = Vec::new();
        for axis in 0..nd {
            let n = self.grid.dims()[axis];
            let matrix = resampling_matrix(n, c);
            let stride = self.grid.stride(axis);
            let outer = self.grid.len() / (n * stride);
            line.resize(n, Complex64::default());
            out_line.resize(n, Complex64::default());
            for o in 0..outer {
                for i in 0..stride {
                    let base = o * n * stride + i;
                    for j in 0..n {
                        line[j] = values[base + j * stride];
                    }
                    for (j, row) in matrix.chunks_exact(n).enumerate() {
                        out_line[j] = row.iter().zip(&line).map(|(m, v)| v * *m).sum();
                    }
                    for j in 0..n {
                        values[base + j * stride] = out_line[j];
                    }
                }
            }
        }
        let amp = Complex64::new(kappa.sqrt(), 0.0);
        for v in &mut values {
            *v *= amp;
        }
        ComplexField::new(self.grid.clone(), values)
    }
}

fn check_order(s: f64) -> Result<()> {
    if s > 0.0 && s <= 1.0 {
        Ok(())
    } else {
        Err(FnlsError::domain(format!("fractional order must lie in (0, 1], got {s}")))
    }
}

#[inline]
fn weight(k2: f64, s: f64) -> f64 {
    if k2 == 0.0 {
        // |k|^0 = 1 in the s → 0 limit, 0 otherwise
        if s == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        k2.powf(s)
    }
}

/// Row `j` holds the weights evaluating the trigonometric interpolant of an
/// `n`-point periodic line at fractional index `c(j − n/2) + n/2`. The
/// Nyquist mode enters as a cosine so real lines stay real.
fn resampling_matrix(n: usize, c: f64) -> Vec<f64> {
    let nf = n as f64;
    let half = nf / 2.0;
    let kmax = n / 2 - 1;
    let mut m = vec![0.0; n * n];
    for j in 0..n {
        let t = c * (j as f64 - half) + half;
        if (t - half).abs() >= half {
            // outside the box the free-space field is taken as zero, not
            // as its periodic image
            continue;
        }
        for l in 0..n {
            let d = t - l as f64;
            let theta = 2.0 * PI * d / nf;
            let sh = (theta / 2.0).sin();
            let dirichlet = if sh.abs() < 1e-12 {
                // sin((K+½)θ)/sin(θ/2) → 2K + 1 at θ = 2πq
                (2 * kmax + 1) as f64
            } else {
                ((kmax as f64 + 0.5) * theta).sin() / sh
            };
            m[j * n + l] = (dirichlet + (PI * d).cos()) / nf;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane_wave(grid: &Grid, modes: &[i64]) -> (ComplexField, f64) {
        let k: Vec<f64> =
            modes.iter().zip(grid.lengths()).map(|(&m, &l)| 2.0 * PI * m as f64 / l).collect();
        let k2 = k.iter().map(|v| v * v).sum();
        let f = ComplexField::from_fn(grid, |x| {
            Complex64::from_polar(1.0, x.iter().zip(&k).map(|(a, b)| a * b).sum())
        });
        (f, k2)
    }

    #[test]
    fn constant_field_is_annihilated() {
        let grid = Grid::cubic(2, 16, 3.0).unwrap();
        let ops = SpectralOps::new(&grid);
        let c = ComplexField::from_fn(&grid, |_| Complex64::new(2.5, -1.0));
        let out = ops.frac_laplacian(&c, 0.4).unwrap();
        assert!(out.max_abs() < 1e-13);
    }

    #[test]
    fn plane_wave_is_an_eigenfunction() {
        let grid = Grid::new(vec![16, 32], vec![2.0, 5.0]).unwrap();
        let ops = SpectralOps::new(&grid);
        for s in [0.3, 0.7, 1.0] {
            let (pw, k2) = plane_wave(&grid, &[3, -5]);
            let out = ops.frac_laplacian(&pw, s).unwrap();
            let lam = k2.powf(s);
            for (a, b) in out.values().iter().zip(pw.values()) {
                assert!((a - b * lam).norm() <= 1e-12 * lam);
            }
        }
    }

    #[test]
    fn order_outside_range_is_rejected() {
        let grid = Grid::cubic(1, 8, 1.0).unwrap();
        let ops = SpectralOps::new(&grid);
        let u = ComplexField::zeros(&grid);
        assert!(ops.frac_laplacian(&u, 0.0).is_err());
        assert!(ops.frac_laplacian(&u, 1.5).is_err());
    }

    #[test]
    fn mass_and_kinetic_of_elementary_fields() {
        let grid = Grid::new(vec![16, 8], vec![3.0, 2.0]).unwrap();
        let ops = SpectralOps::new(&grid);
        let c = ComplexField::from_fn(&grid, |_| Complex64::new(0.0, 1.5));
        assert!((ops.mass(&c) - 2.25 * 6.0).abs() < 1e-12);
        let (pw, k2) = plane_wave(&grid, &[2, 1]);
        let s = 0.6;
        let kin = ops.kinetic(&pw, s).unwrap();
        assert!((kin - k2.powf(s) * 6.0).abs() < 1e-11 * kin);
        // H^s inner product degenerates to twice the mass as s → 0
        let u = ComplexField::gaussian(&grid, &[0.2, -0.1], 0.4, 1.0);
        let hs0 = ops.hs_inner(&u, &u, 0.0).unwrap();
        assert!((hs0.re - 2.0 * ops.mass(&u)).abs() < 1e-12 * hs0.re);
    }

    #[test]
    fn spectral_mass_agrees_with_parseval() {
        let grid = Grid::cubic(1, 64, 10.0).unwrap();
        let ops = SpectralOps::new(&grid);
        let u = ComplexField::from_fn(&grid, |x| Complex64::new((x[0]).sin(), (-x[0] * x[0]).exp()));
        let spec = ops.forward(&u).unwrap();
        let via_k: f64 = spec.iter().map(|v| v.norm_sqr()).sum::<f64>() * ops.parseval_weight();
        assert!((via_k - u.mass()).abs() < 1e-12 * u.mass());
    }

    #[test]
    fn identity_dilation() {
        let grid = Grid::cubic(1, 32, 10.0).unwrap();
        let ops = SpectralOps::new(&grid);
        let u = ComplexField::gaussian(&grid, &[0.0], 1.0, 1.0);
        assert_eq!(ops.dilate(&u, 1.0).unwrap(), u);
        assert!(ops.dilate(&u, 0.0).is_err());
        assert!(ops.dilate(&u, -2.0).is_err());
    }

    #[test]
    fn dilation_matches_analytic_gaussian() {
        // κ^{1/2}·g(κx) for a unit Gaussian in 1-D is again a Gaussian
        let grid = Grid::cubic(1, 128, 24.0).unwrap();
        let ops = SpectralOps::new(&grid);
        let u = ComplexField::gaussian(&grid, &[0.0], 1.0, 1.0);
        for kappa in [0.5, 0.8, 1.3, 2.0] {
            let d = ops.dilate(&u, kappa).unwrap();
            let exact = ComplexField::gaussian(&grid, &[0.0], 1.0 / kappa, kappa.sqrt());
            let err = d.sub(&exact).unwrap().max_abs();
            assert!(err < 1e-10, "kappa {kappa}: {err:e}");
        }
    }

    #[test]
    fn dilation_rejects_unresolved_results() {
        let grid = Grid::cubic(1, 32, 10.0).unwrap();
        let ops = SpectralOps::new(&grid);
        let u = ComplexField::gaussian(&grid, &[0.0], 1.0, 1.0);
        assert!(matches!(ops.dilate(&u, 0.2), Err(FnlsError::Resolution(_))));
        assert!(matches!(ops.dilate(&u, 8.0), Err(FnlsError::Resolution(_))));
    }
}
