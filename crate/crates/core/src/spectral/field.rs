use num_complex::Complex64;

use super::grid::Grid;
use crate::error::{FnlsError, Result};

/// Complex samples of a wave function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: Grid,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        grid.ensure_len(values.len())?;
        Ok(ComplexField { grid, values })
    }

    pub fn zeros(grid: &Grid) -> Self {
        ComplexField { grid: grid.clone(), values: vec![Complex64::default(); grid.len()] }
    }

    pub fn from_real(grid: &Grid, values: &[f64]) -> Result<Self> {
        grid.ensure_len(values.len())?;
        Ok(ComplexField {
            grid: grid.clone(),
            values: values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        })
    }

    pub fn from_fn(grid: &Grid, f: impl FnMut(&[f64]) -> Complex64) -> Self {
        ComplexField { grid: grid.clone(), values: grid.sample(f) }
    }

    /// Gaussian `A·exp(-|x - x0|²/(2σ²))`.
    pub fn gaussian(grid: &Grid, center: &[f64], width: f64, amplitude: f64) -> Self {
        ComplexField::from_fn(grid, |x| {
            let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
            Complex64::new(amplitude * (-r2 / (2.0 * width * width)).exp(), 0.0)
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// `∫|u|²`, the midpoint sum (equal to the spectral Parseval sum).
    pub fn mass(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn l2_norm(&self) -> f64 {
        self.mass().sqrt()
    }

    pub fn modulus(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// `⟨u, v⟩ = ∫ u conj(v)`.
    pub fn l2_inner(&self, other: &ComplexField) -> Result<Complex64> {
        self.grid.ensure_same(&other.grid)?;
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum();
        Ok(s * self.grid.cell_volume())
    }

    pub fn scale(&mut self, factor: Complex64) {
        for v in &mut self.values {
            *v *= factor;
        }
    }

    pub fn scaled(&self, factor: Complex64) -> ComplexField {
        let mut out = self.clone();
        out.scale(factor);
        out
    }

    /// `self + a·other`.
    pub fn axpy(&self, a: Complex64, other: &ComplexField) -> Result<ComplexField> {
        self.grid.ensure_same(&other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| x + a * y).collect();
        Ok(ComplexField { grid: self.grid.clone(), values })
    }

    pub fn sub(&self, other: &ComplexField) -> Result<ComplexField> {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    /// Rescale to mass `target`.
    pub fn normalized_to(&self, target: f64) -> Result<ComplexField> {
        let m = self.mass();
        if !(m > 0.0) {
            return Err(FnlsError::ZeroField(m));
        }
        Ok(self.scaled(Complex64::new((target / m).sqrt(), 0.0)))
    }

    /// Circular shift: `out[i] = self[i - shift]` per axis, so a bump at
    /// index `p` moves to `p + shift`.
    pub fn shifted(&self, shift: &[i64]) -> ComplexField {
        let dims = self.grid.dims();
        let mut out = vec![Complex64::default(); self.values.len()];
        let mut target = vec![0usize; dims.len()];
        super::grid::for_each_multi_index(dims, |idx| {
            for a in 0..dims.len() {
                let n = dims[a] as i64;
                target[a] = (idx[a] as i64 + shift[a]).rem_euclid(n) as usize;
            }
            out[self.grid.flat_index(&target)] = self.values[self.grid.flat_index(idx)];
        });
        ComplexField { grid: self.grid.clone(), values: out }
    }

    /// Fraction of the mass held in the outer shell of relative thickness
    /// `shell` (0.1 = outer 10% of each half-axis).
    pub fn boundary_mass_fraction(&self, shell: f64) -> f64 {
        let total = self.mass();
        if total == 0.0 {
            return 0.0;
        }
        let grid = &self.grid;
        let limits: Vec<f64> = grid.lengths().iter().map(|l| (1.0 - shell) * l / 2.0).collect();
        let inside = grid.sample(|x| x.iter().zip(&limits).all(|(xi, lim)| xi.abs() < *lim));
        let outer: f64 = self
            .values
            .iter()
            .zip(&inside)
            .filter(|(_, &ins)| !ins)
            .map(|(v, _)| v.norm_sqr())
            .sum::<f64>()
            * grid.cell_volume();
        outer / total
    }
}
