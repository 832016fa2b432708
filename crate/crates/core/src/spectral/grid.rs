use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{FnlsError, Result};

/// Uniform periodic box `[-L_j/2, L_j/2)` per axis, row-major with the last
/// axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dims: Vec<usize>,
    lengths: Vec<f64>,
}

impl Grid {
    pub fn new(dims: Vec<usize>, lengths: Vec<f64>) -> Result<Self> {
        if dims.is_empty() || dims.len() > 3 {
            return Err(FnlsError::InvalidGrid(format!("1 to 3 axes supported, got {}", dims.len())));
        }
        if dims.len() != lengths.len() {
            return Err(FnlsError::InvalidGrid(format!(
                "{} point counts but {} box lengths",
                dims.len(),
                lengths.len()
            )));
        }
        for (&n, &l) in dims.iter().zip(&lengths) {
            if n < 8 || n % 2 != 0 {
                return Err(FnlsError::InvalidGrid(format!("axis size must be even and >= 8, got {n}")));
            }
            if !(l > 0.0 && l.is_finite()) {
                return Err(FnlsError::InvalidGrid(format!("box length must be positive, got {l}")));
            }
        }
        Ok(Grid { dims, lengths })
    }

    /// `n` points on a box of side `l` along each of `ndim` axes.
    pub fn cubic(ndim: usize, n: usize, l: f64) -> Result<Self> {
        Grid::new(vec![n; ndim], vec![l; ndim])
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.dims[axis] as f64
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.ndim()).map(|a| self.spacing(a)).fold(f64::INFINITY, f64::min)
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.ndim()).map(|a| self.spacing(a)).product()
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    /// Stride of `axis` in the flattened array.
    pub fn stride(&self, axis: usize) -> usize {
        self.dims[axis + 1..].iter().product()
    }

    /// Node coordinates `x_j = -L/2 + j h`; index `n/2` is the origin.
    pub fn coords(&self, axis: usize) -> Vec<f64> {
        let h = self.spacing(axis);
        let half = self.lengths[axis] / 2.0;
        (0..self.dims[axis]).map(|j| -half + j as f64 * h).collect()
    }

    /// Wavenumbers in FFT order: `(2π/L)·{0, 1, …, n/2−1, −n/2, …, −1}`.
    pub fn wavenumbers(&self, axis: usize) -> Vec<f64> {
        let n = self.dims[axis];
        let dk = 2.0 * PI / self.lengths[axis];
        (0..n).map(|m| dk * signed_mode(m, n) as f64).collect()
    }

    /// Largest resolvable wavenumber magnitude along the coarsest axis.
    pub fn nyquist(&self) -> f64 {
        (0..self.ndim()).map(|a| PI / self.spacing(a)).fold(f64::INFINITY, f64::min)
    }

    /// `|k|²` at every flattened spectral index.
    pub fn k_squared(&self) -> Vec<f64> {
        let ks: Vec<Vec<f64>> = (0..self.ndim()).map(|a| self.wavenumbers(a)).collect();
        let mut out = Vec::with_capacity(self.len());
        for_each_multi_index(&self.dims, |idx| {
            out.push(idx.iter().zip(&ks).map(|(&i, k)| k[i] * k[i]).sum());
        });
        out
    }

    /// Squared distance of every node from the box centre.
    pub fn r_squared(&self) -> Vec<f64> {
        let xs: Vec<Vec<f64>> = (0..self.ndim()).map(|a| self.coords(a)).collect();
        let mut out = Vec::with_capacity(self.len());
        for_each_multi_index(&self.dims, |idx| {
            out.push(idx.iter().zip(&xs).map(|(&i, x)| x[i] * x[i]).sum());
        });
        out
    }

    /// Evaluate `f(x)` at every node.
    pub fn sample<T>(&self, mut f: impl FnMut(&[f64]) -> T) -> Vec<T> {
        let xs: Vec<Vec<f64>> = (0..self.ndim()).map(|a| self.coords(a)).collect();
        let mut point = vec![0.0; self.ndim()];
        let mut out = Vec::with_capacity(self.len());
        for_each_multi_index(&self.dims, |idx| {
            for (a, &i) in idx.iter().enumerate() {
                point[a] = xs[a][i];
            }
            out.push(f(&point));
        });
        out
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.dims).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.ndim()];
        for a in (0..self.ndim()).rev() {
            idx[a] = flat % self.dims[a];
            flat /= self.dims[a];
        }
        idx
    }

    /// Flattened index of the box centre (`n_j/2` on every axis).
    pub fn center_index(&self) -> usize {
        let idx: Vec<usize> = self.dims.iter().map(|&n| n / 2).collect();
        self.flat_index(&idx)
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(FnlsError::GridMismatch(format!(
                "{:?}/{:?} vs {:?}/{:?}",
                self.dims, self.lengths, other.dims, other.lengths
            )))
        }
    }

    pub(crate) fn ensure_len(&self, len: usize) -> Result<()> {
        if len == self.len() {
            Ok(())
        } else {
            Err(FnlsError::GridMismatch(format!("array of {len} entries on a grid of {}", self.len())))
        }
    }
}

/// Signed mode number of FFT bin `m` of an `n`-point transform.
pub fn signed_mode(m: usize, n: usize) -> i64 {
    if m < n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

/// Visit every multi-index in row-major order.
pub fn for_each_multi_index(dims: &[usize], mut f: impl FnMut(&[usize])) {
    let total: usize = dims.iter().product();
    let mut idx = vec![0usize; dims.len()];
    for _ in 0..total {
        f(&idx);
        for a in (0..dims.len()).rev() {
            idx[a] += 1;
            if idx[a] < dims[a] {
                break;
            }
            idx[a] = 0;
        }
    }
}
