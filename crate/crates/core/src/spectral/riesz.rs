//! Free-space convolution with the Riesz kernel `|x|^{β−N}`.
//!
//! Densities are zero-padded to twice the box along every axis and
//! convolved with a discrete kernel on the padded grid, which reproduces the
//! aperiodic convolution for every pair of nodes in the original box. Two
//! discrete kernels are available:
//!
//! * [`KernelQuadrature::Spectral`] (default) truncates the kernel at the box
//!   diameter `R`, for which the free-space and truncated convolutions agree
//!   inside the box, and samples the exact Fourier transform of the truncated
//!   kernel on a grid large enough to hold its support without overlap. The
//!   result is spectrally accurate for resolved densities.
//! * [`KernelQuadrature::CellAverage`] samples `|x|^{β−N}` at the node
//!   offsets and replaces the singular origin value by the kernel average
//!   over the ball of one cell volume. Consistent to `O(h^β)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fft::FftNd;
use super::grid::{for_each_multi_index, signed_mode, Grid};
use super::quadrature::{bessel_j0, gauss_legendre};
use crate::error::{FnlsError, Result};

/// Relative size below which negative density entries count as roundoff.
pub const NEGATIVE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelQuadrature {
    #[default]
    Spectral,
    CellAverage,
}

impl std::str::FromStr for KernelQuadrature {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "spectral" => Ok(KernelQuadrature::Spectral),
            "cell-average" => Ok(KernelQuadrature::CellAverage),
            other => Err(format!("unknown kernel quadrature `{other}` (spectral | cell-average)")),
        }
    }
}

impl std::fmt::Display for KernelQuadrature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            KernelQuadrature::Spectral => "spectral",
            KernelQuadrature::CellAverage => "cell-average",
        })
    }
}

/// Transformed Riesz kernel on the 2×-padded grid of a base grid.
#[derive(Debug, Clone)]
pub struct RieszKernelPlan {
    beta: f64,
    grid: Grid,
    quadrature: KernelQuadrature,
    padded_dims: Vec<usize>,
    fft: FftNd,
    kernel_hat: Vec<Complex64>,
}

impl RieszKernelPlan {
    pub fn new(grid: &Grid, beta: f64, quadrature: KernelQuadrature) -> Result<Self> {
        let nd = grid.ndim();
        if !(beta > 0.0 && beta < nd as f64) {
            return Err(FnlsError::domain(format!("kernel exponent must lie in (0, {nd}), got {beta}")));
        }
        let padded_dims: Vec<usize> = grid.dims().iter().map(|&n| 2 * n).collect();
        let mut weights = match quadrature {
            KernelQuadrature::CellAverage => cell_average_weights(grid, beta, &padded_dims),
            KernelQuadrature::Spectral => spectral_weights(grid, beta, &padded_dims),
        };
        let fft = FftNd::new(&padded_dims);
        fft.forward(&mut weights);
        Ok(RieszKernelPlan { beta, grid: grid.clone(), quadrature, padded_dims, fft, kernel_hat: weights })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn quadrature(&self) -> KernelQuadrature {
        self.quadrature
    }

    /// `(V⋆f)(x_i)` at every node of the base grid. Entries that are negative
    /// only by roundoff are clipped to zero.
    pub fn convolve(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.grid.ensure_len(f.len())?;
        let fmax = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if let Some((index, &value)) =
            f.iter().enumerate().find(|(_, &v)| v < -NEGATIVE_TOLERANCE * fmax || v.is_nan())
        {
            return Err(FnlsError::NegativeDensity { index, value });
        }
        let mut buf = vec![Complex64::default(); self.fft.len()];
        self.scatter(f, &mut buf);
        self.fft.forward(&mut buf);
        for (b, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *b *= k;
        }
        self.fft.inverse(&mut buf);
        let mut out = self.gather(&buf);
        let omax = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for v in &mut out {
            if *v < 0.0 && *v >= -NEGATIVE_TOLERANCE * omax {
                *v = 0.0;
            }
        }
        Ok(out)
    }

    fn scatter(&self, f: &[f64], buf: &mut [Complex64]) {
        let dims = self.grid.dims();
        let mut i = 0;
        for_each_multi_index(dims, |idx| {
            let flat = idx.iter().zip(&self.padded_dims).fold(0, |acc, (&j, &p)| acc * p + j);
            buf[flat] = Complex64::new(f[i], 0.0);
            i += 1;
        });
    }

    fn gather(&self, buf: &[Complex64]) -> Vec<f64> {
        let dims = self.grid.dims();
        let mut out = Vec::with_capacity(self.grid.len());
        for_each_multi_index(dims, |idx| {
            let flat = idx.iter().zip(&self.padded_dims).fold(0, |acc, (&j, &p)| acc * p + j);
            out.push(buf[flat].re);
        });
        out
    }
}

pub fn riesz_convolve(f: &[f64], plan: &RieszKernelPlan) -> Result<Vec<f64>> {
    plan.convolve(f)
}

/// Surface measure of the unit sphere in `ℝ^N`.
fn sphere_area(nd: usize) -> f64 {
    match nd {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 4.0 * PI,
    }
}

/// Mean of `|x|^{β−N}` over the ball of volume `dV` centred at the origin.
pub fn singular_cell_average(grid: &Grid, beta: f64) -> f64 {
    let nd = grid.ndim();
    let n = nd as f64;
    let radius = (n * grid.cell_volume() / sphere_area(nd)).powf(1.0 / n);
    n * radius.powf(beta - n) / beta
}

fn cell_average_weights(grid: &Grid, beta: f64, padded: &[usize]) -> Vec<Complex64> {
    let nd = grid.ndim();
    let dv = grid.cell_volume();
    let h: Vec<f64> = (0..nd).map(|a| grid.spacing(a)).collect();
    let origin = singular_cell_average(grid, beta);
    let mut w = Vec::with_capacity(padded.iter().product());
    for_each_multi_index(padded, |idx| {
        let r2: f64 = idx
            .iter()
            .zip(padded)
            .zip(&h)
            .map(|((&m, &p), &hh)| {
                let d = signed_mode(m, p) as f64 * hh;
                d * d
            })
            .sum();
        let v = if r2 == 0.0 { origin } else { r2.powf((beta - nd as f64) / 2.0) };
        w.push(Complex64::new(v * dv, 0.0));
    });
    w
}

fn spectral_weights(grid: &Grid, beta: f64, padded: &[usize]) -> Vec<Complex64> {
    let nd = grid.ndim();
    let radius = grid.lengths().iter().map(|l| l * l).sum::<f64>().sqrt();
    // the periodic box of the auxiliary transform must hold the kernel
    // support plus the density support without overlap
    let big: Vec<usize> = grid
        .dims()
        .iter()
        .zip(grid.lengths())
        .map(|(&n, &l)| {
            let factor = ((l + radius) / l - 1e-12).ceil().max(2.0) as usize;
            factor * n
        })
        .collect();
    let ks: Vec<Vec<f64>> = (0..nd)
        .map(|a| {
            let p = big[a];
            let dk = 2.0 * PI / (p as f64 * grid.spacing(a));
            (0..p).map(|m| dk * signed_mode(m, p) as f64).collect()
        })
        .collect();

    let total: usize = big.iter().product();
    let mut xs = Vec::with_capacity(total);
    for_each_multi_index(&big, |idx| {
        let k2: f64 = idx.iter().zip(&ks).map(|(&m, k)| k[m] * k[m]).sum();
        xs.push(k2.sqrt() * radius);
    });
    let mut unique = xs.clone();
    unique.sort_by(|a, b| a.partial_cmp(b).unwrap());
    unique.dedup();
    let primitive = radial_primitive(nd, beta, &unique);

    let scale = sphere_area(nd) * radius.powf(beta);
    let mut buf: Vec<Complex64> = xs
        .iter()
        .map(|&x| {
            let v = if x == 0.0 {
                scale / beta
            } else {
                let i = unique.partition_point(|&u| u < x);
                scale * x.powf(-beta) * primitive[i]
            };
            Complex64::new(v, 0.0)
        })
        .collect();
    drop(xs);
    FftNd::new(&big).inverse(&mut buf);

    // keep offsets within (−n, n) per axis; that is all a box-to-box
    // convolution ever reads
    let mut w = Vec::with_capacity(padded.iter().product());
    for_each_multi_index(padded, |idx| {
        let flat = idx.iter().zip(padded).zip(&big).fold(0usize, |acc, ((&m, &p), &b)| {
            let d = signed_mode(m, p);
            acc * b + d.rem_euclid(b as i64) as usize
        });
        w.push(Complex64::new(buf[flat].re, 0.0));
    });
    w
}

/// `Φ(X) = ∫₀^X t^{β−1} ω(t) dt` at each (ascending) `X`, with `ω = cos`,
/// `J₀` or `sin t / t` for `N = 1, 2, 3`. The transform of the kernel
/// truncated at `R` is then `|S^{N−1}|·k^{−β}·Φ(kR)`.
pub fn radial_primitive(nd: usize, beta: f64, xs: &[f64]) -> Vec<f64> {
    const SERIES_LIMIT: f64 = 2.0;
    let omega = |t: f64| -> f64 {
        match nd {
            1 => t.cos(),
            2 => bessel_j0(t),
            _ => {
                if t == 0.0 {
                    1.0
                } else {
                    t.sin() / t
                }
            }
        }
    };
    let rules: Vec<(Vec<f64>, Vec<f64>)> = [4, 8, 16].iter().map(|&n| gauss_legendre(n)).collect();
    let segment = |a: f64, b: f64| -> f64 {
        let len = b - a;
        let (x, w) = if len < 0.05 {
            &rules[0]
        } else if len < 0.3 {
            &rules[1]
        } else {
            &rules[2]
        };
        let mid = 0.5 * (a + b);
        let half = 0.5 * len;
        x.iter()
            .zip(w)
            .map(|(&xi, &wi)| {
                let t = mid + half * xi;
                wi * t.powf(beta - 1.0) * omega(t)
            })
            .sum::<f64>()
            * half
    };

    let mut out = Vec::with_capacity(xs.len());
    let mut cursor = SERIES_LIMIT;
    let mut acc = f64::NAN;
    for &x in xs {
        if x <= SERIES_LIMIT {
            out.push(series_primitive(nd, beta, x));
            continue;
        }
        if acc.is_nan() {
            acc = series_primitive(nd, beta, SERIES_LIMIT);
        }
        while cursor < x {
            let next = (cursor + 1.0).min(x);
            acc += segment(cursor, next);
            cursor = next;
        }
        out.push(acc);
    }
    out
}

/// Termwise integral of the Taylor series of `ω`, accurate for `X ≤ 2`.
fn series_primitive(nd: usize, beta: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let x2 = x * x;
    let mut coef = 1.0;
    let mut pow = x.powf(beta);
    let mut sum = 0.0;
    for m in 0..60 {
        let term = coef * pow / (beta + 2.0 * m as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        let mf = (m + 1) as f64;
        coef *= -match nd {
            1 => 1.0 / ((2.0 * mf - 1.0) * (2.0 * mf)),
            2 => 1.0 / (4.0 * mf * mf),
            _ => 1.0 / ((2.0 * mf) * (2.0 * mf + 1.0)),
        };
        pow *= x2;
    }
    sum
}
