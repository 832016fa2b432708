use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Multidimensional complex FFT over a row-major array, built from one 1-D
/// plan per axis. The forward transform is unnormalised; the inverse
/// carries the `1/∏n_j` factor.
#[derive(Clone)]
pub struct FftNd {
    dims: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl fmt::Debug for FftNd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FftNd").field("dims", &self.dims).finish()
    }
}

impl FftNd {
    pub fn new(dims: &[usize]) -> Self {
        let mut planner = FftPlanner::new();
        let forward = dims.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = dims.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        FftNd { dims: dims.to_vec(), forward, inverse }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inverse);
        let scale = 1.0 / self.len() as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    fn run(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>]) {
        assert_eq!(data.len(), self.len(), "buffer does not match transform size");
        let nd = self.dims.len();
        let mut scratch = Vec::new();
        let mut block = Vec::new();
        for axis in 0..nd {
            let n = self.dims[axis];
            let plan = &plans[axis];
            let scratch_len = plan.get_inplace_scratch_len();
            if scratch.len() < scratch_len {
                scratch.resize(scratch_len, Complex64::default());
            }
            let inner: usize = self.dims[axis + 1..].iter().product();
            if inner == 1 {
                plan.process_with_scratch(data, &mut scratch[..scratch_len]);
                continue;
            }
            // gather each [n × inner] block so the lines along `axis` become
            // contiguous, transform, scatter back
            let span = n * inner;
            block.resize(span, Complex64::default());
            for chunk in data.chunks_exact_mut(span) {
                for k in 0..n {
                    for i in 0..inner {
                        block[i * n + k] = chunk[k * inner + i];
                    }
                }
                plan.process_with_scratch(&mut block, &mut scratch[..scratch_len]);
                for k in 0..n {
                    for i in 0..inner {
                        chunk[k * inner + i] = block[i * n + k];
                    }
                }
            }
        }
    }
}
