//! Periodic-box discretisation, Fourier multipliers, Sobolev pairings and
//! the free-space Riesz convolution.

pub mod fft;
pub mod field;
pub mod grid;
pub mod ops;
pub mod quadrature;
pub mod riesz;
pub mod snapshot;

pub use fft::FftNd;
pub use field::ComplexField;
pub use grid::Grid;
pub use ops::SpectralOps;
pub use riesz::{riesz_convolve, KernelQuadrature, RieszKernelPlan};
pub use snapshot::{load_snapshot, read_snapshot, save_snapshot, write_snapshot};
