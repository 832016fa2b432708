//! Numerical laboratory for the fractional Schrödinger equation with a
//! Hartree-type nonlinearity,
//!
//! ```text
//! i∂_tφ + (−Δ)^sφ = (V ⋆ G(|φ|)) G'(φ),    V(x) = |x|^{β−N},
//! ```
//!
//! on a periodic box standing in for `ℝ^N`: mass-constrained ground states,
//! structure-preserving time integration and the experiments around them
//! (conservation, scaling, subadditivity, orbital stability).

pub mod analysis;
pub mod config;
pub mod error;
pub mod evolution;
pub mod functionals;
pub mod ground_state;
pub mod model;
pub mod report;
pub mod spectral;

pub use error::{FnlsError, Result};
pub use functionals::{EnergyBreakdown, Problem};
pub use ground_state::{GroundStateResult, SolverOptions};
pub use model::{AdmissibilityReport, NonlinearitySpec, PhysicsParams};
pub use spectral::{ComplexField, Grid, KernelQuadrature, RieszKernelPlan, SpectralOps};
