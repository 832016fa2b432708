//! Experiments built on the solver and the integrator.

pub mod levy;
pub mod orbit;
pub mod perturb;
pub mod scaling;
pub mod stability;
pub mod subadd;

pub use levy::{levy_concentration, Concentration, ConcentrationProfile};
pub use orbit::{orbit_distance, OrbitDistanceResult, ShiftSearch};
pub use perturb::PerturbationKind;
pub use scaling::{fit_line, gn_hls_exponents, scaling_exponents, ExponentFit, LineFit};
pub use stability::{stability_experiment, StabilityReport, StabilityRow, StabilitySetup};
pub use subadd::{subadditivity_check, theta_scaling_check};
