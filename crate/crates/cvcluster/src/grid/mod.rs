//! Brute-force phase-space route.
//!
//! Everything in this module works directly on sampled Wigner functions:
//! square grids of W(q, p) values, bicubic interpolation for coordinate
//! substitutions, dense quadrature for convolutions and outcome averages.
//! Nothing here knows about covariance matrices beyond using them to seed
//! initial grids, which is the point: results obtained on the grid are an
//! independent check on the closed-form channel algebra in [`crate::cluster`],
//! and vice versa.
//!
//! The submodules split as follows. [`GridWigner`] and [`GridSpec`] hold the
//! sampled function and its geometry, with binary save/load. [`gkp_zero`]
//! builds the approximate GKP |0> Wigner function from its comb closed form.
//! The ops layer provides the primitive moves (interpolation, symplectic
//! substitution, momentum blur, exact Fourier remap, axis shifts). The gate
//! layer runs the teleportation step per pinned outcome and averages over
//! the outcome density by direct quadrature. The two-mode layer assembles
//! the full post-measurement Wigner factor product as a six-variable
//! precision form and marginalizes it algebraically, which is a third,
//! grid-free route to the same channels.

mod gate;
mod gkp;
mod ops;
mod two_mode;
mod wigner;

pub use gate::{
    one_mode_gate_averaged_closed_grid, one_mode_gate_averaged_grid,
    one_mode_gate_conditioned_grid, OutcomeAverageOptions, OutcomeAverageReport,
};
pub use gkp::gkp_zero;
pub use ops::{convolve_axis, fourier_remap, interpolate, shift_axis, substitute_symplectic};
pub use two_mode::{
    argument_structure_verdict, two_mode_averaged_precision, two_mode_conditioned_precision,
    two_mode_factor_product, two_mode_marginalized_value,
    validate_marginalization_by_quadrature, ArgumentVerdict,
};
pub use wigner::{GridComparison, GridSpec, GridWigner, Moments};
