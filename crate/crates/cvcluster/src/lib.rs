//! Simulation toolkit for continuous-variable (CV) cluster-state computation
//! with impure, squeezed-thermal resource states.
//!
//! The crate implements the measurement-based gate channels of a CV cluster
//! computer in two independent ways and lets them check each other:
//!
//! - [`gaussian`]: exact Gaussian states (mean vector + covariance matrix),
//!   symplectic gates, and homodyne/heterodyne conditioning in closed form.
//! - [`cluster`]: the cluster-state channels built from those primitives:
//!   node deletion, the one-mode and two-mode measurement gates (conditioned
//!   on outcomes, exactly outcome-averaged, and Monte-Carlo averaged), and
//!   the flowerbed-lattice bookkeeping.
//! - [`grid`]: a brute-force phase-space oracle: discretized Wigner
//!   functions evolved by literal coordinate substitution, slice integration
//!   and quadrature. Works on non-Gaussian inputs (approximate GKP states),
//!   which is where the interesting checks live.
//! - [`threshold`]: squeezing-unit conversions and the GKP nearest-bin
//!   misidentification error model that maps cluster squeezing to a
//!   qubit-level gate error rate.
//!
//! The headline fact the two formalisms certify: the outcome-averaged gate
//! channels depend only on the squeezed-quadrature variance ε. The
//! anti-squeezed variance κ (and with it any excess anti-squeezing of an
//! impure resource) cancels exactly from every averaged channel, so impurity
//! does not move the squeezing threshold.

pub mod cluster;
pub mod error;
pub mod gaussian;
pub mod grid;
pub mod threshold;

pub use error::{Error, Result};
