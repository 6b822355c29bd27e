//! Exact Gaussian-state representation and the primitive operations from
//! which every closed-form channel in this crate is composed.
//!
//! Conventions (ħ = 1 throughout):
//! - quadrature ordering is (q₁..qₙ, p₁..pₙ); the canonical symplectic form
//!   for that ordering is Ω = [[0, I], [−I, 0]];
//! - the vacuum has ⟨q̂²⟩ = ⟨p̂²⟩ = 1/2;
//! - a squeezed thermal resource has variance κ = (s² + δ²)/2 along q
//!   (anti-squeezed) and ε = s⁻²/2 along p (squeezed), where s ≥ 1 is the
//!   squeezing factor and δ ≥ 0 the additional anti-squeezing. δ = 0 is the
//!   pure squeezed vacuum, s = 1 and δ = 0 the vacuum itself.

mod conditioning;
mod state;
mod transform;

pub use conditioning::{
    condition_heterodyne, condition_on_quadrature, quadrature_marginal, sample_quadrature,
    ConditioningOutcome, Quadrature,
};
pub use state::{random_physical_state, symplectic_eigenvalues_of, GaussianState};
pub use transform::{symplectic_form, SymplecticTransform};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Maximum tolerated asymmetry in a covariance matrix.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Slack below 1/2 tolerated for symplectic eigenvalues of physical states,
/// absorbing float error accumulated over ~100 chained gates.
pub const PHYSICALITY_TOL: f64 = 1e-9;
/// Max tolerated deviation of SᵀΩS from Ω for accepted symplectic matrices.
pub const SYMPLECTIC_TOL: f64 = 1e-12;

/// Resource-state parameters (s, δ) and the variances they induce.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezedThermalSpec {
    s: f64,
    delta: f64,
}

impl SqueezedThermalSpec {
    /// A squeezed thermal state with squeezing factor `s` ≥ 1 and additional
    /// anti-squeezing `delta` ≥ 0. The squeezed quadrature (p) keeps the
    /// squeezed-vacuum variance ε = s⁻²/2; the anti-squeezed quadrature (q)
    /// carries κ = (s² + δ²)/2.
    pub fn new(s: f64, delta: f64) -> Result<Self> {
        if !s.is_finite() || s < 1.0 {
            return Err(Error::InvalidSqueezingFactor(s));
        }
        if !delta.is_finite() || delta < 0.0 {
            return Err(Error::InvalidAntiSqueezing(delta));
        }
        Ok(Self { s, delta })
    }

    pub fn vacuum() -> Self {
        Self { s: 1.0, delta: 0.0 }
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Squeezed-quadrature variance ε = s⁻²/2.
    pub fn epsilon(&self) -> f64 {
        0.5 / (self.s * self.s)
    }

    /// Anti-squeezed-quadrature variance κ = (s² + δ²)/2.
    pub fn kappa(&self) -> f64 {
        0.5 * (self.s * self.s + self.delta * self.delta)
    }

    /// Squeezing parameter r = ½ ln s, so s = e²ʳ.
    pub fn squeezing_parameter(&self) -> f64 {
        0.5 * self.s.ln()
    }

    /// Pure iff there is no additional anti-squeezing, i.e. √(εκ) = 1/2.
    pub fn is_pure(&self) -> bool {
        self.delta == 0.0
    }
}

/// What a single measurement observed: which mode, which basis, the outcome
/// value(s), and the probability density of that outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementOutcome {
    pub mode: usize,
    pub basis: OutcomeBasis,
    /// One value for a quadrature measurement, (q, p) pair for heterodyne.
    pub values: Vec<f64>,
    pub density: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutcomeBasis {
    Quadrature(Quadrature),
    Heterodyne,
}
