//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("state must have at least one mode")]
    EmptyState,

    #[error("mode index {mode} out of range for {n_modes}-mode state")]
    ModeOutOfRange { mode: usize, n_modes: usize },

    #[error("mode indices must be distinct, got {0} twice")]
    DuplicateMode(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("covariance matrix not symmetric (max asymmetry {defect:.3e})")]
    NotSymmetric { defect: f64 },

    #[error("covariance not physical (min symplectic eigenvalue {min_eigenvalue:.6} < 1/2)")]
    NotPhysical { min_eigenvalue: f64 },

    #[error("matrix is not symplectic (defect {defect:.3e})")]
    NotSymplectic { defect: f64 },

    #[error("squeezing factor s must satisfy s >= 1, got {0}")]
    InvalidSqueezingFactor(f64),

    #[error("additional anti-squeezing delta must be >= 0, got {0}")]
    InvalidAntiSqueezing(f64),

    #[error("shear bit m must be 0 or 1, got {0}")]
    InvalidShearBit(u8),

    #[error("measured quadrature has non-positive variance {0:.3e}")]
    DegenerateMarginal(f64),

    #[error("blur variance epsilon must be > 0, got {0}")]
    NonPositiveBlur(f64),

    #[error("lattice needs {modes} modes, exceeding the cap of {cap}")]
    ModeCapExceeded { modes: usize, cap: usize },

    #[error("lattice dimensions must be >= 1")]
    EmptyLattice,

    #[error("graph has no node {0}")]
    NodeNotFound(usize),

    #[error("node {node} ({kind}) cannot be deleted; only thermal-base nodes can")]
    NodeNotDeletable { node: usize, kind: String },

    #[error("grid spec invalid: {0}")]
    InvalidGridSpec(String),

    #[error("grid extent {extent} too small; marginals need at least {required:.3}")]
    ExtentTooSmall { required: f64, extent: f64 },

    #[error("GKP tooth width must lie in (0, 1), got {0}")]
    InvalidToothWidth(f64),

    #[error("axis {axis} out of range for a grid with {axes} axes")]
    AxisOutOfRange { axis: usize, axes: usize },

    #[error("grid specs do not match")]
    GridSpecMismatch,

    #[error("transform pushes {lost:.3e} of the grid mass outside the extent (tolerance {tolerance:.1e})")]
    MassLoss { lost: f64, tolerance: f64 },

    #[error("outcome grid does not cover the outcome density (integrated mass {mass:.6})")]
    OutcomeCoverage { mass: f64 },

    #[error("variance must be > 0, got {0}")]
    NonPositiveVariance(f64),

    #[error("anchor error probability must lie in (0, 1/2), got {0}")]
    AnchorOutOfRange(f64),

    #[error("no root for the calibration multiplier in [{lo}, {hi}]")]
    NoCalibrationRoot { lo: f64, hi: f64 },

    #[error("target error probability {0} outside the model's range")]
    TargetOutOfRange(f64),

    #[error("input sequence or list must be nonempty")]
    EmptyInput,
}

pub type Result<T> = std::result::Result<T, Error>;
