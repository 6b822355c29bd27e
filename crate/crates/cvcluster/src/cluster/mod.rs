//! Cluster-state machinery: measurement-based gates teleported through
//! squeezed-thermal resource modes, and the lattice the modes live on.
//!
//! The central fact, certified numerically by the acceptance suite, is that
//! once measurement outcomes are averaged over (with the corrections
//! applied), every channel here depends on the resource modes only through
//! their squeezed variance ε. The anti-squeezed variance κ steers individual
//! trajectories but cancels from the average, so excess anti-squeezing costs
//! nothing at the channel level.

mod flowerbed;
mod gates;

pub use flowerbed::{DeletionRecord, FlowerbedGraph, GraphEdge, GraphNode, NodeKind};
pub use gates::{
    averaged_noise_budget, momentum_blur, one_mode_gate_averaged, one_mode_gate_conditioned,
    one_mode_gate_ideal, one_mode_gate_monte_carlo, one_mode_gate_sampled,
    two_mode_gate_averaged, two_mode_gate_conditioned, two_mode_gate_ideal,
    two_mode_gate_monte_carlo, two_mode_gate_sampled, Correction, GateKind, GateStepRecord,
};
