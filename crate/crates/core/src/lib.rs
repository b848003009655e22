//! Discrete-time multi-agent consensus where every agent picks its own
//! transmission radius.
//!
//! The numerical core is generic over the scalar type (`f32`, `f64`, and for
//! the update matrix any exact [`num_traits::Num`] type such as a rational).
//! Concrete `f64` aliases used by the CLI live at the crate root.

// `!(x > 0)` style checks are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
pub mod energy;
pub mod engine;
pub mod error;
pub mod graph;
pub mod io;
pub mod oracle;
pub mod plot;
pub mod range_policy;
pub mod scalar;
pub mod vec2;

pub use dynamics::{bounded_control, saturate, step_all, unbounded_control, ControlInput, SimParams};
pub use energy::{accrue_step, compare_totals, transmit_power, EnergyComparison, EnergyLedger, PowerModel};
pub use engine::{
    contraction_estimate, diameter, run, Contraction, Scenario, SimulationTrace, StepRecord, Termination,
};
pub use error::{Error, Result};
pub use graph::{
    has_directed_spanning_tree, incoming_neighbors, outgoing_neighbors, snapshot, update_matrix, AgentId,
    TopologySnapshot, WeightMatrix,
};
pub use range_policy::{FixedDelta, RangeDecision, RangePolicy, RangeReason, Schedule};
pub use scalar::Scalar;
pub use vec2::Vec2;

/// Planar point or velocity in double precision.
pub type Vec2f = Vec2<f64>;
/// Scenario in double precision, the format read from scenario files.
pub type Scenario64 = Scenario<f64>;
/// Trace in double precision.
pub type Trace64 = SimulationTrace<f64>;
/// Range policy in double precision.
pub type Policy64 = RangePolicy<f64>;
/// Power model in double precision.
pub type PowerModel64 = PowerModel<f64>;
/// Single-precision variants, mostly useful for quick sweeps.
pub type Vec2f32 = Vec2<f32>;
pub type Scenario32 = Scenario<f32>;
