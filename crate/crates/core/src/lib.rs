//! Planning and evaluation toolkit for aerial wireless mesh networks.
//!
//! Flying access points (FMAPs) serve ground users and relay their traffic over a
//! multi-hop aerial backhaul to a flying gateway (GW). The crate covers the link budget,
//! FMAP placement, backhaul routing over time, gateway placement and a flow-level
//! throughput simulator, plus scenario generation and report statistics.
//!
//! Every numeric routine is generic over [`Real`] (`f32` or `f64`); the `*F64` aliases
//! below name the common `f64` instantiations.

// `!(a < b)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod geometry;
pub mod gwp;
pub mod netplan;
pub mod num;
pub mod report;
pub mod routing;
pub mod scenario;
pub mod sim;

pub use error::{Error, Result};
pub use geometry::{NodeId, NodeKind, TimeGrid, Trajectory, Vec3};
pub use num::Real;

pub type Vec3F64 = geometry::Vec3<f64>;
pub type TrajectoryF64 = geometry::Trajectory<f64>;
pub type TimeGridF64 = geometry::TimeGrid<f64>;
pub type LinkBudgetF64 = channel::LinkBudget<f64>;
pub type McsTableF64 = channel::McsTable<f64>;
pub type ZoneGridF64 = netplan::ZoneGrid<f64>;
pub type NetPlanConfigF64 = netplan::NetPlanConfig<f64>;
pub type GraphSnapshotF64 = routing::GraphSnapshot<f64>;
pub type ForwardingScheduleF64 = routing::ForwardingSchedule<f64>;
pub type GwpConfigF64 = gwp::GwpConfig<f64>;
pub type SimConfigF64 = sim::SimConfig<f64>;
