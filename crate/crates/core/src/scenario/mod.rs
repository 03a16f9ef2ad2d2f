//! Scenario inputs: mobility generation, traffic demand and the NDJSON scenario format.

mod demand;
mod file;
pub mod fixtures;
mod rwm;

pub use demand::{zone_demand_from_ues, DemandLayout, DemandSchedule, DemandZone};
pub use file::{read_demands, write_demands, ScenarioFile, ScenarioHeader, DEMAND_FORMAT, FORMAT_VERSION, SCENARIO_FORMAT};
pub use rwm::{generate_rwm, node_rng, splitmix64, unit, RwmConfig};
