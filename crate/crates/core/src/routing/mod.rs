//! Time-varying link graphs and route selection toward the gateway.

mod path;
mod schedule;
mod snapshot;

pub use path::{
    path_bottleneck, path_cost, path_links, select_route, shortest_path, widest_path, I2rContext, PathSelection, Route, RoutingMetric,
};
pub use schedule::{compute_schedule, route_snapshot, ForwardingSchedule, RoutingConfig, ScheduleEntry, TrafficDemandSet};
pub use snapshot::{build_snapshot, build_snapshot_with_cs, gamma_neighbors, max_gamma, positions_at, GraphSnapshot, Link};
