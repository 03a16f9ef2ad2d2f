use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{NodeId, NodeKind, TimeGrid, Trajectory, Vec3};
use crate::netplan::ZoneGrid;
use crate::num::Real;
use crate::routing::TrafficDemandSet;

/// Offered load per source as a step function of time: each `(t, bps)` entry holds from
/// `t` until the next one. Before the first entry the source is idle.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DemandSchedule<T> {
    entries: BTreeMap<NodeId, Vec<(T, T)>>,
}

impl<T: Real> DemandSchedule<T> {
    pub fn new() -> Self {
        Self { entries: BTreeMap::new() }
    }

    /// Adds a change point; entries of one source are kept sorted by time.
    pub fn push(&mut self, id: NodeId, t: T, offered_bps: T) -> Result<()> {
        if !(offered_bps >= T::zero()) || !offered_bps.is_finite() || !t.is_finite() {
            return Err(Error::invalid(format!("demand of {id} at t = {t} must be finite and non-negative")));
        }
        let list = self.entries.entry(id).or_default();
        match list.binary_search_by(|(u, _)| u.partial_cmp(&t).unwrap()) {
            Ok(_) => return Err(Error::invalid(format!("duplicate demand entry for {id} at t = {t}"))),
            Err(i) => list.insert(i, (t, offered_bps)),
        }
        Ok(())
    }

    /// Constant load from `t0` onward.
    pub fn constant(loads: impl IntoIterator<Item = (NodeId, T)>, t0: T) -> Result<Self> {
        let mut d = Self::new();
        for (id, bps) in loads {
            d.push(id, t0, bps)?;
        }
        Ok(d)
    }

    pub fn sources(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.entries.keys().copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (NodeId, T, T)> + '_ {
        self.entries.iter().flat_map(|(id, l)| l.iter().map(move |(t, b)| (*id, *t, *b)))
    }

    pub fn offered_at(&self, id: NodeId, t: T) -> T {
        let Some(list) = self.entries.get(&id) else {
            return T::zero();
        };
        let tol = T::lit(1e-9) * (T::one() + t.abs());
        list.iter().take_while(|(u, _)| *u <= t + tol).last().map_or(T::zero(), |(_, b)| *b)
    }

    /// Samples every source at the grid instants.
    pub fn sample(&self, grid: &TimeGrid<T>) -> Result<TrafficDemandSet<T>> {
        let mut set = TrafficDemandSet::new(grid.steps);
        for id in self.sources() {
            set.set(id, grid.instants().map(|t| self.offered_at(id, t)).collect())?;
        }
        Ok(set)
    }
}

/// Axis-aligned region with a per-FMAP offered load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemandZone<T> {
    pub min: Vec3<T>,
    pub max: Vec3<T>,
    pub offered_bps: T,
}

impl<T: Real> DemandZone<T> {
    pub fn contains(&self, p: &Vec3<T>) -> bool {
        (self.min.x..=self.max.x).contains(&p.x) && (self.min.y..=self.max.y).contains(&p.y) && (self.min.z..=self.max.z).contains(&p.z)
    }
}

/// Zones of different traffic intensity; an FMAP takes the load of the first zone that
/// contains its initial position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandLayout<T> {
    pub zones: Vec<DemandZone<T>>,
}

impl<T: Real> DemandLayout<T> {
    pub fn new(zones: Vec<DemandZone<T>>, bounds: Vec3<T>) -> Result<Self> {
        for z in &zones {
            if !(z.offered_bps >= T::zero()) {
                return Err(Error::invalid("zone load must be non-negative"));
            }
            let inside = |p: &Vec3<T>| {
                p.x >= T::zero() && p.y >= T::zero() && p.z >= T::zero() && p.x <= bounds.x && p.y <= bounds.y && p.z <= bounds.z
            };
            if !(inside(&z.min) && inside(&z.max)) || z.min.x > z.max.x || z.min.y > z.max.y || z.min.z > z.max.z {
                return Err(Error::invalid(format!("zone {} .. {} is not a box inside {bounds}", z.min, z.max)));
            }
        }
        Ok(Self { zones })
    }

    /// Two halves split at `x = split_x`, with loads `west` and `east`.
    pub fn two_zone(bounds: Vec3<T>, split_x: T, west: T, east: T) -> Result<Self> {
        let zero = T::zero();
        Self::new(
            vec![
                DemandZone { min: Vec3::new(zero, zero, zero), max: Vec3::new(split_x, bounds.y, bounds.z), offered_bps: west },
                DemandZone { min: Vec3::new(split_x, zero, zero), max: bounds, offered_bps: east },
            ],
            bounds,
        )
    }

    pub fn zone_of(&self, p: &Vec3<T>) -> Option<usize> {
        self.zones.iter().position(|z| z.contains(p))
    }

    /// Constant loads for every FMAP from its position at `t0`; FMAPs outside every zone
    /// are idle.
    pub fn assign(&self, trajectories: &[Trajectory<T>], t0: T) -> Result<DemandSchedule<T>> {
        DemandSchedule::constant(
            trajectories.iter().filter(|t| t.node().kind == NodeKind::Fmap).map(|tr| {
                let load = self.zone_of(&tr.position_at(t0)).map_or(T::zero(), |z| self.zones[z].offered_bps);
                (tr.id(), load)
            }),
            t0,
        )
    }
}

/// Aggregates ground-user loads into the zones of `grid`: `T_z` is the sum over users
/// located in zone `z`.
pub fn zone_demand_from_ues<T: Real>(ue_positions: &[Vec3<T>], ue_offered: &[T], grid: &ZoneGrid<T>) -> Result<ZoneGrid<T>> {
    if ue_positions.len() != ue_offered.len() {
        return Err(Error::invalid("user position and load lists differ in length"));
    }
    let outside: Vec<String> =
        ue_positions.iter().enumerate().filter(|(_, p)| grid.zone_of(p.x, p.y).is_none()).map(|(i, p)| format!("#{i} at {p}")).collect();
    if !outside.is_empty() {
        return Err(Error::invalid(format!("users outside the map: {}", outside.join(", "))));
    }
    let mut demand = vec![T::zero(); grid.zone_count()];
    for (p, bps) in ue_positions.iter().zip(ue_offered) {
        demand[grid.zone_of(p.x, p.y).unwrap()] += *bps;
    }
    grid.clone().with_demand(demand)
}
