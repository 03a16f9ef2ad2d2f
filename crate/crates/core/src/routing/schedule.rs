use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::path::{select_route, PathSelection, Route, RoutingMetric};
use super::snapshot::{build_snapshot_with_cs, positions_at, GraphSnapshot};
use crate::channel::LinkBudget;
use crate::error::{Error, Result};
use crate::geometry::{NodeId, TimeGrid, Trajectory};
use crate::num::Real;

/// Offered load per source and time step, in bit/s.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrafficDemandSet<T> {
    steps: usize,
    offered: BTreeMap<NodeId, Vec<T>>,
}

impl<T: Real> TrafficDemandSet<T> {
    pub fn new(steps: usize) -> Self {
        Self { steps, offered: BTreeMap::new() }
    }

    /// Every listed source offers `rate` at every step.
    pub fn constant(sources: impl IntoIterator<Item = NodeId>, rate: T, steps: usize) -> Result<Self> {
        let mut d = Self::new(steps);
        for s in sources {
            d.set(s, vec![rate; steps])?;
        }
        Ok(d)
    }

    pub fn set(&mut self, source: NodeId, series: Vec<T>) -> Result<()> {
        if series.len() != self.steps {
            return Err(Error::invalid(format!("demand series for {source} has {} steps, expected {}", series.len(), self.steps)));
        }
        if let Some(v) = series.iter().find(|v| !(v.is_finite() && **v >= T::zero())) {
            return Err(Error::invalid(format!("demand for {source} must be finite and non-negative, got {v}")));
        }
        self.offered.insert(source, series);
        Ok(())
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn sources(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.offered.keys().copied()
    }

    /// Offered load of `source` at step `k`, 0 for unknown sources.
    pub fn offered(&self, source: NodeId, k: usize) -> T {
        self.offered.get(&source).and_then(|s| s.get(k)).copied().unwrap_or_else(T::zero)
    }

    pub fn series(&self, source: NodeId) -> Option<&[T]> {
        self.offered.get(&source).map(|v| v.as_slice())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoutingConfig<T> {
    pub selection: PathSelection<T>,
    /// Carrier-sense SNR threshold; the link threshold when `None`.
    pub cs_threshold_db: Option<T>,
}

impl<T: Real> Default for RoutingConfig<T> {
    fn default() -> Self {
        Self { selection: PathSelection::euclidean(), cs_threshold_db: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry<T> {
    pub t: T,
    pub route: Option<Route<T>>,
    /// Path differs from the previous step; always set at the first step.
    pub changed: bool,
}

/// Route of every source at every instant of a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardingSchedule<T> {
    grid: TimeGrid<T>,
    gw: NodeId,
    entries: BTreeMap<NodeId, Vec<ScheduleEntry<T>>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ScheduleRecord<T> {
    t: T,
    src: NodeId,
    path: Option<Vec<NodeId>>,
    cost: Option<T>,
    changed: bool,
}

impl<T: Real> ForwardingSchedule<T> {
    /// Assembles a schedule from per-step routes, deriving the `changed` flags.
    pub fn from_routes(grid: TimeGrid<T>, gw: NodeId, routes: BTreeMap<NodeId, Vec<Option<Route<T>>>>) -> Result<Self> {
        grid.validate()?;
        let mut entries = BTreeMap::new();
        for (src, series) in routes {
            if series.len() != grid.steps {
                return Err(Error::invalid(format!("route series for {src} has {} steps, expected {}", series.len(), grid.steps)));
            }
            let mut prev: Option<Option<Vec<NodeId>>> = None;
            let list = series
                .into_iter()
                .enumerate()
                .map(|(k, route)| {
                    let path = route.as_ref().map(|r| r.path.clone());
                    let changed = prev.as_ref() != Some(&path);
                    prev = Some(path);
                    ScheduleEntry { t: grid.instant(k), route, changed }
                })
                .collect();
            entries.insert(src, list);
        }
        Ok(Self { grid, gw, entries })
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    pub fn gw(&self) -> NodeId {
        self.gw
    }

    pub fn sources(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.entries.keys().copied()
    }

    pub fn entries(&self, source: NodeId) -> Option<&[ScheduleEntry<T>]> {
        self.entries.get(&source).map(|v| v.as_slice())
    }

    pub fn route_at(&self, source: NodeId, k: usize) -> Option<&Route<T>> {
        self.entries.get(&source)?.get(k)?.route.as_ref()
    }

    /// Instants at which the route of `source` must be (re)installed.
    pub fn update_instants(&self, source: NodeId) -> Vec<T> {
        self.entries.get(&source).map(|e| e.iter().filter(|e| e.changed).map(|e| e.t).collect()).unwrap_or_default()
    }

    /// Same grid, with every source pinned to its first-step route.
    pub fn frozen_at_start(&self) -> Self {
        let routes = self.entries.iter().map(|(s, e)| (*s, vec![e.first().and_then(|e| e.route.clone()); e.len()])).collect();
        Self::from_routes(self.grid, self.gw, routes).expect("same grid and lengths")
    }

    /// One JSON object per line, ordered by source then time, after a header line
    /// carrying `input_hash`.
    pub fn write_ndjson<W: Write>(&self, mut w: W, input_hash: &str) -> Result<()> {
        let header = serde_json::json!({
            "format": "aeronet-schedule",
            "version": 1,
            "gw": self.gw,
            "t0": self.grid.t0.to_f64_lossy(),
            "dt": self.grid.dt.to_f64_lossy(),
            "steps": self.grid.steps,
            "input_hash": input_hash,
        });
        writeln!(w, "{header}")?;
        for (src, list) in &self.entries {
            for e in list {
                let rec = ScheduleRecord {
                    t: e.t,
                    src: *src,
                    path: e.route.as_ref().map(|r| r.path.clone()),
                    cost: e.route.as_ref().map(|r| r.cost),
                    changed: e.changed,
                };
                serde_json::to_writer(&mut w, &rec)?;
                writeln!(w)?;
            }
        }
        Ok(())
    }

    /// Reads what [`Self::write_ndjson`] produces. Records are matched to grid steps by
    /// position within each source.
    pub fn read_ndjson<R: BufRead>(r: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Header<T> {
            gw: NodeId,
            t0: T,
            dt: T,
            steps: usize,
        }
        let mut header: Option<Header<T>> = None;
        let mut routes: BTreeMap<NodeId, Vec<Option<Route<T>>>> = BTreeMap::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let value: serde_json::Value = serde_json::from_str(&line).map_err(|e| Error::Parse { line: lineno, msg: e.to_string() })?;
            if value.get("format").is_some() {
                header = Some(serde_json::from_value(value).map_err(|e| Error::Schema(format!("line {lineno}: {e}")))?);
                continue;
            }
            let rec: ScheduleRecord<T> = serde_json::from_value(value).map_err(|e| Error::Schema(format!("line {lineno}: {e}")))?;
            let route = match (rec.path, rec.cost) {
                (Some(path), Some(cost)) if !path.is_empty() => Some(Route { path, cost }),
                (None, _) => None,
                _ => return Err(Error::Schema(format!("line {lineno}: path without cost"))),
            };
            routes.entry(rec.src).or_default().push(route);
        }
        let h = header.ok_or_else(|| Error::Schema("missing schedule header".into()))?;
        Self::from_routes(TimeGrid::new(h.t0, h.dt, h.steps)?, h.gw, routes)
    }
}

/// Routes every source with positive demand at one instant.
///
/// With the interference metric the active set is resolved in two passes: routes are
/// first computed at `alpha = 0`, the active set becomes the sources plus every relay on
/// those routes, and the final routes are computed with that set.
pub fn route_snapshot<T: Real>(
    snapshot: &GraphSnapshot<T>,
    selection: &PathSelection<T>,
    sources: &[NodeId],
    gw: NodeId,
) -> Result<BTreeMap<NodeId, Option<Route<T>>>> {
    let route_all = |sel: &PathSelection<T>, active: &BTreeSet<NodeId>| -> Result<BTreeMap<NodeId, Option<Route<T>>>> {
        sources.iter().map(|s| Ok((*s, select_route(snapshot, sel, *s, gw, active)?))).collect()
    };
    let mut active: BTreeSet<NodeId> = sources.iter().copied().collect();
    if let PathSelection::MinCost { metric: RoutingMetric::I2r { .. } } = selection {
        let first = route_all(&PathSelection::MinCost { metric: RoutingMetric::i2r(T::zero())? }, &active)?;
        for r in first.values().flatten() {
            let relays = r.path.iter().skip(1).filter(|n| **n != gw);
            active.extend(relays);
        }
    }
    route_all(selection, &active)
}

/// Route table of every demand source at every grid instant.
pub fn compute_schedule<T: Real>(
    trajectories: &[Trajectory<T>],
    grid: &TimeGrid<T>,
    budget: &LinkBudget<T>,
    config: &RoutingConfig<T>,
    demands: &TrafficDemandSet<T>,
    gw: NodeId,
) -> Result<ForwardingSchedule<T>> {
    grid.validate()?;
    config.selection.validate()?;
    if demands.steps() != grid.steps {
        return Err(Error::invalid(format!("demand has {} steps, grid has {}", demands.steps(), grid.steps)));
    }
    if !trajectories.iter().any(|t| t.id() == gw) {
        return Err(Error::InvalidScenario(format!("gateway {gw} has no trajectory")));
    }
    let known: BTreeSet<NodeId> = trajectories.iter().map(|t| t.id()).collect();
    if let Some(s) = demands.sources().find(|s| !known.contains(s)) {
        return Err(Error::InvalidScenario(format!("demand source {s} has no trajectory")));
    }
    let cs = config.cs_threshold_db.unwrap_or(budget.snr_threshold_db);
    let per_step: Vec<BTreeMap<NodeId, Option<Route<T>>>> = (0..grid.steps)
        .into_par_iter()
        .map(|k| {
            let t = grid.instant(k);
            let sources: Vec<NodeId> = demands.sources().filter(|s| demands.offered(*s, k) > T::zero()).collect();
            if sources.is_empty() {
                return Ok(BTreeMap::new());
            }
            let snap = build_snapshot_with_cs(&positions_at(trajectories, t), budget, cs, t)?;
            route_snapshot(&snap, &config.selection, &sources, gw)
        })
        .collect::<Result<_>>()?;
    let routes = demands.sources().map(|s| (s, per_step.iter().map(|m| m.get(&s).cloned().flatten()).collect())).collect();
    ForwardingSchedule::from_routes(*grid, gw, routes)
}
