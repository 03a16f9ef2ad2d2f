use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::demand::DemandSchedule;
use crate::channel::LinkBudget;
use crate::error::{Error, Result};
use crate::geometry::{Node, NodeId, NodeKind, TimeGrid, Trajectory, Vec3, Waypoint};
use crate::num::Real;
use crate::routing::TrafficDemandSet;

pub const SCENARIO_FORMAT: &str = "aeronet-scenario";
pub const DEMAND_FORMAT: &str = "aeronet-demand";
pub const FORMAT_VERSION: u32 = 1;

/// First line of a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct ScenarioHeader<T> {
    pub format: String,
    pub version: u32,
    pub seed: Option<u64>,
    pub generator: String,
    pub grid: TimeGrid<T>,
    pub budget: LinkBudget<T>,
    pub nodes: Vec<Node>,
    #[serde(default)]
    pub meta: BTreeMap<String, Value>,
}

impl<T: Real> ScenarioHeader<T> {
    pub fn new(generator: impl Into<String>, seed: Option<u64>, grid: TimeGrid<T>, budget: LinkBudget<T>, nodes: Vec<Node>) -> Self {
        Self {
            format: SCENARIO_FORMAT.into(),
            version: FORMAT_VERSION,
            seed,
            generator: generator.into(),
            grid,
            budget,
            nodes,
            meta: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct WaypointRecord<T> {
    t: T,
    id: NodeId,
    x: T,
    y: T,
    z: T,
}

#[derive(Debug, Serialize, Deserialize)]
struct DemandRecord<T> {
    id: NodeId,
    t: T,
    offered_bps: T,
}

#[derive(Debug, Serialize, Deserialize)]
struct DemandHeader {
    format: String,
    version: u32,
    seed: Option<u64>,
}

/// Trajectories, demands and radio settings of one experiment.
///
/// On disk: NDJSON with the header on the first line, then waypoint records
/// `{"t","id","x","y","z"}` sorted by `(id, t)`, then demand records
/// `{"id","t","offered_bps"}` sorted the same way.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFile<T> {
    pub header: ScenarioHeader<T>,
    trajectories: Vec<Trajectory<T>>,
    pub demands: DemandSchedule<T>,
}

fn schema(line: usize, e: impl std::fmt::Display) -> Error {
    Error::Schema(format!("line {line}: {e}"))
}

fn parse_line(line: &str, lineno: usize) -> Result<Value> {
    serde_json::from_str(line).map_err(|e| Error::Parse { line: lineno, msg: e.to_string() })
}

fn write_record<W: Write, S: Serialize>(w: &mut W, rec: &S) -> Result<()> {
    serde_json::to_writer(&mut *w, rec)?;
    writeln!(w)?;
    Ok(())
}

impl<T: Real> ScenarioFile<T> {
    /// Checks that nodes are unique, every node has a trajectory and every demand source
    /// is a known node.
    pub fn new(header: ScenarioHeader<T>, mut trajectories: Vec<Trajectory<T>>, demands: DemandSchedule<T>) -> Result<Self> {
        header.grid.validate()?;
        header.budget.validate()?;
        let mut ids = BTreeSet::new();
        if let Some(n) = header.nodes.iter().find(|n| !ids.insert(n.id)) {
            return Err(Error::InvalidScenario(format!("node {} declared twice", n.id)));
        }
        trajectories.sort_by_key(|t| t.id());
        let declared: BTreeMap<NodeId, Node> = header.nodes.iter().map(|n| (n.id, *n)).collect();
        for tr in &trajectories {
            match declared.get(&tr.id()) {
                Some(n) if *n == tr.node() => {}
                Some(n) => return Err(Error::InvalidScenario(format!("node {} kind differs from its header entry {:?}", n.id, n.kind))),
                None => return Err(Error::InvalidScenario(format!("trajectory for undeclared node {}", tr.id()))),
            }
        }
        if let Some(w) = trajectories.windows(2).find(|w| w[0].id() == w[1].id()) {
            return Err(Error::InvalidScenario(format!("two trajectories for node {}", w[0].id())));
        }
        if trajectories.len() != declared.len() {
            let have: BTreeSet<NodeId> = trajectories.iter().map(|t| t.id()).collect();
            let missing: Vec<String> = declared.keys().filter(|k| !have.contains(k)).map(|k| k.to_string()).collect();
            return Err(Error::InvalidScenario(format!("nodes without trajectory: {}", missing.join(", "))));
        }
        if let Some(s) = demands.sources().find(|s| !declared.contains_key(s)) {
            return Err(Error::InvalidScenario(format!("demand source {s} has no trajectory")));
        }
        Ok(Self { header, trajectories, demands })
    }

    pub fn trajectories(&self) -> &[Trajectory<T>] {
        &self.trajectories
    }

    pub fn trajectory(&self, id: NodeId) -> Option<&Trajectory<T>> {
        self.trajectories.iter().find(|t| t.id() == id)
    }

    /// Lowest-id gateway node.
    pub fn gw(&self) -> Option<NodeId> {
        self.header.nodes.iter().filter(|n| n.kind == NodeKind::Gw).map(|n| n.id).min()
    }

    pub fn nodes_of_kind(&self, kind: NodeKind) -> Vec<NodeId> {
        self.trajectories.iter().filter(|t| t.node().kind == kind).map(|t| t.id()).collect()
    }

    /// Demands sampled at the header's grid.
    pub fn demand_set(&self) -> Result<TrafficDemandSet<T>> {
        self.demands.sample(&self.header.grid)
    }

    pub fn write<W: Write>(&self, w: W) -> Result<()> {
        let mut w = BufWriter::new(w);
        write_record(&mut w, &self.header)?;
        for tr in &self.trajectories {
            for wp in tr.waypoints() {
                write_record(&mut w, &WaypointRecord { t: wp.t, id: tr.id(), x: wp.pos.x, y: wp.pos.y, z: wp.pos.z })?;
            }
        }
        for (id, t, offered_bps) in self.demands.entries() {
            write_record(&mut w, &DemandRecord { id, t, offered_bps })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let mut header: Option<ScenarioHeader<T>> = None;
        let mut waypoints: BTreeMap<NodeId, Vec<Waypoint<T>>> = BTreeMap::new();
        let mut demands = DemandSchedule::new();
        for (i, line) in r.lines().enumerate() {
            let lineno = i + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let v = parse_line(&line, lineno)?;
            if header.is_none() {
                let h: ScenarioHeader<T> = serde_json::from_value(v).map_err(|e| schema(lineno, e))?;
                if h.format != SCENARIO_FORMAT {
                    return Err(schema(lineno, format!("expected format {SCENARIO_FORMAT}, found {}", h.format)));
                }
                if h.version != FORMAT_VERSION {
                    return Err(schema(lineno, format!("unsupported version {}", h.version)));
                }
                header = Some(h);
            } else if v.get("offered_bps").is_some() {
                let d: DemandRecord<T> = serde_json::from_value(v).map_err(|e| schema(lineno, e))?;
                demands.push(d.id, d.t, d.offered_bps).map_err(|e| schema(lineno, e))?;
            } else {
                let w: WaypointRecord<T> = serde_json::from_value(v).map_err(|e| schema(lineno, e))?;
                waypoints.entry(w.id).or_default().push(Waypoint { t: w.t, pos: Vec3::new(w.x, w.y, w.z) });
            }
        }
        let header = header.ok_or_else(|| Error::Schema("empty scenario file".into()))?;
        let kinds: BTreeMap<NodeId, Node> = header.nodes.iter().map(|n| (n.id, *n)).collect();
        let trajectories = waypoints
            .into_iter()
            .map(|(id, mut wps)| {
                let node = *kinds.get(&id).ok_or_else(|| Error::InvalidScenario(format!("waypoints for undeclared node {id}")))?;
                wps.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap());
                Trajectory::new(node, wps)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(header, trajectories, demands)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read(BufReader::new(File::open(path)?))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write(File::create(path)?)
    }
}

/// Writes a standalone demand file: a header line, then `{"id","t","offered_bps"}`
/// records sorted by `(id, t)`.
pub fn write_demands<T: Real, W: Write>(w: W, demands: &DemandSchedule<T>, seed: Option<u64>) -> Result<()> {
    let mut w = BufWriter::new(w);
    write_record(&mut w, &DemandHeader { format: DEMAND_FORMAT.into(), version: FORMAT_VERSION, seed })?;
    for (id, t, offered_bps) in demands.entries() {
        write_record(&mut w, &DemandRecord { id, t, offered_bps })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_demands<T: Real, R: BufRead>(r: R) -> Result<DemandSchedule<T>> {
    let mut seen_header = false;
    let mut demands = DemandSchedule::new();
    for (i, line) in r.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v = parse_line(&line, lineno)?;
        if !seen_header {
            let h: DemandHeader = serde_json::from_value(v).map_err(|e| schema(lineno, e))?;
            if h.format != DEMAND_FORMAT || h.version != FORMAT_VERSION {
                return Err(schema(lineno, format!("expected {DEMAND_FORMAT} version {FORMAT_VERSION}")));
            }
            seen_header = true;
            continue;
        }
        let d: DemandRecord<T> = serde_json::from_value(v).map_err(|e| schema(lineno, e))?;
        demands.push(d.id, d.t, d.offered_bps).map_err(|e| schema(lineno, e))?;
    }
    if !seen_header {
        return Err(Error::Schema("empty demand file".into()));
    }
    Ok(demands)
}
