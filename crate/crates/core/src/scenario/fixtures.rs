//! Built-in scenarios used by tests, the acceptance suite and `aeronet scenario-gen`.
//!
//! Each builder is deterministic; the committed copies under `fixtures/` must stay
//! byte-identical to what these functions write.

use serde_json::Value;

use super::demand::{DemandLayout, DemandSchedule};
use super::file::{ScenarioFile, ScenarioHeader};
use super::rwm::{generate_rwm, RwmConfig};
use crate::channel::LinkBudget;
use crate::error::Result;
use crate::geometry::{Node, NodeId, NodeKind, TimeGrid, Trajectory, Vec3};

/// Seed of the committed random waypoint fixture.
pub const RWM_FIXTURE_SEED: u64 = 2024;

/// Per-FMAP load unit of the two-zone layouts: the top MCS rate shared by ten FMAPs.
pub const ZONE_LOAD_UNIT_BPS: f64 = 78e6;

fn stationary(id: u32, kind: NodeKind, x: f64, y: f64, z: f64) -> Trajectory<f64> {
    Trajectory::stationary(Node::new(id, kind), Vec3::new(x, y, z))
}

fn build(
    generator: &str,
    seed: Option<u64>,
    grid: TimeGrid<f64>,
    trajectories: Vec<Trajectory<f64>>,
    demands: DemandSchedule<f64>,
    meta: &[(&str, Value)],
) -> Result<ScenarioFile<f64>> {
    let nodes = trajectories.iter().map(|t| t.node()).collect();
    let mut header = ScenarioHeader::new(generator, seed, grid, LinkBudget::default(), nodes);
    header.meta.extend(meta.iter().map(|(k, v)| (k.to_string(), v.clone())));
    ScenarioFile::new(header, trajectories, demands)
}

/// Four hovering FMAPs on the corners of a 30 m square at 10 m, two light and two heavy
/// loads, and the gateway at its pre-optimisation spot.
pub fn venue_gwp4() -> Result<ScenarioFile<f64>> {
    let trs = vec![
        stationary(0, NodeKind::Gw, 23.3, 15.4, 3.3),
        stationary(1, NodeKind::Fmap, 0.0, 0.0, 10.0),
        stationary(2, NodeKind::Fmap, 30.0, 0.0, 10.0),
        stationary(3, NodeKind::Fmap, 0.0, 30.0, 10.0),
        stationary(4, NodeKind::Fmap, 30.0, 30.0, 10.0),
    ];
    let loads = [(1, 48.75e6), (2, 146.25e6), (3, 48.75e6), (4, 146.25e6)].map(|(i, b)| (NodeId(i), b));
    build(
        "fixture:venue-gwp4",
        None,
        TimeGrid::new(0.0, 1.0, 1)?,
        trs,
        DemandSchedule::constant(loads, 0.0)?,
        &[("cuboid", serde_json::json!([30.0, 30.0, 20.0]))],
    )
}

/// Two fixed relays and one FMAP crossing in front of them at 0.5 m/s for 130 s. The
/// moving FMAP is the only source and offers more than any link can carry.
pub fn reference_case() -> Result<ScenarioFile<f64>> {
    let trs = vec![
        stationary(0, NodeKind::Gw, 30.0, -20.0, 10.0),
        stationary(1, NodeKind::Fmap, 0.0, 0.0, 10.0),
        stationary(2, NodeKind::Fmap, 40.0, 0.0, 10.0),
        Trajectory::straight(Node::new(3, NodeKind::Fmap), Vec3::new(-25.0, 10.0, 10.0), Vec3::new(40.0, 10.0, 10.0), 0.0, 0.5)?,
    ];
    build("fixture:reference", None, TimeGrid::new(0.0, 1.0, 131)?, trs, DemandSchedule::constant([(NodeId(3), 10e9)], 0.0)?, &[])
}

/// Nine hovering nodes where the shortest routes of two flows share a relay; carrier
/// sense is 0 dB.
pub fn interference() -> Result<ScenarioFile<f64>> {
    let pts =
        [(100.0, 0.0), (25.0, 35.0), (60.0, 35.0), (100.0, 40.0), (0.0, -35.0), (30.0, -35.0), (60.0, -35.0), (130.0, -30.0), (70.0, 0.0)];
    let trs = pts
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| stationary(i as u32, if i == 0 { NodeKind::Gw } else { NodeKind::Fmap }, x, y, 10.0))
        .collect();
    build(
        "fixture:interference",
        None,
        TimeGrid::new(0.0, 1.0, 1)?,
        trs,
        DemandSchedule::constant([(NodeId(1), 50e6), (NodeId(4), 50e6)], 0.0)?,
        &[("cs_threshold_db", Value::from(0.0))],
    )
}

/// Ten hovering FMAPs over an 80 m square, five in a light west zone and five in a heavy
/// east zone, with the gateway in the centre.
pub fn scenario_b() -> Result<ScenarioFile<f64>> {
    let low = [(12.0, 18.0, 12.0), (20.0, 55.0, 14.0), (8.0, 40.0, 10.0), (28.0, 30.0, 16.0), (15.0, 68.0, 11.0)];
    let high = [(58.0, 44.0, 12.0), (66.0, 52.0, 15.0), (60.0, 60.0, 10.0), (70.0, 40.0, 13.0), (64.0, 47.0, 18.0)];
    let mut trs = vec![stationary(0, NodeKind::Gw, 40.0, 40.0, 10.0)];
    trs.extend(low.iter().chain(&high).enumerate().map(|(i, &(x, y, z))| stationary(i as u32 + 1, NodeKind::Fmap, x, y, z)));
    let layout = DemandLayout::two_zone(Vec3::new(80.0, 80.0, 20.0), 40.0, 0.1 * ZONE_LOAD_UNIT_BPS, 0.9 * ZONE_LOAD_UNIT_BPS)?;
    let demands = layout.assign(&trs, 0.0)?;
    build("fixture:scenario-b", None, TimeGrid::new(0.0, 1.0, 1)?, trs, demands, &[("cuboid", serde_json::json!([80.0, 80.0, 20.0]))])
}

pub fn rwm_config(seed: u64) -> RwmConfig<f64> {
    RwmConfig { bounds: Vec3::new(80.0, 80.0, 25.0), n_nodes: 21, v_min: 0.5, v_max: 3.0, pause: 0.0, duration: 160.0, seed, pin_gw: false }
}

/// A gateway and twenty FMAPs under random waypoint mobility for 160 s, loaded by the
/// two-zone layout from their starting points.
pub fn rwm_redefine(seed: u64) -> Result<ScenarioFile<f64>> {
    let cfg = rwm_config(seed);
    let trs = generate_rwm(&cfg)?;
    let layout = DemandLayout::two_zone(cfg.bounds, 40.0, 0.1 * ZONE_LOAD_UNIT_BPS, 0.9 * ZONE_LOAD_UNIT_BPS)?;
    let demands = layout.assign(&trs, 0.0)?;
    build("rwm", Some(seed), TimeGrid::new(0.0, 1.0, 161)?, trs, demands, &[("rwm", serde_json::to_value(cfg)?)])
}

/// Every built-in fixture with the file name it is committed under.
pub fn all() -> Result<Vec<(&'static str, ScenarioFile<f64>)>> {
    Ok(vec![
        ("venue_gwp4.ndjson", venue_gwp4()?),
        ("reference.ndjson", reference_case()?),
        ("interference.ndjson", interference()?),
        ("scenario_b.ndjson", scenario_b()?),
        ("rwm_redefine.ndjson", rwm_redefine(RWM_FIXTURE_SEED)?),
    ])
}

pub fn by_name(name: &str) -> Result<ScenarioFile<f64>> {
    match name {
        "venue-gwp4" => venue_gwp4(),
        "reference" => reference_case(),
        "interference" => interference(),
        "scenario-b" => scenario_b(),
        "rwm-redefine" => rwm_redefine(RWM_FIXTURE_SEED),
        other => Err(crate::Error::InvalidInput(format!("unknown fixture {other}"))),
    }
}

pub const FIXTURE_NAMES: [&str; 5] = ["venue-gwp4", "reference", "interference", "scenario-b", "rwm-redefine"];
