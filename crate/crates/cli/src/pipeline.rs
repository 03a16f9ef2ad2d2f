//! End-to-end run: FMAP placement, straight-line trajectories between placements,
//! gateway placement per step, routing over the resulting topology, and simulation.
//!
//! The gateway is placed before routing because routes end at the gateway and need its
//! trajectory.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use aeronet::channel::{LinkBudget, McsTable};
use aeronet::geometry::{Node, NodeId, NodeKind, TimeGrid, Trajectory, Vec3, Waypoint};
use aeronet::gwp::{gwp_over_time, write_solutions_json, GwpConfig};
use aeronet::netplan::{run_netplan, FmapState, ZoneGrid, DESK_PROFILE};
use aeronet::routing::{compute_schedule, RoutingConfig};
use aeronet::scenario::{DemandSchedule, ScenarioFile, ScenarioHeader};
use aeronet::sim::{run_simulation, MediumMode, RateModel, RoutingMode, SimConfig};
use serde::{Deserialize, Serialize};

use crate::args::PipelineArgs;
use crate::cmd::netplan::{profile, write_history};
use crate::error::{CliError, CliResult, Context};
use crate::hash::{sha256_hex, InputHasher};
use crate::io::{load_mcs, open, write_file};

pub const MANIFEST_FORMAT: &str = "aeronet-manifest";
pub const PARTIAL_SUFFIX: &str = ".partial";
pub const GW_ID: NodeId = NodeId(0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FmapSpec {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub cell_range: f64,
}

/// Gateway placement settings; unset fields take the solver defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GwpSettings {
    /// Search cuboid; the map area up to twice the FMAP altitude when unset.
    pub cuboid: Option<(f64, f64, f64)>,
    pub power_start_dbm: Option<f64>,
    pub power_step_dbm: Option<f64>,
    pub power_max_dbm: Option<f64>,
    pub grid_resolution: Option<f64>,
    pub refine_passes: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateChoice {
    #[default]
    Shannon,
    Mcs,
}

fn default_profile() -> String {
    DESK_PROFILE.into()
}

fn default_map() -> (f64, f64) {
    (100.0, 100.0)
}

fn default_zone_len() -> f64 {
    10.0
}

fn default_speed() -> f64 {
    3.0
}

fn default_dt() -> f64 {
    1.0
}

fn default_medium() -> MediumMode {
    MediumMode::AirtimeShare
}

/// Everything a pipeline run depends on. Relative paths resolve against the directory
/// of the configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Zone demand CSV `zone_x_index,zone_y_index,offered_bps`.
    #[serde(default)]
    pub zone_demand_csv: Option<PathBuf>,
    /// Inline zone demand `[ix, iy, offered_bps]`, added to the CSV entries.
    #[serde(default)]
    pub zone_demand: Vec<(usize, usize, f64)>,
    #[serde(default = "default_map")]
    pub map: (f64, f64),
    #[serde(default = "default_zone_len")]
    pub zone_len: f64,
    pub fmaps: Vec<FmapSpec>,
    #[serde(default = "default_profile")]
    pub netplan_profile: String,
    /// Placement cycles; the run lasts `netplan_steps` update periods.
    pub netplan_steps: usize,
    /// FMAP cruise speed between placements, m/s.
    #[serde(default = "default_speed")]
    pub speed: f64,
    /// Grid step for placement, routing and simulation, seconds.
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// MCS table CSV; the 802.11ac 160 MHz table when unset.
    #[serde(default)]
    pub mcs: Option<PathBuf>,
    #[serde(default)]
    pub gwp: GwpSettings,
    #[serde(default)]
    pub routing: RoutingConfig<f64>,
    #[serde(default = "default_medium")]
    pub medium: MediumMode,
    #[serde(default)]
    pub rate: RateChoice,
    /// Recorded in the outputs; the run itself is deterministic.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl PipelineConfig {
    /// Three FMAPs and a single 100 Mbit/s hotspot zone on a 100 m map.
    pub fn concentrated() -> Self {
        Self {
            zone_demand_csv: None,
            zone_demand: vec![(7, 7, 100e6)],
            map: (100.0, 100.0),
            zone_len: 10.0,
            fmaps: vec![
                FmapSpec { id: 1, x: 20.0, y: 20.0, cell_range: 25.0 },
                FmapSpec { id: 2, x: 50.0, y: 50.0, cell_range: 25.0 },
                FmapSpec { id: 3, x: 80.0, y: 30.0, cell_range: 25.0 },
            ],
            netplan_profile: DESK_PROFILE.into(),
            netplan_steps: 50,
            speed: default_speed(),
            dt: 5.0,
            mcs: None,
            gwp: GwpSettings { grid_resolution: Some(2.0), ..GwpSettings::default() },
            routing: RoutingConfig::default(),
            medium: default_medium(),
            rate: RateChoice::Shannon,
            seed: 0,
            out_dir: None,
        }
    }

    /// Same FMAPs with 10 Mbit/s in every zone.
    pub fn homogeneous() -> Self {
        let zone_demand = (0..10).flat_map(|iy| (0..10).map(move |ix| (ix, iy, 10e6))).collect();
        Self { zone_demand, ..Self::concentrated() }
    }

    pub fn fixture(name: &str) -> CliResult<Self> {
        match name {
            "concentrated" => Ok(Self::concentrated()),
            "homogeneous" => Ok(Self::homogeneous()),
            other => Err(CliError::usage(format!("unknown pipeline fixture {other:?}; available: concentrated, homogeneous"))),
        }
    }

    fn validate(&self) -> CliResult<()> {
        if self.fmaps.is_empty() {
            return Err(CliError::usage("the pipeline needs at least one FMAP"));
        }
        if let Some(f) = self.fmaps.iter().find(|f| NodeId(f.id) == GW_ID) {
            return Err(CliError::usage(format!("FMAP id {} is reserved for the gateway", f.id)));
        }
        if !(self.speed > 0.0 && self.dt > 0.0) {
            return Err(CliError::usage("speed and dt must be positive"));
        }
        if self.netplan_steps == 0 {
            return Err(CliError::usage("netplan_steps must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    /// File name inside the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageEntry {
    pub stage: String,
    pub outputs: Vec<OutputEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    pub input_hash: String,
    pub seed: u64,
    pub stages: Vec<StageEntry>,
    /// Trajectory segments that had to exceed the cruise speed to finish within one
    /// placement period.
    pub segments_over_speed: usize,
}

pub const STAGES: [&str; 5] = ["netplan", "trajectories", "gwp", "routing", "simulate"];

struct Run<'a> {
    out_dir: &'a Path,
    stages: Vec<StageEntry>,
}

impl Run<'_> {
    /// Adds a written output to the manifest; a write failure is tagged with `stage`.
    fn record(&mut self, name: &'static str, written: CliResult<PathBuf>) -> CliResult<()> {
        let path = stage(name, written)?;
        let data = std::fs::read(&path).map_err(|e| CliError::file(&path, e))?;
        let entry = OutputEntry {
            path: path.file_name().unwrap().to_string_lossy().into_owned(),
            sha256: sha256_hex(&data),
            bytes: data.len() as u64,
        };
        match self.stages.last_mut() {
            Some(s) if s.stage == name => s.outputs.push(entry),
            _ => self.stages.push(StageEntry { stage: name.into(), outputs: vec![entry] }),
        }
        Ok(())
    }

    fn written(&self) -> impl Iterator<Item = PathBuf> + '_ {
        self.stages.iter().flat_map(|s| s.outputs.iter().map(|o| self.out_dir.join(&o.path)))
    }

    /// Renames every output written so far to `<name>.partial`.
    fn mark_partial(&self) {
        for p in self.written() {
            let mut name = p.clone().into_os_string();
            name.push(PARTIAL_SUFFIX);
            let _ = std::fs::rename(&p, name);
        }
    }
}

fn stage<T>(name: &'static str, r: CliResult<T>) -> CliResult<T> {
    r.map_err(|e| CliError::Stage { stage: name, source: Box::new(e) })
}

fn zone_grid(cfg: &PipelineConfig, base: &Path, hasher: &mut InputHasher) -> CliResult<ZoneGrid<f64>> {
    let mut grid = match &cfg.zone_demand_csv {
        Some(rel) => {
            let p = base.join(rel);
            hasher.file("zone-demand", &p)?;
            ZoneGrid::read_demand_csv(cfg.map.0, cfg.map.1, cfg.zone_len, open(&p)?).context(|| format!("reading {}", p.display()))?
        }
        None => ZoneGrid::new(cfg.map.0, cfg.map.1, cfg.zone_len).context(|| "map".into())?,
    };
    for &(ix, iy, bps) in &cfg.zone_demand {
        let z = grid.index(ix, iy).ok_or_else(|| CliError::usage(format!("zone ({ix}, {iy}) is outside the map")))?;
        let total = grid.demand()[z] + bps;
        grid.set_demand(ix, iy, total).context(|| format!("zone ({ix}, {iy})"))?;
    }
    Ok(grid)
}

/// Straight segments from each placement to the next, flown at `speed` from the start of
/// the period. Returns the trajectories and how many segments needed a higher speed.
fn synthesize(history: &[Vec<FmapState<f64>>], period: f64, speed: f64) -> CliResult<(Vec<Trajectory<f64>>, usize)> {
    let mut over = 0;
    let trs = (0..history[0].len())
        .map(|i| {
            let node = Node { id: history[0][i].id, kind: NodeKind::Fmap };
            let mut wps = vec![Waypoint { t: 0.0, pos: history[0][i].pos }];
            for (k, pair) in history.windows(2).enumerate() {
                let (from, to) = (pair[0][i].pos, pair[1][i].pos);
                let len = from.distance(&to);
                if len == 0.0 {
                    continue;
                }
                let start = k as f64 * period;
                let mut arrive = start + len / speed;
                if arrive > start + period {
                    over += 1;
                    arrive = start + period;
                }
                if wps.last().unwrap().t < start {
                    wps.push(Waypoint { t: start, pos: from });
                }
                wps.push(Waypoint { t: arrive, pos: to });
            }
            Trajectory::new(node, wps).context(|| format!("trajectory of FMAP {}", node.id))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok((trs, over))
}

/// Each zone's demand goes to the horizontally closest FMAP (lowest id on ties).
fn fmap_loads(grid: &ZoneGrid<f64>, fmaps: &[(NodeId, Vec3<f64>)]) -> BTreeMap<NodeId, f64> {
    let mut loads: BTreeMap<NodeId, f64> = fmaps.iter().map(|f| (f.0, 0.0)).collect();
    for (z, &bps) in grid.demand().iter().enumerate() {
        if bps <= 0.0 {
            continue;
        }
        let c = grid.zone_center(z);
        let best = fmaps.iter().min_by(|a, b| a.1.horizontal_distance(&c).total_cmp(&b.1.horizontal_distance(&c)).then(a.0.cmp(&b.0)));
        *loads.get_mut(&best.unwrap().0).unwrap() += bps;
    }
    loads
}

fn demand_schedule(grid: &ZoneGrid<f64>, trs: &[Trajectory<f64>], time: &TimeGrid<f64>) -> CliResult<DemandSchedule<f64>> {
    let mut d = DemandSchedule::new();
    let mut last: BTreeMap<NodeId, f64> = BTreeMap::new();
    for t in time.instants() {
        let pos: Vec<_> = trs.iter().map(|tr| (tr.id(), tr.position_at(t))).collect();
        for (id, bps) in fmap_loads(grid, &pos) {
            if last.get(&id) != Some(&bps) {
                d.push(id, t, bps).context(|| "demand".into())?;
                last.insert(id, bps);
            }
        }
    }
    Ok(d)
}

fn gwp_config(cfg: &PipelineConfig, altitude: f64) -> CliResult<GwpConfig<f64>> {
    let (x, y, z) = cfg.gwp.cuboid.unwrap_or((cfg.map.0, cfg.map.1, 2.0 * altitude));
    let d = GwpConfig::new(Vec3::new(x, y, z));
    let g = GwpConfig {
        power_start_dbm: cfg.gwp.power_start_dbm.unwrap_or(d.power_start_dbm),
        power_step_dbm: cfg.gwp.power_step_dbm.unwrap_or(d.power_step_dbm),
        power_max_dbm: cfg.gwp.power_max_dbm.unwrap_or(d.power_max_dbm),
        grid_resolution: cfg.gwp.grid_resolution.unwrap_or(d.grid_resolution),
        refine_passes: cfg.gwp.refine_passes.unwrap_or(d.refine_passes),
        ..d
    };
    g.validate().context(|| "gateway placement settings".into())?;
    Ok(g)
}

fn header(generator: &str, cfg: &PipelineConfig, grid: TimeGrid<f64>, trs: &[Trajectory<f64>], hash: &str) -> ScenarioHeader<f64> {
    let nodes = trs.iter().map(|t| t.node()).collect();
    let mut h = ScenarioHeader::new(generator, Some(cfg.seed), grid, LinkBudget::default(), nodes);
    h.meta.insert("input_hash".into(), hash.into());
    h
}

/// Runs every stage and writes the outputs plus `manifest.json` into `out_dir`. On
/// failure the outputs written so far get the `.partial` suffix and the error names the
/// stage.
pub fn run_pipeline(cfg: &PipelineConfig, base_dir: &Path, out_dir: &Path) -> CliResult<Manifest> {
    cfg.validate()?;
    let np = profile(&cfg.netplan_profile)?;
    let mut hasher = InputHasher::new();
    hasher.json("config", &PipelineConfig { out_dir: None, ..cfg.clone() });
    let zones = zone_grid(cfg, base_dir, &mut hasher)?;
    let mcs: McsTable<f64> = load_mcs(cfg.mcs.as_ref().map(|p| base_dir.join(p)).as_deref(), &mut hasher)?;
    let gwp_cfg = gwp_config(cfg, np.altitude)?;
    let hash = hasher.finish();
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::file(out_dir, e))?;

    let mut run = Run { out_dir, stages: Vec::new() };
    let mut over_speed = 0;
    let result = (|| -> CliResult<()> {
        let start: Vec<_> = cfg.fmaps.iter().map(|f| FmapState::new(f.id, f.x, f.y, np.altitude, f.cell_range)).collect();
        let history = stage("netplan", run_netplan(&np, &zones, &start, cfg.netplan_steps).context(|| "placement".into()))?;
        run.record("netplan", write_file(&out_dir.join("netplan.csv"), |w| write_history(w, &history, np.t_netplan, &hash)))?;

        let span = np.t_netplan * cfg.netplan_steps as f64;
        let steps = (span / cfg.dt + 1e-9).floor() as usize + 1;
        let grid = stage("trajectories", TimeGrid::new(0.0, cfg.dt, steps).context(|| "time grid".into()))?;
        let (fmap_trs, over) = stage("trajectories", synthesize(&history, np.t_netplan, cfg.speed))?;
        over_speed = over;
        let demands = stage("trajectories", demand_schedule(&zones, &fmap_trs, &grid))?;
        let fmaps_only = stage(
            "trajectories",
            ScenarioFile::new(header("pipeline:fmaps", cfg, grid, &fmap_trs, &hash), fmap_trs.clone(), demands.clone())
                .context(|| "scenario".into()),
        )?;
        run.record(
            "trajectories",
            write_file(&out_dir.join("trajectories.ndjson"), |w| fmaps_only.write(w).context(|| "writing trajectories".into())),
        )?;

        let solutions = stage("gwp", {
            let budget = LinkBudget::default();
            gwp_over_time(
                &grid,
                |k| {
                    let t = grid.instant(k);
                    let active = fmap_trs.iter().filter(|tr| demands.offered_at(tr.id(), t) > 0.0).count().max(1);
                    let cap = mcs.top_rate() / active as f64;
                    fmap_trs.iter().map(|tr| (tr.id(), tr.position_at(t), demands.offered_at(tr.id(), t).min(cap))).collect()
                },
                &mcs,
                &budget,
                &gwp_cfg,
            )
            .context(|| "gateway placement".into())
        })?;
        run.record(
            "gwp",
            write_file(&out_dir.join("gwp.json"), |w| write_solutions_json(w, &solutions, &hash).context(|| "writing gwp.json".into())),
        )?;
        let gw_wps = solutions.iter().map(|(t, s)| Waypoint { t: *t, pos: s.gw_pos }).collect();
        let gw = stage("gwp", Trajectory::new(Node { id: GW_ID, kind: NodeKind::Gw }, gw_wps).context(|| "gateway trajectory".into()))?;
        let mut all = vec![gw];
        all.extend(fmap_trs.iter().cloned());
        let full = stage("gwp", ScenarioFile::new(header("pipeline", cfg, grid, &all, &hash), all, demands).context(|| "scenario".into()))?;
        run.record("gwp", write_file(&out_dir.join("scenario.ndjson"), |w| full.write(w).context(|| "writing scenario".into())))?;

        let demand_set = stage("routing", full.demand_set().context(|| "demands".into()))?;
        let schedule = stage(
            "routing",
            compute_schedule(full.trajectories(), &grid, &full.header.budget, &cfg.routing, &demand_set, GW_ID)
                .context(|| "routing".into()),
        )?;
        run.record(
            "routing",
            write_file(&out_dir.join("schedule.ndjson"), |w| schedule.write_ndjson(w, &hash).context(|| "writing schedule".into())),
        )?;

        let rate = match cfg.rate {
            RateChoice::Shannon => RateModel::Shannon,
            RateChoice::Mcs => RateModel::Mcs(mcs.clone()),
        };
        let sim_cfg = SimConfig { medium: cfg.medium, rate, queue: None };
        let sim = |mode| {
            run_simulation(full.trajectories(), &full.header.budget, &schedule, &demand_set, &sim_cfg, mode).context(|| "simulation".into())
        };
        let predictive = stage("simulate", sim(RoutingMode::Predictive))?;
        let frozen = stage("simulate", sim(RoutingMode::Static))?;
        run.record(
            "simulate",
            write_file(&out_dir.join("sim.csv"), |w| predictive.write_csv(w, &hash).context(|| "writing sim.csv".into())),
        )?;
        run.record(
            "simulate",
            write_file(&out_dir.join("summary.json"), |w| {
                predictive.write_summary_json(w, Some(&frozen), &hash).context(|| "writing summary.json".into())
            }),
        )?;
        Ok(())
    })();
    if let Err(e) = result {
        run.mark_partial();
        return Err(e);
    }
    let manifest = Manifest {
        format: MANIFEST_FORMAT.into(),
        version: 1,
        input_hash: hash,
        seed: cfg.seed,
        stages: run.stages,
        segments_over_speed: over_speed,
    };
    write_file(&out_dir.join("manifest.json"), |w| {
        serde_json::to_writer_pretty(&mut *w, &manifest).context(|| "writing manifest".into())?;
        writeln!(w).map_err(|e| CliError::file(Path::new("manifest.json"), e))
    })?;
    Ok(manifest)
}

pub fn run_cli(a: &PipelineArgs) -> CliResult<Vec<PathBuf>> {
    let (cfg, base) = match (&a.config, &a.fixture) {
        (Some(p), _) => {
            let cfg: PipelineConfig = serde_json::from_reader(open(p)?).context(|| format!("reading {}", p.display()))?;
            (cfg, p.parent().map(Path::to_path_buf).unwrap_or_default())
        }
        (None, Some(name)) => (PipelineConfig::fixture(name)?, PathBuf::new()),
        (None, None) => return Err(CliError::usage("--config or --fixture is required")),
    };
    let out_dir = a
        .out_dir
        .clone()
        .or_else(|| cfg.out_dir.as_ref().map(|d| base.join(d)))
        .ok_or_else(|| CliError::usage("no output directory: pass --out-dir or set out_dir"))?;
    let manifest = run_pipeline(&cfg, &base, &out_dir)?;
    let mut written: Vec<PathBuf> = manifest.stages.iter().flat_map(|s| s.outputs.iter().map(|o| out_dir.join(&o.path))).collect();
    written.push(out_dir.join("manifest.json"));
    Ok(written)
}
