use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use crate::io::{parse_dims2, parse_dims3};

#[derive(Debug, Parser)]
#[command(
    name = "aeronet",
    about = "Aerial mesh planning: FMAP placement, routing, gateway placement, evaluation",
    disable_version_flag = true
)]
pub struct Cli {
    /// Print errors as one JSON object on stderr.
    #[arg(long, global = true)]
    pub json_errors: bool,

    /// Print the version and the hashes of the built-in algorithm profiles.
    #[arg(long)]
    pub version: bool,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Potential-field FMAP placement over a zone demand map.
    Netplan(NetplanArgs),
    /// Forwarding schedule of every demand source over the scenario grid.
    Route(RouteArgs),
    /// Gateway position and transmit power per time step.
    Gwp(GwpArgs),
    /// Flow-level throughput of a forwarding schedule.
    Simulate(SimulateArgs),
    /// Write a scenario file from a mobility model or a built-in fixture.
    ScenarioGen(ScenarioGenArgs),
    /// Percentiles, CDF and gains from simulation CSVs.
    Report(ReportArgs),
    /// Placement, trajectories, gateway placement, routing and simulation in one run.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct NetplanArgs {
    /// Zone demand CSV `zone_x_index,zone_y_index,offered_bps`.
    #[arg(long)]
    pub demand: PathBuf,
    /// Map size in meters, `XxY`.
    #[arg(long, default_value = "100x100", value_parser = parse_dims2)]
    pub map: (f64, f64),
    #[arg(long, default_value_t = 10.0)]
    pub zone_len: f64,
    /// Initial FMAPs, CSV `id,x,y,cell_range`.
    #[arg(long)]
    pub fmaps: PathBuf,
    /// Placement cycles to run.
    #[arg(long, default_value_t = 1)]
    pub steps: usize,
    /// Built-in calibration profile.
    #[arg(long, default_value = "desk-100m", conflicts_with = "config")]
    pub profile: String,
    /// Calibration constants as JSON, instead of a built-in profile.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output CSV `step,t,id,x,y,z,cell_range`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Selection {
    /// Least summed link length.
    Euclidean,
    /// Least interference-aware cost, see `--alpha`.
    I2r,
    /// Largest bottleneck capacity.
    Widest,
}

#[derive(Debug, Args)]
pub struct ScenarioInput {
    /// Scenario NDJSON.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Demand NDJSON replacing the scenario's own demand records.
    #[arg(long)]
    pub demands: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RouteArgs {
    #[command(flatten)]
    pub input: ScenarioInput,
    #[arg(long, value_enum, default_value_t = Selection::Euclidean)]
    pub metric: Selection,
    /// Interference weight of the i2r metric, in [0, 1].
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Carrier-sense threshold in dB; defaults to the scenario's `cs_threshold_db`, then
    /// to the link threshold.
    #[arg(long)]
    pub cs_threshold_db: Option<f64>,
    /// Output schedule NDJSON.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GwpArgs {
    #[command(flatten)]
    pub input: ScenarioInput,
    /// MCS table CSV `min_snr_db,phy_rate_bps`; the 802.11ac 160 MHz table by default.
    #[arg(long)]
    pub mcs: Option<PathBuf>,
    /// Search cuboid `XxYxZ`; defaults to the scenario's `cuboid`.
    #[arg(long, value_parser = parse_dims3)]
    pub cuboid: Option<(f64, f64, f64)>,
    #[arg(long, default_value_t = 0.0)]
    pub power_start: f64,
    #[arg(long, default_value_t = 1.0)]
    pub power_step: f64,
    #[arg(long, default_value_t = 40.0)]
    pub power_max: f64,
    /// Coarse scan spacing in meters.
    #[arg(long, default_value_t = 1.0)]
    pub resolution: f64,
    #[arg(long, default_value_t = 3)]
    pub refine_passes: usize,
    /// Output solution JSON.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Medium {
    BottleneckOnly,
    AirtimeShare,
    MaxMinFair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rate {
    Shannon,
    Mcs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Routing {
    Predictive,
    Static,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub input: ScenarioInput,
    /// Schedule NDJSON from `route`.
    #[arg(long)]
    pub schedule: PathBuf,
    #[arg(long, value_enum, default_value_t = Medium::AirtimeShare)]
    pub medium: Medium,
    #[arg(long, value_enum, default_value_t = Rate::Shannon)]
    pub rate: Rate,
    /// MCS table CSV for `--rate mcs`.
    #[arg(long)]
    pub mcs: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Routing::Predictive)]
    pub routing: Routing,
    /// Also run with routes frozen at the first step and report gains against it.
    #[arg(long)]
    pub compare_static: bool,
    /// Enable the per-node FIFO ledger with this buffer size in bits.
    #[arg(long)]
    pub queue_bits: Option<f64>,
    /// Output CSV `t,src,path_len,bottleneck_bps,achieved_bps,occupancy`.
    #[arg(long)]
    pub out: PathBuf,
    /// Output summary JSON.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["rwm", "fixture"])))]
pub struct ScenarioGenArgs {
    /// Random waypoint mobility.
    #[arg(long)]
    pub rwm: bool,
    /// Built-in fixture: venue-gwp4, reference, interference, scenario-b, rwm-redefine.
    #[arg(long)]
    pub fixture: Option<String>,
    /// Node count including the gateway (node 0).
    #[arg(long, default_value_t = 21)]
    pub nodes: u32,
    /// Mobility box `XxYxZ` in meters.
    #[arg(long = "box", default_value = "80x80x25", value_parser = parse_dims3)]
    pub bounds: (f64, f64, f64),
    #[arg(long, default_value_t = 160.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.5)]
    pub v_min: f64,
    #[arg(long, default_value_t = 3.0)]
    pub v_max: f64,
    #[arg(long, default_value_t = 0.0)]
    pub pause: f64,
    /// Keep the gateway at its starting point.
    #[arg(long)]
    pub pin_gw: bool,
    /// Time step of the scenario grid, seconds.
    #[arg(long, default_value_t = 1.0)]
    pub dt: f64,
    /// Same offered load for every FMAP; otherwise the two-zone layout (west 0.1, east
    /// 0.9 of 78 Mbit/s, split at the middle of the box).
    #[arg(long)]
    pub load: Option<f64>,
    /// Output scenario NDJSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the demands as a standalone demand NDJSON.
    #[arg(long)]
    pub demands_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    /// Aggregate delivered throughput per time step.
    Throughput,
    /// Delivered throughput of each flow at each step.
    FlowThroughput,
    /// Bottleneck capacity of each flow's path at each step.
    Bottleneck,
    /// Airtime occupancy per time step.
    Occupancy,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Simulation CSV from `simulate`.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Metric::Throughput)]
    pub metric: Metric,
    /// Percentile table CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Plot-ready CSV `x,cdf,ccdf`.
    #[arg(long)]
    pub cdf: Option<PathBuf>,
    /// Baseline simulation CSV for the gain table.
    #[arg(long)]
    pub baseline: Option<PathBuf>,
    /// Gain table CSV; stdout when absent.
    #[arg(long, requires = "baseline")]
    pub gains: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["config", "fixture"])))]
pub struct PipelineArgs {
    /// Pipeline configuration JSON.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in configuration: concentrated or homogeneous.
    #[arg(long)]
    pub fixture: Option<String>,
    /// Output directory; overrides the configuration.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}
