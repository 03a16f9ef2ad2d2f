use std::io::Write;
use std::path::{Path, PathBuf};

use aeronet::netplan::{run_netplan, FmapState, NetPlanConfig, ZoneGrid, DESK_PROFILE};
use serde::Deserialize;

use crate::args::NetplanArgs;
use crate::error::{CliError, CliResult, Context};
use crate::hash::InputHasher;
use crate::io::{open, write_file};

#[derive(Debug, Deserialize)]
struct FmapRow {
    id: u32,
    x: f64,
    y: f64,
    cell_range: f64,
}

pub(crate) fn profile(name: &str) -> CliResult<NetPlanConfig<f64>> {
    match name {
        DESK_PROFILE => Ok(NetPlanConfig::desk_profile()),
        other => Err(CliError::usage(format!("unknown NetPlan profile {other:?}; available: {DESK_PROFILE}"))),
    }
}

pub(crate) fn read_fmaps(path: &Path, altitude: f64) -> CliResult<Vec<FmapState<f64>>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(open(path)?);
    rdr.deserialize::<FmapRow>()
        .map(|r| r.map(|r| FmapState::new(r.id, r.x, r.y, altitude, r.cell_range)))
        .collect::<Result<_, _>>()
        .context(|| format!("reading {}", path.display()))
}

/// CSV `step,t,id,x,y,z,cell_range` of every placement cycle, step 0 being the input.
pub(crate) fn write_history<W: Write>(w: &mut W, history: &[Vec<FmapState<f64>>], period: f64, input_hash: &str) -> CliResult<()> {
    writeln!(w, "# input_hash={input_hash}").map_err(|e| CliError::file(Path::new("<netplan output>"), e))?;
    let mut csv = csv::Writer::from_writer(w);
    let ctx = || "writing placement history".to_string();
    csv.write_record(["step", "t", "id", "x", "y", "z", "cell_range"]).context(ctx)?;
    for (k, states) in history.iter().enumerate() {
        let t = k as f64 * period;
        for f in states {
            let rec = [
                k.to_string(),
                t.to_string(),
                f.id.to_string(),
                f.pos.x.to_string(),
                f.pos.y.to_string(),
                f.pos.z.to_string(),
                f.cell_range.to_string(),
            ];
            csv.write_record(rec).context(ctx)?;
        }
    }
    csv.flush().map_err(|e| CliError::file(Path::new("<netplan output>"), e))
}

pub fn run(a: &NetplanArgs) -> CliResult<Vec<PathBuf>> {
    let mut hasher = InputHasher::new();
    let cfg = match &a.config {
        Some(p) => {
            hasher.file("netplan-config", p)?;
            serde_json::from_reader(open(p)?).context(|| format!("reading {}", p.display()))?
        }
        None => profile(&a.profile)?,
    };
    cfg.validate().context(|| "NetPlan configuration".into())?;
    hasher.file("zone-demand", &a.demand)?.file("fmaps", &a.fmaps)?;
    hasher.json("args", &(a.map, a.zone_len, a.steps, &cfg));
    let grid =
        ZoneGrid::read_demand_csv(a.map.0, a.map.1, a.zone_len, open(&a.demand)?).context(|| format!("reading {}", a.demand.display()))?;
    let fmaps = read_fmaps(&a.fmaps, cfg.altitude)?;
    let history = run_netplan(&cfg, &grid, &fmaps, a.steps).context(|| "placement".into())?;
    let hash = hasher.finish();
    Ok(vec![write_file(&a.out, |w| write_history(w, &history, cfg.t_netplan, &hash))?])
}
