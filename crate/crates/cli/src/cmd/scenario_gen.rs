use std::path::PathBuf;

use aeronet::channel::LinkBudget;
use aeronet::scenario::fixtures::{self, ZONE_LOAD_UNIT_BPS};
use aeronet::scenario::{generate_rwm, write_demands, DemandLayout, DemandSchedule, RwmConfig, ScenarioFile, ScenarioHeader};
use aeronet::{NodeKind, TimeGrid, Vec3};

use crate::args::ScenarioGenArgs;
use crate::error::{CliError, CliResult, Context};
use crate::hash::InputHasher;
use crate::io::{open, write_file};

fn rwm_scenario(a: &ScenarioGenArgs) -> CliResult<ScenarioFile<f64>> {
    let (x, y, z) = a.bounds;
    let cfg = RwmConfig {
        bounds: Vec3::new(x, y, z),
        n_nodes: a.nodes,
        v_min: a.v_min,
        v_max: a.v_max,
        pause: a.pause,
        duration: a.duration,
        seed: a.seed,
        pin_gw: a.pin_gw,
    };
    let trs = generate_rwm(&cfg).context(|| "mobility".into())?;
    let steps = (a.duration / a.dt).floor() as usize + 1;
    let grid = TimeGrid::new(0.0, a.dt, steps).context(|| "--dt".into())?;
    let demands = match a.load {
        Some(l) => DemandSchedule::constant(trs.iter().filter(|t| t.node().kind == NodeKind::Fmap).map(|t| (t.id(), l)), 0.0),
        None => DemandLayout::two_zone(cfg.bounds, x / 2.0, 0.1 * ZONE_LOAD_UNIT_BPS, 0.9 * ZONE_LOAD_UNIT_BPS)
            .and_then(|l| l.assign(&trs, 0.0)),
    }
    .context(|| "demands".into())?;
    let nodes = trs.iter().map(|t| t.node()).collect();
    let mut header = ScenarioHeader::new("rwm", Some(a.seed), grid, LinkBudget::default(), nodes);
    header.meta.insert("rwm".into(), serde_json::to_value(cfg).context(|| "mobility settings".into())?);
    ScenarioFile::new(header, trs, demands).context(|| "scenario".into())
}

pub fn run(a: &ScenarioGenArgs) -> CliResult<Vec<PathBuf>> {
    let mut sc = match &a.fixture {
        Some(name) => fixtures::by_name(name)
            .map_err(|_| CliError::usage(format!("unknown fixture {name:?}; available: {}", fixtures::FIXTURE_NAMES.join(", "))))?,
        None => rwm_scenario(a)?,
    };
    // output paths are not inputs: identical settings give identical bytes
    let settings = ScenarioGenArgs { out: PathBuf::new(), demands_out: None, ..a.clone() };
    let hash = InputHasher::new().bytes("scenario-gen", format!("{settings:?}").as_bytes()).finish();
    sc.header.meta.insert("input_hash".into(), hash.into());
    let out = write_file(&a.out, |w| sc.write(w).context(|| format!("writing {}", a.out.display())))?;
    let back = ScenarioFile::<f64>::read(open(&out)?).context(|| format!("validating {}", out.display()))?;
    if back != sc {
        let source = aeronet::Error::Schema("written scenario does not read back identically".into());
        return Err(CliError::Core { context: format!("validating {}", out.display()), source });
    }
    let mut written = vec![out];
    if let Some(p) = &a.demands_out {
        written.push(write_file(p, |w| write_demands(w, &sc.demands, sc.header.seed).context(|| format!("writing {}", p.display())))?);
    }
    Ok(written)
}
