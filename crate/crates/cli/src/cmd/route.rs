use std::path::PathBuf;

use aeronet::routing::{compute_schedule, ForwardingSchedule, PathSelection, RoutingConfig};
use aeronet::NodeKind;

use crate::args::{RouteArgs, Selection};
use crate::error::{CliError, CliResult, Context};
use crate::hash::InputHasher;
use crate::io::{load_scenario, open, write_file};

pub(crate) fn selection(metric: Selection, alpha: f64) -> CliResult<PathSelection<f64>> {
    match metric {
        Selection::Euclidean => Ok(PathSelection::euclidean()),
        Selection::Widest => Ok(PathSelection::MaxBottleneck),
        Selection::I2r => PathSelection::i2r(alpha).context(|| "--alpha".into()),
    }
}

pub fn run(a: &RouteArgs) -> CliResult<Vec<PathBuf>> {
    let mut hasher = InputHasher::new();
    let sc = load_scenario(&a.input.scenario, a.input.demands.as_deref(), &mut hasher)?;
    let cs = a.cs_threshold_db.or_else(|| sc.header.meta.get("cs_threshold_db").and_then(|v| v.as_f64()));
    let cfg = RoutingConfig { selection: selection(a.metric, a.alpha)?, cs_threshold_db: cs };
    hasher.json("routing", &cfg);
    let gw = sc.gw().ok_or_else(|| CliError::usage(format!("{} declares no {:?} node", a.input.scenario.display(), NodeKind::Gw)))?;
    let demands = sc.demand_set().context(|| "sampling demands".into())?;
    let schedule =
        compute_schedule(sc.trajectories(), &sc.header.grid, &sc.header.budget, &cfg, &demands, gw).context(|| "routing".into())?;
    let hash = hasher.finish();
    let out = write_file(&a.out, |w| schedule.write_ndjson(w, &hash).context(|| format!("writing {}", a.out.display())))?;
    ForwardingSchedule::<f64>::read_ndjson(open(&out)?).context(|| format!("validating {}", out.display()))?;
    Ok(vec![out])
}
