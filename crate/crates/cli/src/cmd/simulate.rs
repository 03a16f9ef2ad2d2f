use std::path::PathBuf;

use aeronet::routing::ForwardingSchedule;
use aeronet::sim::{run_simulation, MediumMode, QueueConfig, RateModel, RoutingMode, SimConfig};

use crate::args::{Medium, Rate, Routing, SimulateArgs};
use crate::error::{CliError, CliResult, Context};
use crate::hash::InputHasher;
use crate::io::{load_mcs, load_scenario, open, write_file};

pub(crate) fn medium(m: Medium) -> MediumMode {
    match m {
        Medium::BottleneckOnly => MediumMode::BottleneckOnly,
        Medium::AirtimeShare => MediumMode::AirtimeShare,
        Medium::MaxMinFair => MediumMode::MaxMinFair,
    }
}

pub fn run(a: &SimulateArgs) -> CliResult<Vec<PathBuf>> {
    let mut hasher = InputHasher::new();
    let sc = load_scenario(&a.input.scenario, a.input.demands.as_deref(), &mut hasher)?;
    hasher.file("schedule", &a.schedule)?;
    let schedule = ForwardingSchedule::<f64>::read_ndjson(open(&a.schedule)?).context(|| format!("reading {}", a.schedule.display()))?;
    if schedule.grid() != &sc.header.grid {
        return Err(CliError::usage("the schedule was computed on a different time grid than the scenario"));
    }
    let rate = match a.rate {
        Rate::Shannon if a.mcs.is_some() => return Err(CliError::usage("--mcs only applies with --rate mcs")),
        Rate::Shannon => RateModel::Shannon,
        Rate::Mcs => RateModel::Mcs(load_mcs(a.mcs.as_deref(), &mut hasher)?),
    };
    let cfg = SimConfig { medium: medium(a.medium), rate, queue: a.queue_bits.map(|b| QueueConfig { buffer_bits: b }) };
    hasher.json("sim", &(format!("{:?}", a.medium), format!("{:?}", a.rate), format!("{:?}", a.routing), a.queue_bits, a.compare_static));
    let mode = match a.routing {
        Routing::Predictive => RoutingMode::Predictive,
        Routing::Static => RoutingMode::Static,
    };
    let demands = sc.demand_set().context(|| "sampling demands".into())?;
    let simulate =
        |mode| run_simulation(sc.trajectories(), &sc.header.budget, &schedule, &demands, &cfg, mode).context(|| "simulation".into());
    let report = simulate(mode)?;
    let baseline = if a.compare_static { Some(simulate(RoutingMode::Static)?) } else { None };
    let hash = hasher.finish();
    let mut written = vec![write_file(&a.out, |w| report.write_csv(w, &hash).context(|| format!("writing {}", a.out.display())))?];
    if let Some(p) = &a.summary {
        written.push(write_file(p, |w| {
            report.write_summary_json(w, baseline.as_ref(), &hash).context(|| format!("writing {}", p.display()))
        })?);
    }
    Ok(written)
}
