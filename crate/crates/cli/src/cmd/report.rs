use clap::ValueEnum;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use aeronet::report::{compute_distribution, DistributionReport};
use aeronet::sim::Gain;
use serde::Deserialize;

use crate::args::{Metric, ReportArgs};
use crate::error::{CliError, CliResult, Context};
use crate::hash::InputHasher;
use crate::io::{open, write_file};

#[derive(Debug, Clone, Deserialize)]
pub(crate) struct SimRow {
    pub t: f64,
    pub src: u32,
    #[allow(dead_code)]
    pub path_len: usize,
    pub bottleneck_bps: f64,
    pub achieved_bps: f64,
    pub occupancy: f64,
}

pub(crate) fn read_sim_csv(path: &Path) -> CliResult<Vec<SimRow>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(open(path)?);
    rdr.deserialize().collect::<Result<_, _>>().context(|| format!("reading {}", path.display()))
}

/// One sample per step for step metrics, one per row for flow metrics.
fn samples(rows: &[SimRow], metric: Metric) -> Vec<f64> {
    let per_step = |f: &dyn Fn(&SimRow) -> f64, sum: bool| -> Vec<f64> {
        let mut m: BTreeMap<u64, f64> = BTreeMap::new();
        for r in rows {
            let e = m.entry(r.t.to_bits()).or_insert(0.0);
            *e = if sum { *e + f(r) } else { f(r) };
        }
        let mut v: Vec<(f64, f64)> = m.into_iter().map(|(t, x)| (f64::from_bits(t), x)).collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v.into_iter().map(|p| p.1).collect()
    };
    match metric {
        Metric::Throughput => per_step(&|r| r.achieved_bps, true),
        Metric::Occupancy => per_step(&|r| r.occupancy, false),
        Metric::FlowThroughput => rows.iter().map(|r| r.achieved_bps).collect(),
        Metric::Bottleneck => rows.iter().map(|r| r.bottleneck_bps).collect(),
    }
}

/// Bits delivered per flow: the step is the smallest spacing between distinct instants,
/// or 1 s for a single instant.
pub(crate) fn bits_per_flow(rows: &[SimRow]) -> BTreeMap<u32, f64> {
    let mut ts: Vec<f64> = rows.iter().map(|r| r.t).collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let dt = ts.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let dt = if dt.is_finite() { dt } else { 1.0 };
    let mut out = BTreeMap::new();
    for r in rows {
        *out.entry(r.src).or_insert(0.0) += r.achieved_bps * dt;
    }
    out
}

fn write_table<W: Write>(w: &mut W, d: &DistributionReport<f64>, metric: Metric, hash: &str) -> CliResult<()> {
    let io = |e| CliError::file(Path::new("<report>"), e);
    writeln!(w, "# input_hash={hash}").map_err(io)?;
    let name = metric.to_possible_value().map_or_else(String::new, |v| v.get_name().to_owned());
    writeln!(w, "# metric={name} samples={} mean={}", d.len(), d.mean()).map_err(io)?;
    writeln!(w, "percentile,value").map_err(io)?;
    for (q, v) in &d.percentiles {
        writeln!(w, "{q},{v}").map_err(io)?;
    }
    Ok(())
}

fn write_gains<W: Write>(w: &mut W, run: &[SimRow], base: &[SimRow], hash: &str) -> CliResult<()> {
    let io = |e| CliError::file(Path::new("<report>"), e);
    let (a, b) = (bits_per_flow(run), bits_per_flow(base));
    let fmt = |g: Gain<f64>| g.value().map_or("undefined".to_string(), |v| v.to_string());
    writeln!(w, "# input_hash={hash}").map_err(io)?;
    writeln!(w, "flow,bits,baseline_bits,gain").map_err(io)?;
    let (ta, tb) = (a.values().sum::<f64>(), b.values().sum::<f64>());
    writeln!(w, "aggregate,{ta},{tb},{}", fmt(Gain::of(ta, tb))).map_err(io)?;
    let mut flows: Vec<u32> = a.keys().chain(b.keys()).copied().collect();
    flows.sort();
    flows.dedup();
    for f in flows {
        let (x, y) = (a.get(&f).copied().unwrap_or(0.0), b.get(&f).copied().unwrap_or(0.0));
        writeln!(w, "{f},{x},{y},{}", fmt(Gain::of(x, y))).map_err(io)?;
    }
    Ok(())
}

pub fn run(a: &ReportArgs) -> CliResult<Vec<PathBuf>> {
    let mut hasher = InputHasher::new();
    hasher.file("sim", &a.input)?;
    let rows = read_sim_csv(&a.input)?;
    let base = match &a.baseline {
        Some(p) => {
            hasher.file("baseline", p)?;
            Some(read_sim_csv(p)?)
        }
        None => None,
    };
    hasher.json("metric", &format!("{:?}", a.metric));
    let hash = hasher.finish();
    let d = compute_distribution(&samples(&rows, a.metric)).context(|| format!("{} has no samples", a.input.display()))?;
    let mut written = Vec::new();
    match &a.out {
        Some(p) => written.push(write_file(p, |w| write_table(w, &d, a.metric, &hash))?),
        None => write_table(&mut std::io::stdout().lock(), &d, a.metric, &hash)?,
    }
    if let Some(p) = &a.cdf {
        written.push(write_file(p, |w| {
            writeln!(w, "# input_hash={hash}\nx,cdf,ccdf").map_err(|e| CliError::file(p, e))?;
            for (x, f, c) in d.curve() {
                writeln!(w, "{x},{f},{c}").map_err(|e| CliError::file(p, e))?;
            }
            Ok(())
        })?);
    }
    if let Some(base) = &base {
        match &a.gains {
            Some(p) => written.push(write_file(p, |w| write_gains(w, &rows, base, &hash))?),
            None => write_gains(&mut std::io::stdout().lock(), &rows, base, &hash)?,
        }
    }
    Ok(written)
}
