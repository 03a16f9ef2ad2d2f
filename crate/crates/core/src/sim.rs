//! Flow-level throughput evaluation: per-step path rates, sharing of a single collision
//! domain, bits delivered to the gateway, and run-to-run comparison.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{LinkBudget, McsTable};
use crate::error::{Error, Result};
use crate::geometry::{NodeId, TimeGrid, Trajectory};
use crate::num::Real;
use crate::routing::{build_snapshot, path_bottleneck, positions_at, ForwardingSchedule, GraphSnapshot, TrafficDemandSet};

/// How flows share the medium within a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MediumMode {
    /// Each flow gets `min(offered, bottleneck)`; no contention between flows.
    #[default]
    BottleneckOnly,
    /// One collision domain; when the airtime demand exceeds 1 every flow is scaled by
    /// the same factor.
    AirtimeShare,
    /// One collision domain; max-min fair rates by water-filling on airtime.
    MaxMinFair,
}

/// Per-link rate used to carry traffic.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum RateModel<T> {
    #[default]
    Shannon,
    /// Highest table rate whose SNR requirement the link meets; 0 below the table.
    Mcs(McsTable<T>),
}

/// Whether flows follow the time-varying schedule or their first-step routes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoutingMode {
    Predictive,
    Static,
}

/// Fluid per-node FIFO backlog, used to check conservation of bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueueConfig<T> {
    /// Buffer shared by all flows at one node, bits.
    pub buffer_bits: T,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimConfig<T> {
    pub medium: MediumMode,
    pub rate: RateModel<T>,
    pub queue: Option<QueueConfig<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowAssignment<T> {
    pub t: T,
    pub src: NodeId,
    /// Empty when the flow has no route.
    pub path: Vec<NodeId>,
    pub offered_bps: T,
    pub bottleneck_bps: T,
    pub achieved_bps: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport<T> {
    pub t: T,
    pub aggregate_bps: T,
    /// Airtime fraction used. Not capped in [`MediumMode::BottleneckOnly`].
    pub occupancy: T,
    pub flows: Vec<FlowAssignment<T>>,
}

/// Bits that entered, left, stayed in, or were dropped from the per-node queues of a flow.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QueueLedger<T> {
    pub injected: T,
    pub delivered: T,
    pub queued: T,
    pub dropped: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport<T> {
    pub dt: T,
    pub steps: Vec<StepReport<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub queues: Option<BTreeMap<NodeId, QueueLedger<T>>>,
}

impl<T: Real> SimReport<T> {
    /// `sum_k R_i(t_k) dt` for one flow.
    pub fn bits_received(&self, src: NodeId) -> T {
        self.steps.iter().flat_map(|s| s.flows.iter()).filter(|f| f.src == src).map(|f| f.achieved_bps * self.dt).sum()
    }

    pub fn total_bits(&self) -> T {
        self.steps.iter().map(|s| s.aggregate_bps * self.dt).sum()
    }

    pub fn sources(&self) -> Vec<NodeId> {
        let mut v: Vec<NodeId> = self.steps.iter().flat_map(|s| s.flows.iter().map(|f| f.src)).collect();
        v.sort();
        v.dedup();
        v
    }

    /// CSV `t,src,path_len,bottleneck_bps,achieved_bps,occupancy`, preceded by a comment
    /// line with the input hash. `path_len` counts hops.
    pub fn write_csv<W: Write>(&self, mut w: W, input_hash: &str) -> Result<()> {
        writeln!(w, "# input_hash={input_hash}")?;
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["t", "src", "path_len", "bottleneck_bps", "achieved_bps", "occupancy"])?;
        for s in &self.steps {
            for f in &s.flows {
                csv.write_record([
                    f.t.to_string(),
                    f.src.to_string(),
                    f.path.len().saturating_sub(1).to_string(),
                    f.bottleneck_bps.to_string(),
                    f.achieved_bps.to_string(),
                    s.occupancy.to_string(),
                ])?;
            }
        }
        csv.flush()?;
        Ok(())
    }

    /// Totals per flow and aggregate, plus gains against `baseline` when given.
    pub fn write_summary_json<W: Write>(&self, w: W, baseline: Option<&SimReport<T>>, input_hash: &str) -> Result<()> {
        let per_flow: BTreeMap<String, f64> =
            self.sources().into_iter().map(|s| (s.to_string(), self.bits_received(s).to_f64_lossy())).collect();
        let mut doc = serde_json::json!({
            "input_hash": input_hash,
            "steps": self.steps.len(),
            "dt": self.dt.to_f64_lossy(),
            "total_bits": self.total_bits().to_f64_lossy(),
            "bits_per_flow": per_flow,
        });
        if let Some(queues) = &self.queues {
            doc["queues"] = serde_json::to_value(queues)?;
        }
        if let Some(b) = baseline {
            let c = compare_runs(self, b)?;
            doc["baseline_total_bits"] = b.total_bits().to_f64_lossy().into();
            doc["gain"] = serde_json::to_value(&c)?;
        }
        serde_json::to_writer_pretty(w, &doc)?;
        Ok(())
    }
}

/// Relative difference `(a - b) / b`, undefined when the baseline carried nothing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Gain<T> {
    Defined(T),
    Undefined,
}

impl<T: Real> Gain<T> {
    pub fn of(a: T, b: T) -> Self {
        if b > T::zero() {
            Gain::Defined((a - b) / b)
        } else {
            Gain::Undefined
        }
    }

    pub fn value(&self) -> Option<T> {
        match self {
            Gain::Defined(v) => Some(*v),
            Gain::Undefined => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison<T> {
    pub aggregate: Gain<T>,
    pub per_flow: BTreeMap<NodeId, Gain<T>>,
}

/// Gains of run `a` over baseline `b`; both must cover the same grid.
pub fn compare_runs<T: Real>(a: &SimReport<T>, b: &SimReport<T>) -> Result<Comparison<T>> {
    if a.dt != b.dt || a.steps.len() != b.steps.len() || a.steps.iter().zip(&b.steps).any(|(x, y)| x.t != y.t) {
        return Err(Error::invalid("reports cover different time grids"));
    }
    let mut srcs = a.sources();
    srcs.extend(b.sources());
    srcs.sort();
    srcs.dedup();
    Ok(Comparison {
        aggregate: Gain::of(a.total_bits(), b.total_bits()),
        per_flow: srcs.into_iter().map(|s| (s, Gain::of(a.bits_received(s), b.bits_received(s)))).collect(),
    })
}

/// Minimum Shannon capacity over the links of `path`.
pub fn path_capacity<T: Real>(snapshot: &GraphSnapshot<T>, path: &[NodeId]) -> Result<T> {
    if path.len() < 2 {
        return Err(Error::InvalidPath("a path needs at least one link".into()));
    }
    path_bottleneck(snapshot, path)
}

/// Demand and per-hop rates of one flow in a shared collision domain.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowDemand<T> {
    pub offered_bps: T,
    pub link_rates_bps: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Allocation<T> {
    pub achieved_bps: T,
    /// Fraction of time the flow's hops keep the medium busy.
    pub airtime: T,
}

/// Splits the medium among `flows`.
///
/// A flow needs airtime `a_i = sum_l R_i / rate_l` over its hops. Flows with no hops or a
/// zero-rate hop get nothing. Returns the allocations and the total occupancy.
pub fn airtime_allocate<T: Real>(flows: &[FlowDemand<T>], mode: MediumMode) -> (Vec<Allocation<T>>, T) {
    let cost: Vec<Option<T>> = flows
        .iter()
        .map(|f| {
            let ok = !f.link_rates_bps.is_empty() && f.link_rates_bps.iter().all(|r| *r > T::zero());
            ok.then(|| f.link_rates_bps.iter().map(|r| r.recip()).sum())
        })
        .collect();
    let rates: Vec<T> = match mode {
        MediumMode::BottleneckOnly => flows
            .iter()
            .zip(&cost)
            .map(|(f, c)| match c {
                Some(_) => f.offered_bps.min(f.link_rates_bps.iter().copied().fold(T::infinity(), T::min)),
                None => T::zero(),
            })
            .collect(),
        MediumMode::AirtimeShare => {
            let need: T = flows.iter().zip(&cost).filter_map(|(f, c)| c.map(|c| f.offered_bps * c)).sum();
            let scale = if need > T::one() { need.recip() } else { T::one() };
            flows.iter().zip(&cost).map(|(f, c)| if c.is_some() { f.offered_bps * scale } else { T::zero() }).collect()
        }
        MediumMode::MaxMinFair => water_fill(flows, &cost),
    };
    let allocs: Vec<Allocation<T>> =
        rates.iter().zip(&cost).map(|(r, c)| Allocation { achieved_bps: *r, airtime: c.map_or(T::zero(), |c| *r * c) }).collect();
    let occupancy = allocs.iter().map(|a| a.airtime).sum();
    (allocs, occupancy)
}

/// Largest level `L` with `sum_i min(T_i, L) c_i <= 1`; each flow gets `min(T_i, L)`.
fn water_fill<T: Real>(flows: &[FlowDemand<T>], cost: &[Option<T>]) -> Vec<T> {
    let mut order: Vec<usize> = (0..flows.len()).filter(|i| cost[*i].is_some()).collect();
    order.sort_by(|a, b| flows[*a].offered_bps.partial_cmp(&flows[*b].offered_bps).unwrap().then(a.cmp(b)));
    let mut rates = vec![T::zero(); flows.len()];
    let mut budget = T::one();
    let mut rest: T = order.iter().map(|i| cost[*i].unwrap()).sum();
    for (pos, &i) in order.iter().enumerate() {
        let t = flows[i].offered_bps;
        if t * rest <= budget {
            rates[i] = t;
            let c = cost[i].unwrap();
            budget -= t * c;
            rest -= c;
        } else {
            let level = budget / rest;
            for &j in &order[pos..] {
                rates[j] = level;
            }
            break;
        }
    }
    rates
}

fn link_rates<T: Real>(snapshot: &GraphSnapshot<T>, path: &[NodeId], rate: &RateModel<T>) -> Vec<T> {
    path.windows(2)
        .map(|w| match snapshot.link(w[0], w[1]) {
            None => T::zero(),
            Some(l) => match rate {
                RateModel::Shannon => l.capacity_bps,
                RateModel::Mcs(table) => table.rate_for_snr(l.snr_db),
            },
        })
        .collect()
}

/// Evaluates a schedule over its grid.
///
/// In [`RoutingMode::Static`] every flow keeps its first-step route; a step where that
/// route has an unusable link delivers nothing for the flow.
pub fn run_simulation<T: Real>(
    trajectories: &[Trajectory<T>],
    budget: &LinkBudget<T>,
    schedule: &ForwardingSchedule<T>,
    demands: &TrafficDemandSet<T>,
    cfg: &SimConfig<T>,
    mode: RoutingMode,
) -> Result<SimReport<T>> {
    let grid: TimeGrid<T> = *schedule.grid();
    if demands.steps() != grid.steps {
        return Err(Error::invalid(format!("demand has {} steps, schedule has {}", demands.steps(), grid.steps)));
    }
    if let Some(q) = cfg.queue {
        if !(q.buffer_bits >= T::zero()) {
            return Err(Error::invalid("queue buffer must be non-negative"));
        }
    }
    let frozen;
    let schedule = match mode {
        RoutingMode::Predictive => schedule,
        RoutingMode::Static => {
            frozen = schedule.frozen_at_start();
            &frozen
        }
    };
    let sources: Vec<NodeId> = demands.sources().collect();
    let steps = (0..grid.steps)
        .into_par_iter()
        .map(|k| {
            let t = grid.instant(k);
            let snapshot = build_snapshot(&positions_at(trajectories, t), budget, t)?;
            let mut flows = Vec::new();
            let mut demand = Vec::new();
            for &src in &sources {
                let offered = demands.offered(src, k);
                if !(offered > T::zero()) {
                    continue;
                }
                let path = schedule.route_at(src, k).map(|r| r.path.clone()).unwrap_or_default();
                if let Some(n) = path.iter().find(|n| !snapshot.contains(**n)) {
                    return Err(Error::InvalidScenario(format!("route node {n} has no trajectory")));
                }
                let rates = link_rates(&snapshot, &path, &cfg.rate);
                let bottleneck = if rates.is_empty() { T::zero() } else { rates.iter().copied().fold(T::infinity(), T::min) };
                demand.push(FlowDemand { offered_bps: offered, link_rates_bps: rates });
                flows.push(FlowAssignment { t, src, path, offered_bps: offered, bottleneck_bps: bottleneck, achieved_bps: T::zero() });
            }
            let (alloc, occupancy) = airtime_allocate(&demand, cfg.medium);
            for (f, a) in flows.iter_mut().zip(&alloc) {
                f.achieved_bps = a.achieved_bps;
            }
            let aggregate_bps = flows.iter().map(|f| f.achieved_bps).sum();
            Ok(StepReport { t, aggregate_bps, occupancy, flows })
        })
        .collect::<Result<Vec<_>>>()?;
    let queues = cfg.queue.map(|q| run_queues(&steps, grid.dt, q));
    Ok(SimReport { dt: grid.dt, steps, queues })
}

/// Fluid store-and-forward: each step a flow injects `offered * dt` at its source and
/// moves up to `achieved * dt` across each hop of its current path, upstream hops first.
fn run_queues<T: Real>(steps: &[StepReport<T>], dt: T, cfg: QueueConfig<T>) -> BTreeMap<NodeId, QueueLedger<T>> {
    let mut backlog: BTreeMap<(NodeId, NodeId), T> = BTreeMap::new();
    let mut ledger: BTreeMap<NodeId, QueueLedger<T>> = BTreeMap::new();
    let occupied = |backlog: &BTreeMap<(NodeId, NodeId), T>, node: NodeId| -> T {
        backlog.iter().filter(|((n, _), _)| *n == node).map(|(_, b)| *b).sum()
    };
    for s in steps {
        for f in &s.flows {
            let l = ledger.entry(f.src).or_default();
            let inject = f.offered_bps * dt;
            let room = (cfg.buffer_bits - occupied(&backlog, f.src)).max(T::zero());
            let accepted = inject.min(room);
            l.injected += inject;
            l.dropped += inject - accepted;
            *backlog.entry((f.src, f.src)).or_insert_with(T::zero) += accepted;
            let quota = f.achieved_bps * dt;
            for hop in f.path.windows(2) {
                let (from, to) = (hop[0], hop[1]);
                let have = backlog.get(&(from, f.src)).copied().unwrap_or_else(T::zero);
                let moved = have.min(quota);
                if !(moved > T::zero()) {
                    continue;
                }
                *backlog.get_mut(&(from, f.src)).unwrap() -= moved;
                if to == *f.path.last().unwrap() {
                    l.delivered += moved;
                } else {
                    let room = (cfg.buffer_bits - occupied(&backlog, to)).max(T::zero());
                    let kept = moved.min(room);
                    l.dropped += moved - kept;
                    *backlog.entry((to, f.src)).or_insert_with(T::zero) += kept;
                }
            }
        }
    }
    for ((_, src), bits) in backlog {
        let l = ledger.entry(src).or_default();
        l.queued += bits;
    }
    ledger
}
