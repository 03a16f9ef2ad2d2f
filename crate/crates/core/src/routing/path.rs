use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::snapshot::{GraphSnapshot, Link};
use crate::error::{Error, Result};
use crate::geometry::NodeId;
use crate::num::Real;

/// Additive link cost used by least-cost routing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RoutingMetric<T> {
    /// Sum of link lengths.
    Euclidean,
    /// Blend of normalized link length (weight `1 - alpha`) and normalized
    /// interference at the receiving node (weight `alpha`).
    I2r { alpha: T },
}

impl<T: Real> RoutingMetric<T> {
    pub fn i2r(alpha: T) -> Result<Self> {
        if !(alpha >= T::zero() && alpha <= T::one()) {
            return Err(Error::invalid(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        Ok(Self::I2r { alpha })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Euclidean => Ok(()),
            Self::I2r { alpha } => Self::i2r(alpha).map(|_| ()),
        }
    }
}

/// How a route is chosen among the simple paths to the gateway.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum PathSelection<T> {
    /// Least total metric cost.
    MinCost { metric: RoutingMetric<T> },
    /// Largest bottleneck link capacity.
    MaxBottleneck,
}

impl<T: Real> PathSelection<T> {
    pub fn euclidean() -> Self {
        Self::MinCost { metric: RoutingMetric::Euclidean }
    }

    pub fn i2r(alpha: T) -> Result<Self> {
        Ok(Self::MinCost { metric: RoutingMetric::i2r(alpha)? })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::MinCost { metric } => metric.validate(),
            Self::MaxBottleneck => Ok(()),
        }
    }
}

/// A simple path from a source to the gateway and its score.
///
/// `cost` is the metric cost for least-cost selection and the bottleneck capacity in
/// bit/s for max-bottleneck selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route<T> {
    pub path: Vec<NodeId>,
    pub cost: T,
}

impl<T> Route<T> {
    pub fn source(&self) -> NodeId {
        self.path[0]
    }

    pub fn hops(&self) -> usize {
        self.path.len() - 1
    }
}

/// Per-snapshot constants of the interference-aware weight.
#[derive(Debug, Clone)]
pub struct I2rContext<'a, T> {
    pub alpha: T,
    pub d_max: T,
    pub gamma_max: usize,
    pub active: &'a BTreeSet<NodeId>,
}

impl<'a, T: Real> I2rContext<'a, T> {
    pub fn new(snapshot: &GraphSnapshot<T>, alpha: T, active: &'a BTreeSet<NodeId>) -> Self {
        Self { alpha, d_max: snapshot.max_link_distance(), gamma_max: super::max_gamma(snapshot, active), active }
    }

    /// Weight of `link`; the interference term counts active carrier-sense neighbours of
    /// the receiving node other than the transmitter.
    pub fn weight(&self, snapshot: &GraphSnapshot<T>, link: &Link<T>) -> T {
        let d_term = if self.d_max > T::zero() { link.distance / self.d_max } else { T::zero() };
        let g_term = if self.gamma_max > 0 {
            let g = snapshot.cs_neighbors(link.to).filter(|n| *n != link.from && self.active.contains(n)).count();
            T::from_usize(g).unwrap() / T::from_usize(self.gamma_max).unwrap()
        } else {
            T::zero()
        };
        (T::one() - self.alpha) * d_term + self.alpha * g_term
    }
}

fn check_endpoints<T: Real>(snapshot: &GraphSnapshot<T>, source: NodeId, gw: NodeId) -> Result<(usize, usize)> {
    let s = snapshot.index_of(source).ok_or_else(|| Error::invalid(format!("source {source} is not in the snapshot")))?;
    let g = snapshot.index_of(gw).ok_or_else(|| Error::invalid(format!("gateway {gw} is not in the snapshot")))?;
    Ok((s, g))
}

/// Label-setting search. A label is `(key, path)`; `better(a, b)` orders keys with the
/// preferred one first, and equal keys fall back to the lexicographic node-id sequence.
/// Keys must not improve along a path, which holds for non-negative sums and for minima.
fn label_search<T: Real, K: Copy>(
    snapshot: &GraphSnapshot<T>,
    src: usize,
    dst: usize,
    init: K,
    extend: impl Fn(K, &Link<T>) -> K,
    better: impl Fn(&K, &K) -> Ordering,
) -> Option<(K, Vec<usize>)> {
    let n = snapshot.len();
    let cmp = |a: &(K, Vec<usize>), b: &(K, Vec<usize>)| better(&a.0, &b.0).then_with(|| a.1.cmp(&b.1));
    let mut best: Vec<Option<(K, Vec<usize>)>> = vec![None; n];
    let mut settled = vec![false; n];
    best[src] = Some((init, vec![src]));
    loop {
        let u = (0..n)
            .filter(|&i| !settled[i])
            .filter_map(|i| best[i].as_ref().map(|l| (i, l)))
            .min_by(|a, b| cmp(a.1, b.1))
            .map(|(i, _)| i)?;
        settled[u] = true;
        if u == dst {
            return best[dst].take();
        }
        let (key, path) = best[u].clone().expect("settled node has a label");
        for (v, link) in snapshot.out_links(u) {
            if settled[v] {
                continue;
            }
            let mut p = path.clone();
            p.push(v);
            let cand = (extend(key, link), p);
            if best[v].as_ref().is_none_or(|cur| cmp(&cand, cur) == Ordering::Less) {
                best[v] = Some(cand);
            }
        }
    }
}

fn ids<T: Real>(snapshot: &GraphSnapshot<T>, path: &[usize]) -> Vec<NodeId> {
    path.iter().map(|i| snapshot.node_at(*i)).collect()
}

fn asc<T: Real>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

/// Least-cost simple path from `source` to `gw`, or `None` when they are disconnected.
///
/// `active` is the set of nodes generating or forwarding traffic; only the interference
/// metric reads it. Ties are broken by the lexicographically smallest node-id sequence.
pub fn shortest_path<T: Real>(
    snapshot: &GraphSnapshot<T>,
    metric: &RoutingMetric<T>,
    source: NodeId,
    gw: NodeId,
    active: &BTreeSet<NodeId>,
) -> Result<Option<Route<T>>> {
    metric.validate()?;
    let (s, g) = check_endpoints(snapshot, source, gw)?;
    let found = match *metric {
        RoutingMetric::Euclidean => label_search(snapshot, s, g, T::zero(), |k, l| k + l.distance, asc),
        RoutingMetric::I2r { alpha } => {
            let ctx = I2rContext::new(snapshot, alpha, active);
            label_search(snapshot, s, g, T::zero(), |k, l| k + ctx.weight(snapshot, l), asc)
        }
    };
    Ok(found.map(|(cost, p)| Route { path: ids(snapshot, &p), cost }))
}

/// Simple path maximizing the smallest link capacity; `cost` holds that capacity.
/// A zero-hop route (source is the gateway) has infinite bottleneck.
pub fn widest_path<T: Real>(snapshot: &GraphSnapshot<T>, source: NodeId, gw: NodeId) -> Result<Option<Route<T>>> {
    let (s, g) = check_endpoints(snapshot, source, gw)?;
    let found = label_search(snapshot, s, g, T::infinity(), |k, l| k.min(l.capacity_bps), |a, b| asc(b, a));
    Ok(found.map(|(cost, p)| Route { path: ids(snapshot, &p), cost }))
}

/// Route under any selection rule.
pub fn select_route<T: Real>(
    snapshot: &GraphSnapshot<T>,
    selection: &PathSelection<T>,
    source: NodeId,
    gw: NodeId,
    active: &BTreeSet<NodeId>,
) -> Result<Option<Route<T>>> {
    match selection {
        PathSelection::MinCost { metric } => shortest_path(snapshot, metric, source, gw, active),
        PathSelection::MaxBottleneck => widest_path(snapshot, source, gw),
    }
}

/// Cost of an explicit path under `metric`, summed link by link in path order.
pub fn path_cost<T: Real>(snapshot: &GraphSnapshot<T>, metric: &RoutingMetric<T>, path: &[NodeId], active: &BTreeSet<NodeId>) -> Result<T> {
    metric.validate()?;
    let links = path_links(snapshot, path)?;
    Ok(match *metric {
        RoutingMetric::Euclidean => links.iter().fold(T::zero(), |k, l| k + l.distance),
        RoutingMetric::I2r { alpha } => {
            let ctx = I2rContext::new(snapshot, alpha, active);
            links.iter().fold(T::zero(), |k, l| k + ctx.weight(snapshot, l))
        }
    })
}

/// Links along `path`; fails if the path is empty, revisits a node, or uses a missing link.
pub fn path_links<'a, T: Real>(snapshot: &'a GraphSnapshot<T>, path: &[NodeId]) -> Result<Vec<&'a Link<T>>> {
    if path.is_empty() {
        return Err(Error::InvalidPath("empty path".into()));
    }
    let mut seen = BTreeSet::new();
    if let Some(dup) = path.iter().find(|n| !seen.insert(**n)) {
        return Err(Error::InvalidPath(format!("node {dup} appears twice")));
    }
    if let Some(n) = path.iter().find(|n| !snapshot.contains(**n)) {
        return Err(Error::InvalidPath(format!("node {n} is not in the snapshot")));
    }
    path.windows(2)
        .map(|w| {
            snapshot
                .link(w[0], w[1])
                .ok_or_else(|| Error::InvalidPath(format!("no usable link {} -> {} at t = {}", w[0], w[1], snapshot.t())))
        })
        .collect()
}

/// Smallest link capacity along `path`; infinite for a single-node path.
pub fn path_bottleneck<T: Real>(snapshot: &GraphSnapshot<T>, path: &[NodeId]) -> Result<T> {
    Ok(path_links(snapshot, path)?.iter().map(|l| l.capacity_bps).fold(T::infinity(), T::min))
}
