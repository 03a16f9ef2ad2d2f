use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::channel::LinkBudget;
use crate::error::{Error, Result};
use crate::geometry::{NodeId, Trajectory, Vec3};
use crate::num::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Link<T> {
    pub from: NodeId,
    pub to: NodeId,
    pub distance: T,
    pub snr_db: T,
    pub capacity_bps: T,
}

/// Directed link set of the network at one instant.
///
/// Only links whose SNR is strictly above the budget threshold are present. Nodes are
/// kept sorted by id, so node-index order and id order coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSnapshot<T> {
    t: T,
    nodes: Vec<NodeId>,
    positions: Vec<Vec3<T>>,
    links: Vec<Link<T>>,
    out: Vec<Vec<(usize, usize)>>,
    cs_neighbors: Vec<Vec<usize>>,
    index: BTreeMap<NodeId, usize>,
}

impl<T: Real> GraphSnapshot<T> {
    pub fn t(&self) -> T {
        self.t
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link<T>] {
        &self.links
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, id: NodeId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn position(&self, id: NodeId) -> Option<Vec3<T>> {
        self.index_of(id).map(|i| self.positions[i])
    }

    pub fn link(&self, from: NodeId, to: NodeId) -> Option<&Link<T>> {
        let i = self.index_of(from)?;
        let j = self.index_of(to)?;
        self.out[i].iter().find(|(v, _)| *v == j).map(|(_, l)| &self.links[*l])
    }

    /// Outgoing links of node index `i` as `(target index, link)`.
    pub(crate) fn out_links(&self, i: usize) -> impl Iterator<Item = (usize, &Link<T>)> {
        self.out[i].iter().map(move |(v, l)| (*v, &self.links[*l]))
    }

    pub(crate) fn node_at(&self, i: usize) -> NodeId {
        self.nodes[i]
    }

    /// Longest usable link, 0 when there are none.
    pub fn max_link_distance(&self) -> T {
        self.links.iter().map(|l| l.distance).fold(T::zero(), T::max)
    }

    /// Nodes within carrier-sense range of `id`.
    pub fn cs_neighbors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        let i = self.index_of(id);
        i.into_iter().flat_map(move |i| self.cs_neighbors[i].iter().map(move |j| self.nodes[*j]))
    }
}

/// Builds the link set at time `t`; carrier sensing uses the link threshold.
pub fn build_snapshot<T: Real>(nodes: &[(NodeId, Vec3<T>)], budget: &LinkBudget<T>, t: T) -> Result<GraphSnapshot<T>> {
    build_snapshot_with_cs(nodes, budget, budget.snr_threshold_db, t)
}

/// Builds the link set at time `t` with a separate carrier-sense SNR threshold.
pub fn build_snapshot_with_cs<T: Real>(
    nodes: &[(NodeId, Vec3<T>)],
    budget: &LinkBudget<T>,
    cs_threshold_db: T,
    t: T,
) -> Result<GraphSnapshot<T>> {
    budget.validate()?;
    if nodes.len() < 2 {
        return Err(Error::InvalidScenario("a snapshot needs at least two nodes".into()));
    }
    let mut sorted = nodes.to_vec();
    sorted.sort_by_key(|(id, _)| *id);
    if let Some(w) = sorted.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::InvalidScenario(format!("duplicate node id {}", w[0].0)));
    }
    let n = sorted.len();
    let mut links = Vec::new();
    let mut out = vec![Vec::new(); n];
    let mut cs_neighbors = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = sorted[i].1.distance(&sorted[j].1);
            if !(d > T::zero()) {
                return Err(Error::InvalidScenario(format!("nodes {} and {} coincide at t = {t}", sorted[i].0, sorted[j].0)));
            }
            let snr = budget.snr_db(d)?;
            if snr > cs_threshold_db {
                cs_neighbors[i].push(j);
            }
            if snr > budget.snr_threshold_db {
                out[i].push((j, links.len()));
                links.push(Link {
                    from: sorted[i].0,
                    to: sorted[j].0,
                    distance: d,
                    snr_db: snr,
                    capacity_bps: crate::channel::capacity_from_snr_db(budget.bandwidth_hz, snr),
                });
            }
        }
    }
    let index = sorted.iter().enumerate().map(|(i, (id, _))| (*id, i)).collect();
    Ok(GraphSnapshot {
        t,
        nodes: sorted.iter().map(|(id, _)| *id).collect(),
        positions: sorted.iter().map(|(_, p)| *p).collect(),
        links,
        out,
        cs_neighbors,
        index,
    })
}

/// Positions of every trajectory at time `t`.
pub fn positions_at<T: Real>(trajectories: &[Trajectory<T>], t: T) -> Vec<(NodeId, Vec3<T>)> {
    trajectories.iter().map(|tr| (tr.id(), tr.position_at(t))).collect()
}

/// Number of active nodes (generating or forwarding) within carrier-sense range of `j`,
/// not counting `j` itself nor `exclude`.
pub fn gamma_neighbors<T: Real>(
    snapshot: &GraphSnapshot<T>,
    active: &BTreeSet<NodeId>,
    j: NodeId,
    exclude: Option<NodeId>,
) -> Result<usize> {
    if !snapshot.contains(j) {
        return Err(Error::invalid(format!("node {j} is not in the snapshot")));
    }
    Ok(snapshot.cs_neighbors(j).filter(|n| Some(*n) != exclude && active.contains(n)).count())
}

/// Largest neighbour count of any node, used to normalize `gamma`.
pub fn max_gamma<T: Real>(snapshot: &GraphSnapshot<T>, active: &BTreeSet<NodeId>) -> usize {
    snapshot.nodes().iter().map(|j| snapshot.cs_neighbors(*j).filter(|n| active.contains(n)).count()).max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(id: u32, x: f64) -> (NodeId, Vec3<f64>) {
        (NodeId(id), Vec3::new(x, 0.0, 10.0))
    }

    #[test]
    fn ten_meter_pair_is_linked_both_ways() {
        let s = build_snapshot(&[at(0, 0.0), at(1, 10.0)], &LinkBudget::default(), 0.0).unwrap();
        assert_eq!(s.links().len(), 2);
        let l = s.link(NodeId(0), NodeId(1)).unwrap();
        assert!((l.snr_db - 18.155).abs() < 1e-3);
        assert!(s.link(NodeId(1), NodeId(0)).is_some());
    }

    #[test]
    fn out_of_range_nodes_have_no_links() {
        let s = build_snapshot(&[at(0, 0.0), at(1, 500.0)], &LinkBudget::default(), 0.0).unwrap();
        assert!(s.links().is_empty());
    }

    #[test]
    fn collinear_chain() {
        let b = LinkBudget::<f64>::default();
        // spacing chosen from the inverted budget: 0.8 of the range links, 1.6 of it does not
        let step = 0.8 * b.max_range();
        let s = build_snapshot(&[at(0, 0.0), at(1, step), at(2, 2.0 * step)], &b, 0.0).unwrap();
        assert!(b.snr_db(step).unwrap() > 5.0 && b.snr_db(2.0 * step).unwrap() <= 5.0);
        assert!(s.link(NodeId(0), NodeId(1)).is_some());
        assert!(s.link(NodeId(1), NodeId(2)).is_some());
        assert!(s.link(NodeId(0), NodeId(2)).is_none());
        assert_eq!(s.links().len(), 4);
    }

    #[test]
    fn coincident_or_too_few_nodes_rejected() {
        let b = LinkBudget::default();
        assert!(matches!(build_snapshot(&[at(0, 1.0), at(1, 1.0)], &b, 0.0), Err(Error::InvalidScenario(_))));
        assert!(build_snapshot(&[at(0, 1.0)], &b, 0.0).is_err());
        assert!(build_snapshot(&[at(0, 1.0), at(0, 5.0)], &b, 0.0).is_err());
    }

    #[test]
    fn gamma_counts() {
        let b = LinkBudget::default();
        let nodes: Vec<_> = (0..5).map(|i| at(i, i as f64)).collect();
        let s = build_snapshot(&nodes, &b, 0.0).unwrap();
        let none = BTreeSet::new();
        assert_eq!(gamma_neighbors(&s, &none, NodeId(2), None).unwrap(), 0);
        let active: BTreeSet<_> = [0, 1, 3].map(NodeId).into_iter().collect();
        assert_eq!(gamma_neighbors(&s, &active, NodeId(2), None).unwrap(), 3);
        assert_eq!(gamma_neighbors(&s, &active, NodeId(2), Some(NodeId(1))).unwrap(), 2);
        assert_eq!(gamma_neighbors(&s, &active, NodeId(1), None).unwrap(), 2);
        assert_eq!(max_gamma(&s, &active), 3);
        assert!(gamma_neighbors(&s, &active, NodeId(9), None).is_err());
    }
}
