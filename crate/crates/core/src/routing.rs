//! Link cost metrics and minimum-cost path selection.
//!
//! Every search returns a simple path and breaks ties deterministically:
//! min-sum orders candidates by `(sum, hops, node sequence)`; min-max by
//! `(max, sum, hops, node sequence)`. Node sequences compare
//! lexicographically from the source.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::engine::NetworkState;
use crate::topology::{LinkId, NodeId, Topology};
use crate::traffic::FlowArrival;

#[derive(Debug, Error, PartialEq)]
pub enum RoutingError {
    #[error("no path from node {src} to node {dst}")]
    NoPath { src: NodeId, dst: NodeId },
    #[error("source and destination are both node {0}")]
    SameEndpoints(NodeId),
    #[error("node {node} out of range for {node_count} nodes")]
    UnknownNode { node: NodeId, node_count: usize },
    #[error("link {link} has invalid cost {cost}")]
    BadCost { link: LinkId, cost: f64 },
    #[error("expected {expected} link costs, got {got}")]
    CostCount { expected: usize, got: usize },
    #[error("unknown scheme `{name}`; valid schemes: {valid}")]
    UnknownScheme { name: String, valid: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkCostMetric {
    Utilization,
    Load,
    LoadPlusDemand,
    UnitHop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathObjective {
    Sum,
    Max,
}

/// Snapshot of one link as seen by a routing decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkState {
    /// Outstanding bytes of active flows crossing the link.
    pub load: f64,
    /// Sum of rates currently allocated on the link.
    pub rate: f64,
    pub capacity: f64,
}

pub fn link_cost(metric: LinkCostMetric, link: LinkState, new_flow_demand: f64) -> f64 {
    match metric {
        LinkCostMetric::Utilization => link.rate / link.capacity,
        LinkCostMetric::Load => link.load,
        LinkCostMetric::LoadPlusDemand => link.load + new_flow_demand,
        LinkCostMetric::UnitHop => 1.0,
    }
}

/// The seven path-selection schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SelectionScheme {
    MinSumLoad,
    MinMaxLoad,
    MinSumLoadDemand,
    MinMaxLoadDemand,
    MinSumUtil,
    MinMaxUtil,
    MinHop,
}

impl SelectionScheme {
    pub const ALL: [SelectionScheme; 7] = [
        SelectionScheme::MinSumLoad,
        SelectionScheme::MinMaxLoad,
        SelectionScheme::MinSumLoadDemand,
        SelectionScheme::MinMaxLoadDemand,
        SelectionScheme::MinSumUtil,
        SelectionScheme::MinMaxUtil,
        SelectionScheme::MinHop,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SelectionScheme::MinSumLoad => "minsum_load",
            SelectionScheme::MinMaxLoad => "minmax_load",
            SelectionScheme::MinSumLoadDemand => "minsum_load_demand",
            SelectionScheme::MinMaxLoadDemand => "minmax_load_demand",
            SelectionScheme::MinSumUtil => "minsum_util",
            SelectionScheme::MinMaxUtil => "minmax_util",
            SelectionScheme::MinHop => "minhop",
        }
    }

    pub fn objective(self) -> PathObjective {
        match self {
            SelectionScheme::MinMaxLoad
            | SelectionScheme::MinMaxLoadDemand
            | SelectionScheme::MinMaxUtil => PathObjective::Max,
            _ => PathObjective::Sum,
        }
    }

    pub fn metric(self) -> LinkCostMetric {
        match self {
            SelectionScheme::MinSumLoad | SelectionScheme::MinMaxLoad => LinkCostMetric::Load,
            SelectionScheme::MinSumLoadDemand | SelectionScheme::MinMaxLoadDemand => {
                LinkCostMetric::LoadPlusDemand
            }
            SelectionScheme::MinSumUtil | SelectionScheme::MinMaxUtil => {
                LinkCostMetric::Utilization
            }
            SelectionScheme::MinHop => LinkCostMetric::UnitHop,
        }
    }

    pub fn valid_names() -> String {
        Self::ALL.map(Self::name).join(", ")
    }
}

impl fmt::Display for SelectionScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SelectionScheme {
    type Err = RoutingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|scheme| scheme.name() == s)
            .ok_or_else(|| RoutingError::UnknownScheme {
                name: s.to_string(),
                valid: Self::valid_names(),
            })
    }
}

/// A simple path: `nodes[i]` and `nodes[i + 1]` are joined by `links[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub nodes: Vec<NodeId>,
    pub links: Vec<LinkId>,
}

impl Path {
    pub fn hop_count(&self) -> usize {
        self.links.len()
    }

    pub fn source(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn destination(&self) -> NodeId {
        self.nodes[self.nodes.len() - 1]
    }

    /// Sum of link costs, accumulated from the source.
    pub fn sum_cost(&self, costs: &[f64]) -> f64 {
        self.links.iter().fold(0.0, |acc, l| acc + costs[l.0])
    }

    pub fn max_cost(&self, costs: &[f64]) -> f64 {
        self.links.iter().fold(0.0, |acc: f64, l| acc.max(costs[l.0]))
    }

    /// Checks that the path is simple and consistent with `topology`.
    pub fn is_valid_in(&self, topology: &Topology) -> bool {
        if self.nodes.len() != self.links.len() + 1 || self.links.is_empty() {
            return false;
        }
        let mut seen = vec![false; topology.node_count()];
        for n in &self.nodes {
            if n.0 >= seen.len() || std::mem::replace(&mut seen[n.0], true) {
                return false;
            }
        }
        self.links.iter().enumerate().all(|(i, &l)| {
            l.0 < topology.link_count()
                && topology.link(l).other(self.nodes[i]) == Some(self.nodes[i + 1])
        })
    }
}

type Adjacency = [Vec<(NodeId, LinkId)>];

fn check_inputs(
    adjacency: &Adjacency,
    costs: &[f64],
    link_count: usize,
    src: NodeId,
    dst: NodeId,
) -> Result<(), RoutingError> {
    let node_count = adjacency.len();
    for node in [src, dst] {
        if node.0 >= node_count {
            return Err(RoutingError::UnknownNode { node, node_count });
        }
    }
    if src == dst {
        return Err(RoutingError::SameEndpoints(src));
    }
    if costs.len() != link_count {
        return Err(RoutingError::CostCount {
            expected: link_count,
            got: costs.len(),
        });
    }
    if let Some((i, &cost)) = costs
        .iter()
        .enumerate()
        .find(|(_, c)| !(**c >= 0.0 && c.is_finite()))
    {
        return Err(RoutingError::BadCost {
            link: LinkId(i),
            cost,
        });
    }
    Ok(())
}

/// Minimum-sum path; ties broken by fewer hops, then smaller node sequence.
pub fn min_sum_path(
    topology: &Topology,
    costs: &[f64],
    src: NodeId,
    dst: NodeId,
) -> Result<Path, RoutingError> {
    min_sum_path_over(topology.adjacency(), topology.link_count(), costs, src, dst)
}

/// [`min_sum_path`] over an explicit adjacency list. The result does not
/// depend on the order of each node's neighbor list.
pub fn min_sum_path_over(
    adjacency: &Adjacency,
    link_count: usize,
    costs: &[f64],
    src: NodeId,
    dst: NodeId,
) -> Result<Path, RoutingError> {
    check_inputs(adjacency, costs, link_count, src, dst)?;
    dijkstra(adjacency, costs, src, dst, |_| true).ok_or(RoutingError::NoPath { src, dst })
}

/// Minimum-bottleneck path; ties broken by smaller sum, fewer hops, then
/// smaller node sequence.
pub fn min_max_path(
    topology: &Topology,
    costs: &[f64],
    src: NodeId,
    dst: NodeId,
) -> Result<Path, RoutingError> {
    min_max_path_over(topology.adjacency(), topology.link_count(), costs, src, dst)
}

pub fn min_max_path_over(
    adjacency: &Adjacency,
    link_count: usize,
    costs: &[f64],
    src: NodeId,
    dst: NodeId,
) -> Result<Path, RoutingError> {
    check_inputs(adjacency, costs, link_count, src, dst)?;
    let bottleneck =
        min_bottleneck(adjacency, costs, src, dst).ok_or(RoutingError::NoPath { src, dst })?;
    // Every path using only links at or below the optimal bottleneck attains
    // it, so the secondary keys reduce to a min-sum search on that subgraph.
    dijkstra(adjacency, costs, src, dst, |l| costs[l.0] <= bottleneck)
        .ok_or(RoutingError::NoPath { src, dst })
}

/// Smallest achievable maximum link cost from `src` to `dst`.
fn min_bottleneck(adjacency: &Adjacency, costs: &[f64], src: NodeId, dst: NodeId) -> Option<f64> {
    let n = adjacency.len();
    let mut best = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    best[src.0] = 0.0;
    heap.push(Reverse((Key(0.0), src.0)));
    while let Some(Reverse((Key(b), v))) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        if v == dst.0 {
            return Some(b);
        }
        for &(w, l) in &adjacency[v] {
            let cand = b.max(costs[l.0]);
            if !done[w.0] && cand < best[w.0] {
                best[w.0] = cand;
                heap.push(Reverse((Key(cand), w.0)));
            }
        }
    }
    None
}

/// Total order on non-NaN costs for heap keys.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Label-setting search on `(sum, hops, node sequence)`, restricted to links
/// for which `allowed` holds.
fn dijkstra(
    adjacency: &Adjacency,
    costs: &[f64],
    src: NodeId,
    dst: NodeId,
    allowed: impl Fn(LinkId) -> bool,
) -> Option<Path> {
    let n = adjacency.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut hops = vec![usize::MAX; n];
    let mut pred: Vec<Option<(NodeId, LinkId)>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[src.0] = 0.0;
    hops[src.0] = 0;
    heap.push(Reverse((Key(0.0), 0usize, src.0)));

    while let Some(Reverse((Key(d), h, v))) = heap.pop() {
        if done[v] || d != dist[v] || h != hops[v] {
            continue;
        }
        done[v] = true;
        if v == dst.0 {
            break;
        }
        for &(w, l) in &adjacency[v] {
            if done[w.0] || !allowed(l) {
                continue;
            }
            let cand = (d + costs[l.0], h + 1);
            let order = cand
                .0
                .total_cmp(&dist[w.0])
                .then(cand.1.cmp(&hops[w.0]))
                .then_with(|| {
                    // Equal cost and hops: both predecessors are settled, so
                    // compare the node sequences leading to them.
                    let (old_pred, _) = pred[w.0].expect("labelled node has a predecessor");
                    compare_sequences(&pred, NodeId(v), old_pred)
                });
            if order == Ordering::Less {
                let improved_key = cand.0 != dist[w.0] || cand.1 != hops[w.0];
                dist[w.0] = cand.0;
                hops[w.0] = cand.1;
                pred[w.0] = Some((NodeId(v), l));
                if improved_key {
                    heap.push(Reverse((Key(cand.0), cand.1, w.0)));
                }
            }
        }
    }

    if !done[dst.0] {
        return None;
    }
    let mut nodes = vec![dst];
    let mut links = Vec::new();
    let mut cur = dst;
    while let Some((p, l)) = pred[cur.0] {
        nodes.push(p);
        links.push(l);
        cur = p;
    }
    nodes.reverse();
    links.reverse();
    Some(Path { nodes, links })
}

fn sequence_to(pred: &[Option<(NodeId, LinkId)>], node: NodeId) -> Vec<NodeId> {
    let mut seq = vec![node];
    let mut cur = node;
    while let Some((p, _)) = pred[cur.0] {
        seq.push(p);
        cur = p;
    }
    seq.reverse();
    seq
}

fn compare_sequences(pred: &[Option<(NodeId, LinkId)>], a: NodeId, b: NodeId) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    sequence_to(pred, a).cmp(&sequence_to(pred, b))
}

/// Per-link costs for `scheme` against the current network snapshot.
pub fn link_costs(
    scheme: SelectionScheme,
    topology: &Topology,
    state: &NetworkState,
    demand: f64,
) -> Vec<f64> {
    let metric = scheme.metric();
    topology
        .links()
        .iter()
        .map(|link| {
            let id = link.id.0;
            let snapshot = LinkState {
                load: state.link_load()[id].max(0.0),
                rate: state.link_rate()[id],
                capacity: link.capacity,
            };
            link_cost(metric, snapshot, demand)
        })
        .collect()
}

/// Picks the path for a newly arriving flow from the state snapshot taken
/// before the flow is admitted.
pub fn select_path(
    scheme: SelectionScheme,
    topology: &Topology,
    state: &NetworkState,
    flow: &FlowArrival,
) -> Result<Path, RoutingError> {
    let costs = link_costs(scheme, topology, state, flow.demand);
    match scheme.objective() {
        PathObjective::Sum => min_sum_path(topology, &costs, flow.source, flow.destination),
        PathObjective::Max => min_max_path(topology, &costs, flow.source, flow.destination),
    }
}
