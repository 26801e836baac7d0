//! Random instance generators and slow reference implementations used as
//! oracles by the integration tests.
#![allow(dead_code)]

use std::collections::VecDeque;

use wanroute_core::traffic::{seeded_rng, uniform01, Rng};
use wanroute_core::{LinkId, NodeId, Topology};

pub struct Draw(Rng);

impl Draw {
    pub fn new(seed: u64) -> Self {
        Draw(seeded_rng(seed))
    }

    pub fn unit(&mut self) -> f64 {
        uniform01(&mut self.0)
    }

    pub fn real(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    /// Uniform integer in `[lo, hi]`.
    pub fn int(&mut self, lo: usize, hi: usize) -> usize {
        lo + ((self.unit() * (hi - lo + 1) as f64) as usize).min(hi - lo)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.int(0, i);
            items.swap(i, j);
        }
    }
}

/// Connected graph on `n` nodes: a random spanning tree plus every other
/// pair with probability `p`. Capacities drawn from `[cap_lo, cap_hi]`.
pub fn random_connected(d: &mut Draw, n: usize, p: f64, cap_lo: f64, cap_hi: f64) -> Topology {
    let mut order: Vec<usize> = (0..n).collect();
    d.shuffle(&mut order);
    let mut edges = Vec::new();
    for i in 1..n {
        let parent = order[d.int(0, i - 1)];
        let (u, v) = (order[i].min(parent), order[i].max(parent));
        edges.push((u, v));
    }
    for u in 0..n {
        for v in u + 1..n {
            if !edges.contains(&(u, v)) && d.chance(p) {
                edges.push((u, v));
            }
        }
    }
    d.shuffle(&mut edges);
    let links: Vec<(usize, usize, f64)> = edges
        .into_iter()
        .map(|(u, v)| {
            let cap = if cap_lo == cap_hi { cap_lo } else { d.real(cap_lo, cap_hi) };
            if d.chance(0.5) { (u, v, cap) } else { (v, u, cap) }
        })
        .collect();
    Topology::from_links(n, links).expect("generated graph is valid")
}

/// Every simple path from `src` to `dst` as (node sequence, link sequence).
pub fn simple_paths(t: &Topology, src: NodeId, dst: NodeId) -> Vec<(Vec<NodeId>, Vec<LinkId>)> {
    fn walk(
        t: &Topology,
        dst: NodeId,
        nodes: &mut Vec<NodeId>,
        links: &mut Vec<LinkId>,
        out: &mut Vec<(Vec<NodeId>, Vec<LinkId>)>,
    ) {
        let here = *nodes.last().unwrap();
        if here == dst {
            out.push((nodes.clone(), links.clone()));
            return;
        }
        for &(next, link) in t.neighbors(here) {
            if nodes.contains(&next) {
                continue;
            }
            nodes.push(next);
            links.push(link);
            walk(t, dst, nodes, links, out);
            nodes.pop();
            links.pop();
        }
    }
    let mut out = Vec::new();
    walk(t, dst, &mut vec![src], &mut Vec::new(), &mut out);
    out
}

pub fn path_sum(costs: &[f64], links: &[LinkId]) -> f64 {
    links.iter().map(|l| costs[l.0]).sum()
}

pub fn path_max(costs: &[f64], links: &[LinkId]) -> f64 {
    links.iter().map(|l| costs[l.0]).fold(0.0, f64::max)
}

/// Exhaustive optimum under (sum, hops, node sequence).
pub fn brute_min_sum(t: &Topology, costs: &[f64], src: NodeId, dst: NodeId) -> (f64, Vec<NodeId>) {
    simple_paths(t, src, dst)
        .into_iter()
        .map(|(nodes, links)| (path_sum(costs, &links), nodes))
        .min_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then(a.1.len().cmp(&b.1.len()))
                .then(a.1.cmp(&b.1))
        })
        .expect("connected")
}

/// Exhaustive optimum under (max, sum, hops, node sequence).
pub fn brute_min_max(t: &Topology, costs: &[f64], src: NodeId, dst: NodeId) -> (f64, Vec<NodeId>) {
    simple_paths(t, src, dst)
        .into_iter()
        .map(|(nodes, links)| (path_max(costs, &links), path_sum(costs, &links), nodes))
        .min_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then(a.1.total_cmp(&b.1))
                .then(a.2.len().cmp(&b.2.len()))
                .then(a.2.cmp(&b.2))
        })
        .map(|(m, _, nodes)| (m, nodes))
        .expect("connected")
}

/// Breadth-first reachability from node 0.
pub fn bfs_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    if n == 0 {
        return false;
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(u) = queue.pop_front() {
        for &(a, b) in edges {
            let next = if a == u { b } else if b == u { a } else { continue };
            if !seen[next] {
                seen[next] = true;
                queue.push_back(next);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Random allocation instance: per-flow link lists and capacities.
pub struct MmfInstance {
    pub capacities: Vec<f64>,
    pub paths: Vec<Vec<LinkId>>,
}

pub fn random_mmf_instance(d: &mut Draw, max_links: usize, max_flows: usize) -> MmfInstance {
    let links = d.int(1, max_links);
    let flows = d.int(1, max_flows);
    let capacities = (0..links).map(|_| d.real(0.1, 2.0)).collect();
    let paths = (0..flows)
        .map(|_| {
            let mut path: Vec<LinkId> = (0..links).filter(|_| d.chance(0.4)).map(LinkId).collect();
            if path.is_empty() {
                path.push(LinkId(d.int(0, links - 1)));
            }
            path
        })
        .collect();
    MmfInstance { capacities, paths }
}

/// Water-filling with an explicit search for each level: all unfrozen flows
/// rise together; the largest feasible level is found by bisection, flows on
/// links saturated at that level freeze, and the next level starts from there.
pub fn water_filling_oracle(capacities: &[f64], paths: &[Vec<LinkId>]) -> Vec<f64> {
    let mut rates = vec![0.0; paths.len()];
    let mut frozen = vec![false; paths.len()];
    let feasible = |rates: &[f64], frozen: &[bool], level: f64| {
        capacities.iter().enumerate().all(|(l, &cap)| {
            let used: f64 = paths
                .iter()
                .enumerate()
                .filter(|(_, p)| p.contains(&LinkId(l)))
                .map(|(i, _)| if frozen[i] { rates[i] } else { level })
                .sum();
            used <= cap
        })
    };
    while frozen.iter().any(|f| !f) {
        let mut lo = 0.0;
        let mut hi = capacities.iter().cloned().fold(0.0, f64::max) + 1.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if feasible(&rates, &frozen, mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let level = lo;
        let mut froze_any = false;
        for (l, &cap) in capacities.iter().enumerate() {
            let crossing: Vec<usize> = (0..paths.len())
                .filter(|&i| paths[i].contains(&LinkId(l)))
                .collect();
            if !crossing.iter().any(|&i| !frozen[i]) {
                continue;
            }
            let used: f64 = crossing
                .iter()
                .map(|&i| if frozen[i] { rates[i] } else { level })
                .sum();
            if cap - used <= 1e-9 {
                for &i in &crossing {
                    if !frozen[i] {
                        frozen[i] = true;
                        rates[i] = level;
                        froze_any = true;
                    }
                }
            }
        }
        assert!(froze_any, "water-filling oracle made no progress");
    }
    rates
}

/// Checks the max-min bottleneck condition; returns the first violation.
pub fn bottleneck_violation(capacities: &[f64], paths: &[Vec<LinkId>], rates: &[f64], tol: f64) -> Option<String> {
    for (i, path) in paths.iter().enumerate() {
        let ok = path.iter().any(|&l| {
            let crossing: Vec<usize> = (0..paths.len()).filter(|&j| paths[j].contains(&l)).collect();
            let used: f64 = crossing.iter().map(|&j| rates[j]).sum();
            let saturated = capacities[l.0] - used <= tol;
            let largest = crossing.iter().all(|&j| rates[i] >= rates[j] - tol);
            saturated && largest
        });
        if !ok {
            return Some(format!("flow {i} at rate {} has no bottleneck link", rates[i]));
        }
    }
    None
}

/// Per-link rate sums against capacity.
pub fn capacity_violation(capacities: &[f64], paths: &[Vec<LinkId>], rates: &[f64], tol: f64) -> Option<String> {
    for (l, &cap) in capacities.iter().enumerate() {
        let used: f64 = paths
            .iter()
            .zip(rates)
            .filter(|(p, _)| p.contains(&LinkId(l)))
            .map(|(_, r)| r)
            .sum();
        if used > cap + tol {
            return Some(format!("link {l} carries {used} over capacity {cap}"));
        }
    }
    None
}
