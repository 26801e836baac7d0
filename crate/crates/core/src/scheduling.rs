//! Rate allocation for active flows on fixed paths.
//!
//! FCFS and SRPT are global strict-priority orders: flows are visited in
//! priority order and each takes the smallest residual capacity along its
//! path. MMF is max-min fair sharing computed by progressive filling.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::topology::{LinkId, Topology};
use crate::traffic::FlowId;

/// Saturation tolerance for links.
pub const SATURATION_TOL: f64 = 1e-9;
/// Rates below this are treated as zero.
pub const RATE_SNAP: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum SchedulingError {
    #[error("flow {0} has an empty path")]
    EmptyPath(FlowId),
    #[error("flow {flow} has nonpositive remaining bytes {remaining}")]
    NoRemainingBytes { flow: FlowId, remaining: f64 },
    #[error("flow {flow} crosses unknown link {link}")]
    UnknownLink { flow: FlowId, link: LinkId },
    #[error("unknown policy `{name}`; valid policies: fcfs, srpt, mmf")]
    UnknownPolicy { name: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchedulingPolicy {
    Fcfs,
    Srpt,
    Mmf,
}

impl SchedulingPolicy {
    pub const ALL: [SchedulingPolicy; 3] = [
        SchedulingPolicy::Fcfs,
        SchedulingPolicy::Srpt,
        SchedulingPolicy::Mmf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchedulingPolicy::Fcfs => "fcfs",
            SchedulingPolicy::Srpt => "srpt",
            SchedulingPolicy::Mmf => "mmf",
        }
    }
}

impl fmt::Display for SchedulingPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchedulingPolicy {
    type Err = SchedulingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| SchedulingError::UnknownPolicy {
                name: s.to_string(),
            })
    }
}

/// What the allocator needs to know about one active flow.
#[derive(Debug, Clone, Copy)]
pub struct ActiveFlow<'a> {
    pub id: FlowId,
    pub arrival_time: f64,
    pub remaining: f64,
    pub path: &'a [LinkId],
}

/// Rates aligned with the input flow slice.
#[derive(Debug, Clone, PartialEq)]
pub struct RateAllocation {
    pub rates: Vec<(FlowId, f64)>,
}

impl RateAllocation {
    pub fn get(&self, flow: FlowId) -> Option<f64> {
        self.rates.iter().find(|(id, _)| *id == flow).map(|&(_, r)| r)
    }

    /// Sum of allocated rates per link.
    pub fn link_rates(&self, flows: &[ActiveFlow<'_>], link_count: usize) -> Vec<f64> {
        let mut sums = vec![0.0; link_count];
        for (flow, &(_, rate)) in flows.iter().zip(&self.rates) {
            for l in flow.path {
                sums[l.0] += rate;
            }
        }
        sums
    }
}

pub fn allocate(
    policy: SchedulingPolicy,
    flows: &[ActiveFlow<'_>],
    topology: &Topology,
) -> Result<RateAllocation, SchedulingError> {
    let capacities: Vec<f64> = topology.links().iter().map(|l| l.capacity).collect();
    allocate_with_capacities(policy, flows, &capacities)
}

/// [`allocate`] against a bare capacity vector indexed by link id.
pub fn allocate_with_capacities(
    policy: SchedulingPolicy,
    flows: &[ActiveFlow<'_>],
    capacities: &[f64],
) -> Result<RateAllocation, SchedulingError> {
    for f in flows {
        if f.path.is_empty() {
            return Err(SchedulingError::EmptyPath(f.id));
        }
        if !(f.remaining > 0.0) {
            return Err(SchedulingError::NoRemainingBytes {
                flow: f.id,
                remaining: f.remaining,
            });
        }
        if let Some(&link) = f.path.iter().find(|l| l.0 >= capacities.len()) {
            return Err(SchedulingError::UnknownLink { flow: f.id, link });
        }
    }
    let rates = match policy {
        SchedulingPolicy::Fcfs => {
            let order = priority_order(flows, |a, b| {
                a.arrival_time
                    .total_cmp(&b.arrival_time)
                    .then(a.id.cmp(&b.id))
            });
            greedy(flows, &order, capacities)
        }
        SchedulingPolicy::Srpt => {
            let order = priority_order(flows, |a, b| {
                a.remaining
                    .total_cmp(&b.remaining)
                    .then(a.arrival_time.total_cmp(&b.arrival_time))
                    .then(a.id.cmp(&b.id))
            });
            greedy(flows, &order, capacities)
        }
        SchedulingPolicy::Mmf => progressive_filling(flows, capacities),
    };
    Ok(RateAllocation {
        rates: flows.iter().map(|f| f.id).zip(rates).collect(),
    })
}

/// Indices of `flows` sorted by `cmp`.
pub fn priority_order<'a>(
    flows: &[ActiveFlow<'a>],
    cmp: impl Fn(&ActiveFlow<'a>, &ActiveFlow<'a>) -> std::cmp::Ordering,
) -> Vec<usize> {
    let mut order: Vec<usize> = (0..flows.len()).collect();
    order.sort_by(|&a, &b| cmp(&flows[a], &flows[b]));
    order
}

fn snap(rate: f64) -> f64 {
    if rate < RATE_SNAP {
        0.0
    } else {
        rate
    }
}

fn greedy(flows: &[ActiveFlow<'_>], order: &[usize], capacities: &[f64]) -> Vec<f64> {
    let mut residual = capacities.to_vec();
    let mut rates = vec![0.0; flows.len()];
    for &i in order {
        let path = flows[i].path;
        let rate = snap(
            path.iter()
                .map(|l| residual[l.0])
                .fold(f64::INFINITY, f64::min),
        );
        if rate > 0.0 {
            for l in path {
                residual[l.0] = (residual[l.0] - rate).max(0.0);
            }
        }
        rates[i] = rate;
    }
    rates
}

/// Max-min fair rates. Each round finds the link with the smallest fair
/// share `residual / unfrozen flows`, freezes its unfrozen flows at that
/// share and charges them to every link on their paths.
fn progressive_filling(flows: &[ActiveFlow<'_>], capacities: &[f64]) -> Vec<f64> {
    let link_count = capacities.len();
    let mut residual = capacities.to_vec();
    let mut unfrozen = vec![0usize; link_count];
    let mut crossing: Vec<Vec<usize>> = vec![Vec::new(); link_count];
    for (i, f) in flows.iter().enumerate() {
        for l in f.path {
            unfrozen[l.0] += 1;
            crossing[l.0].push(i);
        }
    }
    let mut rates = vec![0.0; flows.len()];
    let mut frozen = vec![false; flows.len()];
    let mut remaining = flows.len();
    while remaining > 0 {
        let mut bottleneck = None;
        let mut share = f64::INFINITY;
        for l in 0..link_count {
            if unfrozen[l] > 0 {
                let s = residual[l].max(0.0) / unfrozen[l] as f64;
                if s < share {
                    share = s;
                    bottleneck = Some(l);
                }
            }
        }
        let Some(bottleneck) = bottleneck else { break };
        let share = snap(share);
        for idx in 0..crossing[bottleneck].len() {
            let i = crossing[bottleneck][idx];
            if frozen[i] {
                continue;
            }
            frozen[i] = true;
            remaining -= 1;
            rates[i] = share;
            for l in flows[i].path {
                residual[l.0] -= share;
                unfrozen[l.0] -= 1;
            }
        }
    }
    rates
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flow(id: FlowId, arrival: f64, remaining: f64, path: &[LinkId]) -> ActiveFlow<'_> {
        ActiveFlow {
            id,
            arrival_time: arrival,
            remaining,
            path,
        }
    }

    const L0: &[LinkId] = &[LinkId(0)];
    const L1: &[LinkId] = &[LinkId(1)];
    const L01: &[LinkId] = &[LinkId(0), LinkId(1)];

    #[test]
    fn mmf_symmetric_pair() {
        let flows = [flow(0, 0.0, 5.0, L0), flow(1, 0.0, 5.0, L0)];
        let a = allocate_with_capacities(SchedulingPolicy::Mmf, &flows, &[1.0]).unwrap();
        assert_eq!(a.rates, vec![(0, 0.5), (1, 0.5)]);
    }

    #[test]
    fn fcfs_strict_priority() {
        let flows = [flow(2, 1.0, 5.0, L0), flow(1, 0.0, 5.0, L0)];
        let a = allocate_with_capacities(SchedulingPolicy::Fcfs, &flows, &[1.0]).unwrap();
        assert_eq!(a.get(1), Some(1.0));
        assert_eq!(a.get(2), Some(0.0));
    }

    #[test]
    fn fcfs_ties_broken_by_flow_id() {
        let flows = [flow(5, 1.0, 5.0, L0), flow(4, 1.0, 9.0, L0)];
        let a = allocate_with_capacities(SchedulingPolicy::Fcfs, &flows, &[1.0]).unwrap();
        assert_eq!(a.get(4), Some(1.0));
        assert_eq!(a.get(5), Some(0.0));
    }

    #[test]
    fn srpt_shortest_first() {
        let flows = [flow(1, 0.0, 10.0, L0), flow(2, 1.0, 3.0, L0)];
        let a = allocate_with_capacities(SchedulingPolicy::Srpt, &flows, &[1.0]).unwrap();
        assert_eq!(a.get(2), Some(1.0));
        assert_eq!(a.get(1), Some(0.0));
    }

    #[test]
    fn mmf_asymmetric_three_flows() {
        // L0 cap 1 carries f1, f2; L1 cap 2 carries f1, f3.
        let flows = [
            flow(1, 0.0, 1.0, L01),
            flow(2, 0.0, 1.0, L0),
            flow(3, 0.0, 1.0, L1),
        ];
        let a = allocate_with_capacities(SchedulingPolicy::Mmf, &flows, &[1.0, 2.0]).unwrap();
        assert_eq!(a.rates, vec![(1, 0.5), (2, 0.5), (3, 1.5)]);
        assert_eq!(a.link_rates(&flows, 2), vec![1.0, 2.0]);
    }

    #[test]
    fn greedy_leaves_room_for_disjoint_flows() {
        // f1 takes L0 and L1; f2 on L1 is starved, f3 on an idle link is not.
        let l2: &[LinkId] = &[LinkId(2)];
        let flows = [flow(1, 0.0, 1.0, L01), flow(2, 1.0, 1.0, L1), flow(3, 2.0, 1.0, l2)];
        let a = allocate_with_capacities(SchedulingPolicy::Fcfs, &flows, &[1.0, 1.5, 1.0]).unwrap();
        assert_eq!(a.rates, vec![(1, 1.0), (2, 0.5), (3, 1.0)]);
    }

    #[test]
    fn rejects_bad_flows() {
        let empty: &[LinkId] = &[];
        assert_eq!(
            allocate_with_capacities(SchedulingPolicy::Mmf, &[flow(3, 0.0, 1.0, empty)], &[1.0])
                .unwrap_err(),
            SchedulingError::EmptyPath(3)
        );
        assert!(matches!(
            allocate_with_capacities(SchedulingPolicy::Fcfs, &[flow(3, 0.0, 0.0, L0)], &[1.0])
                .unwrap_err(),
            SchedulingError::NoRemainingBytes { flow: 3, .. }
        ));
        assert!(matches!(
            allocate_with_capacities(SchedulingPolicy::Fcfs, &[flow(3, 0.0, 1.0, L1)], &[1.0])
                .unwrap_err(),
            SchedulingError::UnknownLink { flow: 3, .. }
        ));
    }

    #[test]
    fn empty_flow_set() {
        for p in SchedulingPolicy::ALL {
            let a = allocate_with_capacities(p, &[], &[1.0]).unwrap();
            assert!(a.rates.is_empty());
        }
    }

    #[test]
    fn policy_names() {
        for p in SchedulingPolicy::ALL {
            assert_eq!(p.name().parse::<SchedulingPolicy>().unwrap(), p);
        }
        assert!("lifo".parse::<SchedulingPolicy>().is_err());
    }
}
