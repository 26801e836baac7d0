//! Flow-level simulation of adaptive single-path routing over
//! inter-datacenter WANs.
//!
//! A run generates Poisson flow arrivals over a [`Topology`], routes each new
//! flow once with one of seven [`SelectionScheme`]s, shares link capacity
//! among active flows with a [`SchedulingPolicy`], and reports mean and tail
//! flow completion times plus total byte-hops.
//!
//! ```
//! use wanroute_core::{simulate, FlowArrival, NodeId, SchedulingPolicy, SelectionScheme, Topology};
//!
//! let wan = Topology::from_links(2, [(0, 1, 1.0)]).unwrap();
//! let flow = FlowArrival { flow_id: 0, arrival_time: 0.0, source: NodeId(0), destination: NodeId(1), demand: 20.0 };
//! let done = simulate(&wan, SelectionScheme::MinSumLoadDemand, SchedulingPolicy::Mmf, vec![flow]).unwrap();
//! assert_eq!(done[0].fct(), 20.0);
//! ```

pub mod engine;
pub mod metrics;
pub mod routing;
pub mod scheduling;
pub mod topology;
pub mod traffic;

pub use engine::{
    run, simulate, CompletedFlow, EngineError, Event, EventKind, FlowState, NetworkState,
    ScenarioConfig, Simulation,
};
pub use metrics::{
    comparison_matrix, compute_report, render_matrix, Bin, ComparisonCell, Metric, MetricsError,
    RunLabel, RunReport,
};
pub use routing::{
    link_cost, min_max_path, min_sum_path, select_path, LinkCostMetric, LinkState, Path,
    PathObjective, RoutingError, SelectionScheme,
};
pub use scheduling::{allocate, ActiveFlow, RateAllocation, SchedulingError, SchedulingPolicy};
pub use topology::{load_topology, load_topology_file, Link, LinkId, NodeId, Topology, TopologyError};
pub use traffic::{
    generate_workload, load_empirical_cdf, load_empirical_cdf_file, ArrivalProcess, CdfPoint,
    DemandDistribution, FlowArrival, FlowId, TrafficError,
};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Traffic(#[from] TrafficError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}
