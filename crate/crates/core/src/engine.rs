//! Event-driven flow-level simulation.
//!
//! The loop alternates between two kinds of events: a flow arrives (it is
//! routed against the current state, admitted, and rates are recomputed) or
//! a flow drains (it is removed and rates are recomputed). Between events
//! every active flow progresses at its allocated rate, and every link's load
//! drains at the sum of the rates crossing it.
//!
//! At equal timestamps completions go before arrivals, and simultaneous
//! completions go in ascending flow id.

use std::collections::VecDeque;
use std::sync::Arc;

use thiserror::Error;

use crate::metrics::{compute_report, RunLabel, RunReport};
use crate::routing::{select_path, Path, RoutingError, SelectionScheme};
use crate::scheduling::{allocate, ActiveFlow, SchedulingError, SchedulingPolicy, SATURATION_TOL};
use crate::topology::{LinkId, Topology};
use crate::traffic::{generate_workload, ArrivalProcess, DemandDistribution, FlowArrival, FlowId};

/// Flows with at most this many bytes left are complete.
pub const COMPLETION_SNAP: f64 = 1e-9;
/// Relative tolerance (with a one-byte floor) for incremental link loads.
pub const LOAD_TOL: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error(transparent)]
    Routing(#[from] RoutingError),
    #[error(transparent)]
    Scheduling(#[from] SchedulingError),
    #[error("deadlock at t={clock}: {active} active flows, no arrivals pending, all rates zero")]
    Deadlock { clock: f64, active: usize },
    #[error("arrivals out of order: flow {flow} arrives at {time} before t={previous}")]
    UnorderedArrivals { flow: FlowId, time: f64, previous: f64 },
    #[error("flow {flow} has invalid demand {demand}")]
    BadDemand { flow: FlowId, demand: f64 },
    #[error("invariant violated at t={clock}: {what}")]
    Invariant { clock: f64, what: String },
}

/// One in-flight flow.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub id: FlowId,
    pub arrival_time: f64,
    pub demand: f64,
    pub remaining: f64,
    pub rate: f64,
    pub path: Path,
    /// Bytes transmitted so far, integrated as rate × Δt.
    pub sent: f64,
}

/// Active flows plus per-link aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    clock: f64,
    /// Ordered by flow id.
    flows: Vec<FlowState>,
    link_load: Vec<f64>,
    link_rate: Vec<f64>,
}

impl NetworkState {
    pub fn new(link_count: usize) -> Self {
        Self {
            clock: 0.0,
            flows: Vec::new(),
            link_load: vec![0.0; link_count],
            link_rate: vec![0.0; link_count],
        }
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn flows(&self) -> &[FlowState] {
        &self.flows
    }

    pub fn flow(&self, id: FlowId) -> Option<&FlowState> {
        self.flows
            .binary_search_by_key(&id, |f| f.id)
            .ok()
            .map(|i| &self.flows[i])
    }

    /// Outstanding bytes per link, maintained incrementally.
    pub fn link_load(&self) -> &[f64] {
        &self.link_load
    }

    /// Allocated rate per link.
    pub fn link_rate(&self) -> &[f64] {
        &self.link_rate
    }

    /// Per-link load summed from scratch over the active flows.
    pub fn recomputed_link_load(&self) -> Vec<f64> {
        let mut load = vec![0.0; self.link_load.len()];
        for f in &self.flows {
            for l in &f.path.links {
                load[l.0] += f.remaining;
            }
        }
        load
    }

    /// Adds a flow with a fixed path and charges its demand to every link on it.
    pub fn admit(&mut self, flow: &FlowArrival, path: Path) {
        for l in &path.links {
            self.link_load[l.0] += flow.demand;
        }
        let state = FlowState {
            id: flow.flow_id,
            arrival_time: flow.arrival_time,
            demand: flow.demand,
            remaining: flow.demand,
            rate: 0.0,
            path,
            sent: 0.0,
        };
        let pos = self.flows.partition_point(|f| f.id < state.id);
        self.flows.insert(pos, state);
    }

    /// Moves the clock to `time`, draining flows and links at current rates.
    pub fn advance(&mut self, time: f64) {
        let dt = time - self.clock;
        if dt > 0.0 {
            for f in &mut self.flows {
                if f.rate > 0.0 {
                    let bytes = f.rate * dt;
                    f.remaining = (f.remaining - bytes).max(0.0);
                    f.sent += bytes;
                }
            }
            for (load, rate) in self.link_load.iter_mut().zip(&self.link_rate) {
                *load -= rate * dt;
            }
        }
        self.clock = self.clock.max(time);
    }

    fn remove(&mut self, index: usize) -> FlowState {
        let flow = self.flows.remove(index);
        for l in &flow.path.links {
            self.link_load[l.0] -= flow.remaining;
        }
        flow
    }

    /// Recomputes every rate under `policy`.
    pub fn reallocate(
        &mut self,
        policy: SchedulingPolicy,
        topology: &Topology,
    ) -> Result<(), SchedulingError> {
        let views: Vec<ActiveFlow<'_>> = self
            .flows
            .iter()
            .map(|f| ActiveFlow {
                id: f.id,
                arrival_time: f.arrival_time,
                remaining: f.remaining,
                path: &f.path.links,
            })
            .collect();
        let allocation = allocate(policy, &views, topology)?;
        let link_rate = allocation.link_rates(&views, topology.link_count());
        drop(views);
        for (f, (_, rate)) in self.flows.iter_mut().zip(allocation.rates) {
            f.rate = rate;
        }
        self.link_rate = link_rate;
        Ok(())
    }

    /// Load bookkeeping, capacity and per-flow byte invariants.
    pub fn check_invariants(&self, topology: &Topology) -> Result<(), EngineError> {
        let fail = |what: String| EngineError::Invariant {
            clock: self.clock,
            what,
        };
        for (l, (inc, rec)) in self
            .link_load
            .iter()
            .zip(self.recomputed_link_load())
            .enumerate()
        {
            if (inc - rec).abs() > LOAD_TOL * rec.abs().max(1.0) {
                return Err(fail(format!(
                    "{} load {inc} differs from recomputed {rec}",
                    LinkId(l)
                )));
            }
        }
        for (l, rate) in self.link_rate.iter().enumerate() {
            let cap = topology.capacity(LinkId(l));
            if *rate > cap + SATURATION_TOL {
                return Err(fail(format!("{} rate {rate} exceeds capacity {cap}", LinkId(l))));
            }
        }
        for f in &self.flows {
            if !(f.remaining >= 0.0 && f.remaining <= f.demand) {
                return Err(fail(format!(
                    "flow {} remaining {} outside [0, {}]",
                    f.id, f.remaining, f.demand
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Arrival,
    Completion,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub kind: EventKind,
    pub time: f64,
    pub flow_id: FlowId,
}

/// A drained flow.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletedFlow {
    pub flow_id: FlowId,
    pub arrival_time: f64,
    pub completion_time: f64,
    pub demand: f64,
    pub hop_count: usize,
    /// Smallest link capacity on the assigned path.
    pub bottleneck_capacity: f64,
    /// Integrated rate × Δt over the flow's lifetime.
    pub bytes_sent: f64,
}

impl CompletedFlow {
    pub fn fct(&self) -> f64 {
        self.completion_time - self.arrival_time
    }
}

/// One simulation run over a fixed arrival sequence.
#[derive(Debug)]
pub struct Simulation<'t> {
    topology: &'t Topology,
    scheme: SelectionScheme,
    policy: SchedulingPolicy,
    state: NetworkState,
    pending: VecDeque<FlowArrival>,
    completed: Vec<CompletedFlow>,
}

impl<'t> Simulation<'t> {
    pub fn new(
        topology: &'t Topology,
        scheme: SelectionScheme,
        policy: SchedulingPolicy,
        arrivals: Vec<FlowArrival>,
    ) -> Result<Self, EngineError> {
        let mut previous = 0.0f64;
        for a in &arrivals {
            if !(a.arrival_time >= previous) {
                return Err(EngineError::UnorderedArrivals {
                    flow: a.flow_id,
                    time: a.arrival_time,
                    previous,
                });
            }
            if !(a.demand > 0.0 && a.demand.is_finite()) {
                return Err(EngineError::BadDemand {
                    flow: a.flow_id,
                    demand: a.demand,
                });
            }
            previous = a.arrival_time;
        }
        Ok(Self {
            topology,
            scheme,
            policy,
            state: NetworkState::new(topology.link_count()),
            pending: arrivals.into(),
            completed: Vec::new(),
        })
    }

    pub fn state(&self) -> &NetworkState {
        &self.state
    }

    pub fn completed(&self) -> &[CompletedFlow] {
        &self.completed
    }

    pub fn pending(&self) -> usize {
        self.pending.len()
    }

    pub fn is_done(&self) -> bool {
        self.pending.is_empty() && self.state.flows.is_empty()
    }

    /// Processes the next event, or returns `None` once everything drained.
    pub fn step(&mut self) -> Result<Option<Event>, EngineError> {
        let event = self.next_event()?;
        if event.is_some() {
            #[cfg(debug_assertions)]
            self.state.check_invariants(self.topology)?;
        }
        Ok(event)
    }

    fn next_event(&mut self) -> Result<Option<Event>, EngineError> {
        // Leftovers of a simultaneous drain finish before anything else.
        if let Some(i) = self.first_drained() {
            return self.complete(i).map(Some);
        }

        let next_arrival = self.pending.front().map(|a| a.arrival_time);
        let next_completion = self
            .state
            .flows
            .iter()
            .enumerate()
            .filter(|(_, f)| f.rate > 0.0)
            .map(|(i, f)| (self.state.clock + f.remaining / f.rate, i))
            .min_by(|a, b| a.0.total_cmp(&b.0));

        match (next_completion, next_arrival) {
            (Some((t, i)), arrival) if arrival.is_none_or(|ta| t <= ta) => {
                self.state.advance(t);
                self.state.flows[i].remaining = 0.0;
                let i = self.first_drained().unwrap_or(i);
                self.complete(i).map(Some)
            }
            (_, Some(ta)) => {
                self.state.advance(ta);
                let arrival = self.pending.pop_front().expect("front exists");
                let path = select_path(self.scheme, self.topology, &self.state, &arrival)?;
                self.state.admit(&arrival, path);
                self.state.reallocate(self.policy, self.topology)?;
                Ok(Some(Event {
                    kind: EventKind::Arrival,
                    time: self.state.clock,
                    flow_id: arrival.flow_id,
                }))
            }
            (None, None) if self.state.flows.is_empty() => Ok(None),
            _ => Err(EngineError::Deadlock {
                clock: self.state.clock,
                active: self.state.flows.len(),
            }),
        }
    }

    /// Lowest-id active flow with nothing left to send.
    fn first_drained(&self) -> Option<usize> {
        self.state
            .flows
            .iter()
            .position(|f| f.remaining <= COMPLETION_SNAP)
    }

    fn complete(&mut self, index: usize) -> Result<Event, EngineError> {
        let flow = self.state.remove(index);
        let bottleneck_capacity = flow
            .path
            .links
            .iter()
            .map(|&l| self.topology.capacity(l))
            .fold(f64::INFINITY, f64::min);
        self.completed.push(CompletedFlow {
            flow_id: flow.id,
            arrival_time: flow.arrival_time,
            completion_time: self.state.clock,
            demand: flow.demand,
            hop_count: flow.path.hop_count(),
            bottleneck_capacity,
            bytes_sent: flow.sent,
        });
        // Other flows drained at this instant leave before rates are recomputed.
        if self.first_drained().is_none() {
            self.state.reallocate(self.policy, self.topology)?;
        }
        Ok(Event {
            kind: EventKind::Completion,
            time: self.state.clock,
            flow_id: flow.id,
        })
    }

    /// Runs until every flow has drained; returns completions in event order.
    pub fn run_to_completion(mut self) -> Result<Vec<CompletedFlow>, EngineError> {
        while self.step()?.is_some() {}
        Ok(self.completed)
    }
}

/// Simulates a fixed arrival sequence to completion.
pub fn simulate(
    topology: &Topology,
    scheme: SelectionScheme,
    policy: SchedulingPolicy,
    arrivals: Vec<FlowArrival>,
) -> Result<Vec<CompletedFlow>, EngineError> {
    Simulation::new(topology, scheme, policy, arrivals)?.run_to_completion()
}

/// One cell of an experiment.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub topology: Arc<Topology>,
    /// Replaces every link capacity when set.
    pub capacity: Option<f64>,
    pub distribution: DemandDistribution,
    /// Name of the distribution in reports.
    pub distribution_label: String,
    pub rate_lambda: f64,
    pub flow_count: usize,
    pub scheme: SelectionScheme,
    pub policy: SchedulingPolicy,
    pub seed: u64,
    /// Leading flows (by id) left out of the statistics.
    pub warmup: usize,
}

/// Generates the workload for `config`, simulates it and summarizes it.
pub fn run(config: &ScenarioConfig) -> Result<RunReport, crate::Error> {
    let overridden;
    let topology: &Topology = match config.capacity {
        Some(c) => {
            overridden = config.topology.with_uniform_capacity(c)?;
            &overridden
        }
        None => &config.topology,
    };
    let process = ArrivalProcess::new(config.rate_lambda)?;
    let arrivals = generate_workload(
        topology,
        process,
        &config.distribution,
        config.flow_count,
        config.seed,
    )?;
    let completed = simulate(topology, config.scheme, config.policy, arrivals)?;
    let label = RunLabel {
        scheme: config.scheme.name().to_string(),
        policy: config.policy.name().to_string(),
        distribution: config.distribution_label.clone(),
        seed: config.seed,
    };
    Ok(compute_report(label, completed, config.warmup)?)
}
