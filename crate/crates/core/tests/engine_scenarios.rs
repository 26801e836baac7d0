mod support;

use support::{random_connected, Draw};
use wanroute_core::{
    generate_workload, run, simulate, ArrivalProcess, DemandDistribution, EventKind, FlowArrival,
    NodeId, ScenarioConfig, SchedulingPolicy, SelectionScheme, Simulation, Topology,
};

fn one_link() -> Topology {
    Topology::from_links(2, [(0, 1, 1.0)]).unwrap()
}

fn flow(id: usize, t: f64, demand: f64) -> FlowArrival {
    FlowArrival {
        flow_id: id,
        arrival_time: t,
        source: NodeId(0),
        destination: NodeId(1),
        demand,
    }
}

fn fcts(policy: SchedulingPolicy, arrivals: Vec<FlowArrival>) -> Vec<f64> {
    let mut done = simulate(&one_link(), SelectionScheme::MinHop, policy, arrivals).unwrap();
    done.sort_by_key(|f| f.flow_id);
    done.iter().map(|f| f.fct()).collect()
}

#[test]
fn golden_single_flow() {
    for scheme in SelectionScheme::ALL {
        for policy in SchedulingPolicy::ALL {
            let done = simulate(&one_link(), scheme, policy, vec![flow(0, 0.0, 20.0)]).unwrap();
            assert_eq!(done[0].fct(), 20.0);
        }
    }
}

#[test]
fn golden_two_flows() {
    let arrivals = vec![flow(0, 0.0, 4.0), flow(1, 1.0, 4.0)];
    assert_eq!(fcts(SchedulingPolicy::Mmf, arrivals.clone()), vec![7.0, 7.0]);
    assert_eq!(fcts(SchedulingPolicy::Fcfs, arrivals.clone()), vec![4.0, 7.0]);
    // f2 (remaining 4) never undercuts f1 (remaining 3) at t=1
    assert_eq!(fcts(SchedulingPolicy::Srpt, arrivals), vec![4.0, 7.0]);
}

#[test]
fn shared_rate_completion_time() {
    let arrivals = vec![flow(0, 0.0, 10.0), flow(1, 0.0, 10.0)];
    assert_eq!(fcts(SchedulingPolicy::Mmf, arrivals), vec![20.0, 20.0]);
}

#[test]
fn completions_precede_arrivals_at_equal_times() {
    let link = one_link();
    let mut sim = Simulation::new(
        &link,
        SelectionScheme::MinSumLoad,
        SchedulingPolicy::Fcfs,
        vec![flow(0, 0.0, 2.0), flow(1, 2.0, 1.0)],
    )
    .unwrap();
    let mut events = Vec::new();
    while let Some(e) = sim.step().unwrap() {
        events.push((e.kind, e.time, e.flow_id));
    }
    assert_eq!(
        events,
        vec![
            (EventKind::Arrival, 0.0, 0),
            (EventKind::Completion, 2.0, 0),
            (EventKind::Arrival, 2.0, 1),
            (EventKind::Completion, 3.0, 1),
        ]
    );
}

#[test]
fn starved_flow_waits_for_next_event() {
    let link = one_link();
    let mut sim = Simulation::new(
        &link,
        SelectionScheme::MinHop,
        SchedulingPolicy::Fcfs,
        vec![flow(0, 0.0, 10.0), flow(1, 0.5, 1.0), flow(2, 3.0, 1.0)],
    )
    .unwrap();
    sim.step().unwrap();
    let e = sim.step().unwrap().unwrap();
    assert_eq!((e.kind, e.flow_id), (EventKind::Arrival, 1));
    assert_eq!(sim.state().flow(1).unwrap().rate, 0.0);
    let e = sim.step().unwrap().unwrap();
    assert_eq!((e.kind, e.time, e.flow_id), (EventKind::Arrival, 3.0, 2));
}

fn fuzz_workload(seed: u64, flows: usize) -> (Topology, Vec<FlowArrival>) {
    let mut d = Draw::new(seed);
    let t = random_connected(&mut d, 12, 0.2, 0.5, 2.0);
    let dist = DemandDistribution::pareto(20.0, 2.0, 500.0).unwrap();
    let arrivals = generate_workload(&t, ArrivalProcess::new(1.0).unwrap(), &dist, flows, seed).unwrap();
    (t, arrivals)
}

#[test]
fn every_event_keeps_invariants_and_drains() {
    for (i, scheme) in SelectionScheme::ALL.into_iter().enumerate() {
        for policy in SchedulingPolicy::ALL {
            let (t, arrivals) = fuzz_workload(i as u64, 400);
            let total = arrivals.len();
            let mut sim = Simulation::new(&t, scheme, policy, arrivals.clone()).unwrap();
            let mut clock = 0.0;
            let mut active_after_arrivals = usize::MAX;
            while let Some(e) = sim.step().unwrap() {
                assert!(e.time >= clock);
                clock = e.time;
                sim.state().check_invariants(&t).unwrap();
                for (l, rate) in sim.state().link_rate().iter().enumerate() {
                    assert!(*rate <= t.links()[l].capacity + 1e-9);
                }
                for f in sim.state().flows() {
                    assert!(f.remaining > 0.0 && f.remaining <= f.demand);
                }
                if sim.pending() == 0 {
                    let active = sim.state().flows().len();
                    assert!(active <= active_after_arrivals, "active flows grew while draining");
                    active_after_arrivals = active;
                }
            }
            assert!(sim.is_done());
            let done = sim.completed();
            assert_eq!(done.len(), total);
            for f in done {
                let a = &arrivals[f.flow_id];
                assert_eq!((f.arrival_time, f.demand), (a.arrival_time, a.demand));
                assert!((f.bytes_sent - f.demand).abs() <= 1e-6 * f.demand, "{f:?}");
                let fastest = f.demand / f.bottleneck_capacity;
                assert!(f.fct() >= fastest * (1.0 - 1e-9), "{f:?}");
            }
        }
    }
}

#[test]
fn runs_are_deterministic() {
    let mut d = Draw::new(1);
    let t = std::sync::Arc::new(random_connected(&mut d, 10, 0.3, 1.0, 1.0));
    let config = ScenarioConfig {
        topology: t,
        capacity: Some(1.0),
        distribution: DemandDistribution::exponential(20.0, 500.0).unwrap(),
        distribution_label: "exp".into(),
        rate_lambda: 1.0,
        flow_count: 1500,
        scheme: SelectionScheme::MinSumLoadDemand,
        policy: SchedulingPolicy::Srpt,
        seed: 9,
        warmup: 100,
    };
    let a = run(&config).unwrap();
    assert_eq!(a, run(&config).unwrap());
    assert_eq!(a.flows, 1400);
    assert_eq!(a.flow_records[0].flow_id, 100);
    assert!(a.tfct >= a.mfct);
}
