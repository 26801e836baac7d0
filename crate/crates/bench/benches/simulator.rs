use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use wanroute_core::scheduling::allocate_with_capacities;
use wanroute_core::{
    load_topology_file, min_max_path, min_sum_path, run, ActiveFlow, DemandDistribution, LinkId,
    NodeId, ScenarioConfig, SchedulingPolicy, SelectionScheme, Topology,
};

fn wan50() -> Topology {
    load_topology_file(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/wan50.topo")).unwrap()
}

fn paths(c: &mut Criterion) {
    let t = wan50();
    let costs: Vec<f64> = (0..t.link_count()).map(|i| ((i * 37) % 11) as f64 + 0.5).collect();
    let last = NodeId(t.node_count() - 1);
    c.bench_function("min_sum_path wan50", |b| {
        b.iter(|| min_sum_path(&t, black_box(&costs), NodeId(0), last).unwrap())
    });
    c.bench_function("min_max_path wan50", |b| {
        b.iter(|| min_max_path(&t, black_box(&costs), NodeId(0), last).unwrap())
    });
}

fn allocation(c: &mut Criterion) {
    let links = 40;
    let capacities: Vec<f64> = (0..links).map(|i| 1.0 + (i % 3) as f64).collect();
    let routes: Vec<Vec<LinkId>> = (0..200)
        .map(|f| (0..4).map(|k| LinkId((f * 7 + k * 13) % links)).collect())
        .collect();
    let flows: Vec<ActiveFlow<'_>> = routes
        .iter()
        .enumerate()
        .map(|(id, path)| ActiveFlow { id, arrival_time: id as f64, remaining: 1.0 + id as f64, path })
        .collect();
    for policy in SchedulingPolicy::ALL {
        c.bench_function(&format!("allocate {} 200 flows", policy.name()), |b| {
            b.iter(|| allocate_with_capacities(policy, black_box(&flows), &capacities).unwrap())
        });
    }
}

fn short_run(c: &mut Criterion) {
    let topology = Arc::new(wan50());
    let mut group = c.benchmark_group("run wan50 2000 flows");
    group.sample_size(10);
    for scheme in [SelectionScheme::MinHop, SelectionScheme::MinSumLoadDemand] {
        let config = ScenarioConfig {
            topology: topology.clone(),
            capacity: Some(1.0),
            distribution: DemandDistribution::exponential(20.0, 500.0).unwrap(),
            distribution_label: "exp".into(),
            rate_lambda: 1.0,
            flow_count: 2000,
            scheme,
            policy: SchedulingPolicy::Mmf,
            seed: 1,
            warmup: 0,
        };
        group.bench_function(scheme.name(), |b| b.iter(|| run(black_box(&config)).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, paths, allocation, short_run);
criterion_main!(benches);
