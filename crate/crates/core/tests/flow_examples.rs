mod support;

use dctopo_core::flow::*;
use dctopo_core::generators::{gen_rewired_vl2, gen_rrg, gen_vl2_with_tors, with_servers, RewiredVl2Config};
use dctopo_core::topology::{Link, ServerAttachment, SwitchSpec, Topology};
use dctopo_core::traffic::{random_permutation, Aggregation, Commodity, TrafficMatrix};
use dctopo_core::CoreError;

fn cyclic(n: usize) -> TrafficMatrix {
    TrafficMatrix {
        aggregation: Aggregation::Server,
        commodities: (0..n).map(|i| Commodity { src: i, dst: (i + 1) % n, demand: 1.0 }).collect(),
    }
}

fn explicit() -> FlowOptions {
    FlowOptions { formulation: Formulation::Explicit, ..FlowOptions::default() }
}

#[test]
fn four_cycle_model_size() {
    let t = support::ring(4, 1);
    let m = formulate(&t, &cyclic(4), &explicit()).unwrap();
    assert_eq!(m.problem.num_vars(), 4 * (8 + 8) + 1);
    assert_eq!(m.num_commodities(), 4);
    let mut text = Vec::new();
    dctopo_lp::write_lp(&m.problem, &mut text).unwrap();
    let text = String::from_utf8(text).unwrap();
    assert!(text.contains("f_c0_e0") && text.contains("f_c3_e15"));
    assert!(text.contains(" t"));
}

#[test]
fn four_cycle_throughput_and_decomposition() {
    let t = support::ring(4, 1);
    for formulation in [Formulation::Explicit, Formulation::Compact, Formulation::Paths] {
        let opts = FlowOptions { formulation, min_total_flow: true, ..FlowOptions::default() };
        let s = max_concurrent_flow(&t, &cyclic(4), &opts).unwrap();
        assert!((s.throughput - 1.0).abs() < 1e-9);
        let d = decompose(&t, &cyclic(4), &s).unwrap();
        assert!((d.c - 8.0).abs() < 1e-12);
        assert!((d.u - 0.5).abs() < 1e-6);
        assert!((d.d_flows - 1.0).abs() < 1e-12);
        assert!((d.stretch - 1.0).abs() < 1e-6);
        assert!(d.identity_residual <= 1e-6);
        assert!(s.commodity_delivered.iter().all(|&x| (x - 1.0).abs() < 1e-9));
    }
}

#[test]
fn complete_graph_permutation_is_full() {
    let n = 7;
    let links = (0..n).flat_map(|a| (a + 1..n).map(move |b| Link { a, b, capacity: 1.0 })).collect();
    let t = Topology {
        switches: (0..n).map(|i| SwitchSpec::uniform(i, 1.0, n)).collect(),
        servers: (0..n).map(|i| ServerAttachment { server_id: i, switch_id: i, access_capacity: 1.0 }).collect(),
        links,
        cluster_of: None,
    };
    for seed in 0..5 {
        let tm = random_permutation(&t, seed).unwrap();
        let s = max_concurrent_flow(&t, &tm, &FlowOptions::default()).unwrap();
        assert!((s.throughput - 1.0).abs() < 1e-9);
    }
}

#[test]
fn two_flows_share_one_link() {
    let t = Topology {
        switches: vec![SwitchSpec::uniform(0, 1.0, 3), SwitchSpec::uniform(1, 1.0, 3)],
        servers: (0..4).map(|i| ServerAttachment { server_id: i, switch_id: i / 2, access_capacity: 1.0 }).collect(),
        links: vec![Link { a: 0, b: 1, capacity: 1.0 }],
        cluster_of: None,
    };
    let tm = TrafficMatrix {
        aggregation: Aggregation::Server,
        commodities: vec![
            Commodity { src: 0, dst: 2, demand: 1.0 },
            Commodity { src: 1, dst: 3, demand: 1.0 },
            Commodity { src: 2, dst: 0, demand: 1.0 },
            Commodity { src: 3, dst: 1, demand: 1.0 },
        ],
    };
    for formulation in [Formulation::Explicit, Formulation::Compact, Formulation::Paths] {
        let s = max_concurrent_flow(&t, &tm, &FlowOptions { formulation, ..FlowOptions::default() }).unwrap();
        assert!((s.throughput - 0.5).abs() < 1e-9);
        assert!((s.arc_flow(0, false) - 1.0).abs() < 1e-9);
    }
}

#[test]
fn model_errors() {
    let t = support::ring(4, 1);
    let empty = TrafficMatrix { aggregation: Aggregation::Server, commodities: vec![] };
    assert!(matches!(formulate(&t, &empty, &explicit()), Err(CoreError::NoCommodities)));
    assert!(matches!(max_concurrent_flow(&t, &empty, &FlowOptions::default()), Err(CoreError::NoCommodities)));
    let mut split = support::ring(4, 1);
    split.links = vec![Link { a: 0, b: 1, capacity: 1.0 }, Link { a: 2, b: 3, capacity: 1.0 }];
    for formulation in [Formulation::Explicit, Formulation::Compact, Formulation::Paths] {
        let r = max_concurrent_flow(&split, &cyclic(4), &FlowOptions { formulation, ..FlowOptions::default() });
        assert!(matches!(r, Err(CoreError::InfeasibleCommodity { src: 1, dst: 2 })), "{r:?}");
    }
}

#[test]
fn same_switch_commodities_only_use_access() {
    let t = support::ring(3, 2);
    let tm = TrafficMatrix {
        aggregation: Aggregation::Server,
        commodities: vec![Commodity { src: 0, dst: 1, demand: 2.0 }, Commodity { src: 2, dst: 4, demand: 1.0 }],
    };
    for formulation in [Formulation::Explicit, Formulation::Compact, Formulation::Paths] {
        let s = max_concurrent_flow(&t, &tm, &FlowOptions { formulation, ..FlowOptions::default() }).unwrap();
        assert!((s.throughput - 0.5).abs() < 1e-9);
    }
}

#[test]
fn utilization_classes() {
    let t = support::ring(4, 1);
    let s = max_concurrent_flow(&t, &cyclic(4), &FlowOptions { min_total_flow: true, ..FlowOptions::default() }).unwrap();
    let by_class = utilization_by_class(&t, &s, |_| ());
    let d = decompose(&t, &cyclic(4), &s).unwrap();
    assert!((by_class[&()] - d.u).abs() < 1e-12);
    let zero = FlowSolution { throughput: 0.0, edge_flow: vec![0.0; 8], commodity_delivered: vec![0.0; 4], iterations: 0 };
    let by_link = utilization_by_class(&t, &zero, |l| l.a);
    assert!(by_link.values().all(|&u| u == 0.0));
    assert!(matches!(decompose(&t, &cyclic(4), &zero), Err(CoreError::DegenerateDecomposition)));
}

#[test]
fn optimal_flows_on_shortest_paths_have_unit_stretch() {
    // all-to-all on K_5 must use direct links only
    let t = gen_rrg(5, 4, 1).unwrap();
    let t = with_servers(t, &[1; 5], 1.0);
    let tm = dctopo_core::traffic::all_to_all(&t, false).unwrap();
    let s = max_concurrent_flow(&t, &tm, &FlowOptions::unconstrained()).unwrap();
    assert!((s.throughput - 1.0).abs() < 1e-9);
    let d = decompose(&t, &tm, &s).unwrap();
    assert!((d.stretch - 1.0).abs() < 1e-9);
}

fn vl2_builder(tors: u64, seed: u64) -> Result<(Topology, TrafficMatrix), CoreError> {
    let t = gen_vl2_with_tors(4, 4, tors as usize)?;
    let tm = random_permutation(&t, seed)?;
    Ok((t, tm))
}

#[test]
fn vl2_supports_its_tor_count() {
    let opts = FlowOptions::default();
    assert_eq!(max_supported_load(vl2_builder, 5, 1e-4, (2, 6), 1, &opts).unwrap(), 4);
    assert_eq!(max_supported_load(vl2_builder, 2, 1e-4, (4, 4), 1, &opts).unwrap(), 4);
    assert!(matches!(max_supported_load(vl2_builder, 2, 1e-4, (5, 5), 1, &opts), Err(CoreError::BracketError(5))));
    let rewired = |tors: u64, seed: u64| -> Result<(Topology, TrafficMatrix), CoreError> {
        let t = gen_rewired_vl2(&RewiredVl2Config::new(4, 4, tors as usize), seed)?;
        let tm = random_permutation(&t, seed)?;
        Ok((t, tm))
    };
    assert!(max_supported_load(rewired, 5, 1e-4, (2, 8), 1, &opts).unwrap() >= 4);
}
