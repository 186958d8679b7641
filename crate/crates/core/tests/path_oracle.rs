mod support;

use dctopo_core::flow::{max_concurrent_flow, AccessModel, FlowOptions, Formulation};
use dctopo_core::CoreError;
use support::oracle::{path_lp_throughput, random_instance};

fn check(seed: u64, access: AccessModel) {
    let (t, tm) = random_instance(seed);
    let exact = path_lp_throughput(&t, &tm, access == AccessModel::Capacitated);
    for formulation in [Formulation::Explicit, Formulation::Compact, Formulation::Paths] {
        let opts = FlowOptions { formulation, access, ..FlowOptions::default() };
        match (max_concurrent_flow(&t, &tm, &opts), exact) {
            (Ok(s), Some(e)) => assert!(
                (s.throughput - e).abs() <= 1e-6 * e.max(1.0),
                "seed {seed} {formulation:?} {access:?}: {} vs exact {e}",
                s.throughput
            ),
            (Err(CoreError::Solver(_)), None) => {}
            (got, e) => panic!("seed {seed} {formulation:?} {access:?}: {got:?} vs exact {e:?}"),
        }
    }
}

#[test]
fn edge_lp_matches_all_paths_lp_with_access_links() {
    for seed in 0..60 {
        check(seed, AccessModel::Capacitated);
    }
}

#[test]
fn edge_lp_matches_all_paths_lp_without_access_links() {
    for seed in 100..160 {
        check(seed, AccessModel::Unconstrained);
    }
}
