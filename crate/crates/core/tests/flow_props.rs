mod support;

use dctopo_core::bounds::{hetero_throughput_bound, homog_throughput_bound};
use dctopo_core::flow::*;
use dctopo_core::generators::*;
use dctopo_core::topology::{aspl, cut_capacity, total_capacity, PairSelector, Topology};
use dctopo_core::traffic::{all_to_all, random_permutation, TrafficMatrix};
use proptest::prelude::*;

fn instance(n: usize, r: usize, per: usize, seed: u64) -> (Topology, TrafficMatrix) {
    let t = with_servers(gen_rrg(n, r, seed).unwrap(), &vec![per; n], 1.0);
    let tm = random_permutation(&t, seed ^ 0x5eed).unwrap();
    (t, tm)
}

fn params() -> impl Strategy<Value = (usize, usize, usize, u64)> {
    (4usize..14, 2usize..6, 1usize..4, any::<u64>()).prop_filter("regular", |&(n, r, _, _)| r < n && (n * r) % 2 == 0)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-6 * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn formulations_agree((n, r, per, seed) in params(), access: bool) {
        let (t, tm) = instance(n, r, per, seed);
        let access = if access { AccessModel::Capacitated } else { AccessModel::Unconstrained };
        let ts: Vec<f64> = [Formulation::Explicit, Formulation::Compact, Formulation::Paths]
            .into_iter()
            .map(|formulation| max_concurrent_flow(&t, &tm, &FlowOptions { formulation, access, ..FlowOptions::default() }).unwrap().throughput)
            .collect();
        prop_assert!(close(ts[0], ts[1]) && close(ts[0], ts[2]), "{:?}", ts);
    }

    #[test]
    fn solutions_are_feasible((n, r, per, seed) in params(), formulation in prop_oneof![Just(Formulation::Compact), Just(Formulation::Paths), Just(Formulation::Explicit)]) {
        let (t, tm) = instance(n, r, per, seed);
        let s = max_concurrent_flow(&t, &tm, &FlowOptions { formulation, ..FlowOptions::unconstrained() }).unwrap();
        for (l, link) in t.links.iter().enumerate() {
            for dir in [false, true] {
                let f = s.arc_flow(l, dir);
                prop_assert!(f >= -1e-9 && f <= link.capacity + 1e-7);
            }
        }
        for (c, &x) in tm.commodities.iter().zip(&s.commodity_delivered) {
            prop_assert!(close(x, s.throughput * c.demand));
        }
        // aggregate conservation at every switch
        let pairs = tm.switch_pairs(&t).unwrap();
        let mut net = vec![0.0; n];
        for (c, &(a, b)) in tm.commodities.iter().zip(&pairs) {
            net[a] += c.demand * s.throughput;
            net[b] -= c.demand * s.throughput;
        }
        for (l, link) in t.links.iter().enumerate() {
            net[link.a] -= s.arc_flow(l, false) - s.arc_flow(l, true);
            net[link.b] -= s.arc_flow(l, true) - s.arc_flow(l, false);
        }
        prop_assert!(net.iter().all(|x| x.abs() < 1e-6), "{:?}", net);
    }

    #[test]
    fn doubling_capacity_doubles_throughput((n, r, per, seed) in params()) {
        let (t, tm) = instance(n, r, per, seed);
        let mut big = t.clone();
        big.links.iter_mut().for_each(|l| l.capacity *= 2.0);
        big.servers.iter_mut().for_each(|s| s.access_capacity *= 2.0);
        let opts = FlowOptions::default();
        let a = max_concurrent_flow(&t, &tm, &opts).unwrap().throughput;
        let b = max_concurrent_flow(&big, &tm, &opts).unwrap().throughput;
        prop_assert!(close(2.0 * a, b), "{} vs {}", a, b);
    }

    #[test]
    fn relabeling_and_reversal_keep_throughput((n, r, per, seed) in params(), offset in 1usize..100) {
        let (t, tm) = instance(n, r, per, seed);
        let opts = FlowOptions::unconstrained();
        let base = max_concurrent_flow(&t, &tm, &opts).unwrap().throughput;
        let rev = max_concurrent_flow(&t, &tm.reversed(), &opts).unwrap().throughput;
        prop_assert!(close(base, rev));
        // reverse the switch order and shift ids
        let f = |id: usize| offset + (n - 1 - id);
        let mut u = t.clone();
        u.switches.reverse();
        u.switches.iter_mut().for_each(|s| s.id = f(s.id));
        u.servers.iter_mut().for_each(|s| s.switch_id = f(s.switch_id));
        u.links.iter_mut().for_each(|l| { l.a = f(l.a); l.b = f(l.b); });
        let moved = max_concurrent_flow(&u, &tm, &opts).unwrap().throughput;
        prop_assert!(close(base, moved));
    }

    #[test]
    fn decomposition_identity_holds((n, r, per, seed) in params(), a2a: bool) {
        let (t, tm) = instance(n, r, per, seed);
        let tm = if a2a { all_to_all(&t, true).unwrap() } else { tm };
        let s = max_concurrent_flow(&t, &tm, &FlowOptions::unconstrained()).unwrap();
        let d = decompose(&t, &tm, &s).unwrap();
        prop_assert!(d.identity_residual <= 1e-6);
        prop_assert!(d.stretch >= 1.0 - 1e-6);
        prop_assert!(d.u <= 1.0 + 1e-9);
    }

    #[test]
    fn throughput_respects_homogeneous_bound((n, r, per, seed) in params()) {
        let (t, perm) = instance(n, r, per, seed);
        let opts = FlowOptions::unconstrained();
        // all-to-all flows see exactly the all-pairs mean distance
        let a2a = all_to_all(&t, true).unwrap();
        let s = max_concurrent_flow(&t, &a2a, &opts).unwrap();
        let f = a2a.total_demand();
        let d = aspl(&t, &PairSelector::AllPairs).unwrap();
        let universal = homog_throughput_bound(n as u64, r as u64, f, None).unwrap();
        let measured = homog_throughput_bound(n as u64, r as u64, f, Some(d)).unwrap();
        prop_assert!(s.throughput <= universal * (1.0 + 1e-6));
        prop_assert!(s.throughput <= measured * (1.0 + 1e-6));
        // a single permutation is bounded through its own flow distances
        let s = max_concurrent_flow(&t, &perm, &opts).unwrap();
        let dec = decompose(&t, &perm, &s).unwrap();
        let f = perm.total_demand();
        prop_assert!(s.throughput <= homog_throughput_bound(n as u64, r as u64, f, Some(dec.d_flows)).unwrap() * (1.0 + 1e-6));
        prop_assert!(close(total_capacity(&t), (n * r) as f64));
    }

    #[test]
    fn throughput_respects_heterogeneous_bound(x in 0.2f64..1.6, seed: u64) {
        let cfg = TwoClassConfig { n_large: 8, n_small: 16, ports_large: 10, ports_small: 5, total_servers: 60 };
        let counts = server_distribution_two_class(&cfg, 1.0).unwrap();
        let (p1, p2) = cluster_stub_counts(&cfg, &counts).unwrap();
        let (cross, _) = nearest_feasible_cross(p1, p2, x).unwrap();
        prop_assume!(cross > 0);
        let t = gen_two_cluster_with_cross(&cfg, &counts, cross, seed).unwrap();
        prop_assume!(t.is_connected());
        let tm = random_permutation(&t, seed).unwrap();
        let s = max_concurrent_flow(&t, &tm, &FlowOptions::unconstrained()).unwrap();
        let labels = t.cluster_of.clone().unwrap();
        let n1: usize = counts[..8].iter().sum();
        let n2: usize = counts[8..].iter().sum();
        let dec = decompose(&t, &tm, &s).unwrap();
        // the cut bound assumes the expected crossing count; use the realized one
        let pairs = tm.switch_pairs(&t).unwrap();
        let crossing = pairs.iter().filter(|(a, b)| labels[a] != labels[b]).count() as f64;
        let cbar = cut_capacity(&t, &labels).unwrap();
        prop_assert!(s.throughput <= cbar / crossing * (1.0 + 1e-6));
        let h = hetero_throughput_bound(total_capacity(&t), cbar, n1 as f64, n2 as f64, dec.d_flows).unwrap();
        prop_assert!(s.throughput <= h.path_bound * (1.0 + 1e-6));
    }
}
