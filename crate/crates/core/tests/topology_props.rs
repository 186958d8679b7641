mod support;

use std::collections::BTreeMap;

use dctopo_core::bounds::{aspl_lower_bound, aspl_lower_bound_exact};
use dctopo_core::generators::gen_rrg;
use dctopo_core::topology::{aspl, cut_capacity, total_capacity, validate, PairSelector, Topology};
use proptest::prelude::*;

fn relabel(t: &Topology, offset: usize, stride: usize) -> Topology {
    let f = |id: usize| offset + stride * id;
    let mut r = t.clone();
    for s in &mut r.switches {
        s.id = f(s.id);
    }
    for s in &mut r.servers {
        s.switch_id = f(s.switch_id);
    }
    for l in &mut r.links {
        l.a = f(l.a);
        l.b = f(l.b);
    }
    r
}

#[test]
fn petersen_aspl_is_five_thirds() {
    let t = support::petersen();
    assert!(validate(&t).ok);
    assert!((aspl(&t, &PairSelector::AllPairs).unwrap() - 5.0 / 3.0).abs() < 1e-12);
    // the Petersen graph meets d*(10, 3)
    assert_eq!(aspl_lower_bound_exact(10, 3).unwrap(), (5, 3));
}

#[test]
fn pair_selection_counts_same_switch_as_zero() {
    let t = support::ring(4, 1);
    let d = aspl(&t, &PairSelector::Pairs(vec![(0, 0), (0, 2), (1, 2)])).unwrap();
    assert!((d - 1.0).abs() < 1e-12);
    assert_eq!(aspl(&t, &PairSelector::Pairs(vec![])).unwrap(), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn capacity_is_label_free(n in 5usize..14, r in 2usize..5, seed: u64, offset in 0usize..50, stride in 1usize..4) {
        prop_assume!(r < n && (n * r) % 2 == 0);
        let t = gen_rrg(n, r, seed).unwrap();
        let u = relabel(&t, offset, stride);
        prop_assert_eq!(total_capacity(&t), total_capacity(&u));
        let d1 = aspl(&t, &PairSelector::AllPairs).unwrap();
        let d2 = aspl(&u, &PairSelector::AllPairs).unwrap();
        prop_assert!((d1 - d2).abs() < 1e-12);
    }

    #[test]
    fn cut_plus_twice_intra_is_total(n in 4usize..14, r in 2usize..5, seed: u64, labels: u64) {
        prop_assume!(r < n && (n * r) % 2 == 0);
        let t = gen_rrg(n, r, seed).unwrap();
        let clusters: BTreeMap<usize, u8> = (0..n).map(|i| (i, ((labels >> (i % 64)) & 1) as u8)).collect();
        let cut = cut_capacity(&t, &clusters).unwrap();
        let intra: f64 = t.links.iter().filter(|l| clusters[&l.a] == clusters[&l.b]).map(|l| l.capacity).sum();
        prop_assert!((cut + 2.0 * intra - total_capacity(&t)).abs() < 1e-9);
        prop_assert!(cut <= total_capacity(&t));
    }

    #[test]
    fn regular_graphs_respect_d_star(n in 4usize..60, r in 2usize..8, seed: u64) {
        prop_assume!(r < n && (n * r) % 2 == 0);
        let t = gen_rrg(n, r, seed).unwrap();
        let d = aspl(&t, &PairSelector::AllPairs).unwrap();
        prop_assert!(d >= aspl_lower_bound(n as u64, r as u64).unwrap() - 1e-9);
    }
}
