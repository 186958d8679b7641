use dctopo_core::bounds::{aspl_lower_bound, aspl_lower_bound_exact, drop_threshold, hetero_throughput_bound};
use proptest::prelude::*;

#[test]
fn steps_for_degree_four() {
    // full levels of the degree-4 tree end at these sizes
    let boundaries = [5u64, 17, 53, 161, 485];
    let slope = |n: u64| aspl_lower_bound(n + 1, 4).unwrap() - aspl_lower_bound(n, 4).unwrap();
    for w in boundaries.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        // inside a level the increments shrink smoothly; a new level makes them jump
        assert!(slope(hi) > slope(hi - 1) * 1.2, "no step at N = {hi}");
        assert!(slope(lo + 2) < slope(lo + 1) + 1e-12);
    }
    assert_eq!(aspl_lower_bound_exact(5, 4).unwrap(), (1, 1));
    assert_eq!(aspl_lower_bound_exact(17, 4).unwrap(), (7, 4));
}

proptest! {
    #[test]
    fn d_star_monotone(n in 3u64..400, r in 2u64..30) {
        prop_assume!(r + 1 < n);
        let d = aspl_lower_bound(n, r).unwrap();
        prop_assert!(aspl_lower_bound(n, r + 1).unwrap() <= d + 1e-12);
        prop_assert!(aspl_lower_bound(n + 1, r).unwrap() >= d - 1e-12);
        prop_assert!(d >= 1.0);
    }

    #[test]
    fn hetero_min_is_smaller_bound(c in 1.0f64..1e4, frac in 0.0f64..1.0, n1 in 1.0f64..500.0, n2 in 1.0f64..500.0, d in 1.0f64..6.0) {
        let h = hetero_throughput_bound(c, c * frac, n1, n2, d).unwrap();
        prop_assert_eq!(h.min, h.path_bound.min(h.cut_bound));
        prop_assert!(h.min.is_finite() && h.min >= 0.0);
        // drop_threshold inverts the cut bound
        let star = drop_threshold(h.cut_bound, n1, n2);
        prop_assert!((star - c * frac).abs() <= 1e-9 * c.max(1.0));
    }
}
