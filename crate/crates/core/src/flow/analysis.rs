use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::topology::{bfs_distances, total_capacity, Link, Topology};
use crate::traffic::TrafficMatrix;
use crate::CoreError;

use super::FlowSolution;

/// Throughput split as `t f = C U / (D AS)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub c: f64,
    pub u: f64,
    /// Demand-weighted mean switch distance between commodity endpoints.
    pub d_flows: f64,
    pub stretch: f64,
    pub t: f64,
    pub f_effective: f64,
    pub identity_residual: f64,
}

pub fn decompose(t: &Topology, tm: &TrafficMatrix, s: &FlowSolution) -> Result<DecompositionReport, CoreError> {
    if !(s.throughput > 0.0) {
        return Err(CoreError::DegenerateDecomposition);
    }
    let index = t.index_of();
    let adj = t.adjacency();
    let pairs = tm.switch_pairs(t)?;
    let mut dist_from: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut weighted = 0.0;
    for (c, &(a, b)) in tm.commodities.iter().zip(&pairs) {
        let (ia, ib) = (index[&a], index[&b]);
        let d = dist_from.entry(ia).or_insert_with(|| bfs_distances(&adj, ia))[ib];
        if d == usize::MAX {
            return Err(CoreError::UnreachablePair(a, b));
        }
        weighted += c.demand * d as f64;
    }
    let f_effective = tm.total_demand();
    let d_flows = weighted / f_effective;
    if !(d_flows > 0.0) {
        return Err(CoreError::DegenerateDecomposition);
    }
    let c = total_capacity(t);
    let volume: f64 = s.edge_flow.iter().sum();
    let delivered: f64 = s.commodity_delivered.iter().sum();
    let u = volume / c;
    let stretch = volume / delivered / d_flows;
    let identity_residual = (s.throughput * f_effective * d_flows * stretch - c * u).abs() / (c * u);
    Ok(DecompositionReport { c, u, d_flows, stretch, t: s.throughput, f_effective, identity_residual })
}

/// Mean utilization over directed links, grouped by `class_fn`.
pub fn utilization_by_class<K: Ord>(t: &Topology, s: &FlowSolution, class_fn: impl Fn(&Link) -> K) -> BTreeMap<K, f64> {
    let mut acc: BTreeMap<K, (f64, usize)> = BTreeMap::new();
    for (l, link) in t.links.iter().enumerate() {
        let e = acc.entry(class_fn(link)).or_insert((0.0, 0));
        for dir in [false, true] {
            e.0 += s.arc_flow(l, dir) / link.capacity;
            e.1 += 1;
        }
    }
    acc.into_iter().map(|(k, (sum, n))| (k, sum / n as f64)).collect()
}
