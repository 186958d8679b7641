//! Exact path-based LP for the maximum concurrent flow on tiny instances.
//!
//! Every simple switch path of every commodity gets a variable; the LP is
//! solved over the rationals with a dense tableau and Bland's rule, so no
//! code is shared with the production engine.

use std::collections::BTreeMap;

use dctopo_core::topology::{Link, ServerAttachment, SwitchSpec, Topology};
use dctopo_core::traffic::{Aggregation, Commodity, TrafficMatrix};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Q = BigRational;

fn q(x: f64) -> Q {
    Q::from_float(x).expect("finite value")
}

/// Directed arc sequences of all simple paths from `src` to `dst`.
fn simple_paths(n: usize, links: &[Link], index: &BTreeMap<usize, usize>, src: usize, dst: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (l, link) in links.iter().enumerate() {
        let (a, b) = (index[&link.a], index[&link.b]);
        out[a].push((2 * l, b));
        out[b].push((2 * l + 1, a));
    }
    let mut paths = Vec::new();
    let mut on_path = vec![false; n];
    let mut arcs = Vec::new();
    fn walk(
        u: usize,
        dst: usize,
        out: &[Vec<(usize, usize)>],
        on_path: &mut [bool],
        arcs: &mut Vec<usize>,
        paths: &mut Vec<Vec<usize>>,
    ) {
        if u == dst {
            paths.push(arcs.clone());
            return;
        }
        on_path[u] = true;
        for &(arc, v) in &out[u] {
            if !on_path[v] {
                arcs.push(arc);
                walk(v, dst, out, on_path, arcs, paths);
                arcs.pop();
            }
        }
        on_path[u] = false;
    }
    walk(src, dst, &out, &mut on_path, &mut arcs, &mut paths);
    paths
}

/// Maximizes `c x` subject to `a x <= b`, `x >= 0`, with `b >= 0`.
/// Returns `None` when the objective is unbounded.
fn simplex_max(a: Vec<Vec<Q>>, b: Vec<Q>, c: Vec<Q>) -> Option<Q> {
    let m = a.len();
    let n = c.len();
    let width = n + m;
    let mut tab: Vec<Vec<Q>> = a
        .into_iter()
        .enumerate()
        .map(|(i, mut row)| {
            row.resize(width, Q::zero());
            row[n + i] = Q::one();
            row
        })
        .collect();
    let mut rhs = b;
    let mut basic: Vec<usize> = (n..width).collect();
    let mut reduced: Vec<Q> = c;
    reduced.resize(width, Q::zero());
    let mut value = Q::zero();
    loop {
        let Some(enter) = (0..width).find(|&j| reduced[j].is_positive()) else {
            return Some(value);
        };
        let mut leave: Option<usize> = None;
        for i in 0..m {
            if !tab[i][enter].is_positive() {
                continue;
            }
            let better = match leave {
                None => true,
                Some(l) => {
                    let lhs = &rhs[i] * &tab[l][enter];
                    let rhs_l = &rhs[l] * &tab[i][enter];
                    lhs < rhs_l || (lhs == rhs_l && basic[i] < basic[l])
                }
            };
            if better {
                leave = Some(i);
            }
        }
        let r = leave?;
        let piv = tab[r][enter].clone();
        for v in tab[r].iter_mut() {
            *v /= &piv;
        }
        rhs[r] /= &piv;
        let prow = tab[r].clone();
        let prhs = rhs[r].clone();
        for i in 0..m {
            if i != r && !tab[i][enter].is_zero() {
                let f = tab[i][enter].clone();
                for (v, p) in tab[i].iter_mut().zip(&prow) {
                    if !p.is_zero() {
                        *v -= &f * p;
                    }
                }
                rhs[i] -= &f * &prhs;
            }
        }
        let f = reduced[enter].clone();
        for (v, p) in reduced.iter_mut().zip(&prow) {
            if !p.is_zero() {
                *v -= &f * p;
            }
        }
        value += &f * &prhs;
        basic[r] = enter;
    }
}

/// Concurrent throughput by the all-simple-paths LP. With `access`, every
/// server's outgoing and incoming demand scaled by `t` must fit its access
/// capacity. `None` means unbounded.
pub fn path_lp_throughput(t: &Topology, tm: &TrafficMatrix, access: bool) -> Option<f64> {
    let index = t.index_of();
    let host: BTreeMap<usize, usize> = t.servers.iter().map(|s| (s.server_id, s.switch_id)).collect();
    let endpoint = |e: usize| match tm.aggregation {
        Aggregation::Server => index[&host[&e]],
        Aggregation::Switch => index[&e],
    };
    let n = t.switches.len();
    let mut path_of: Vec<(usize, Vec<usize>)> = Vec::new();
    for (i, c) in tm.commodities.iter().enumerate() {
        for p in simple_paths(n, &t.links, &index, endpoint(c.src), endpoint(c.dst)) {
            path_of.push((i, p));
        }
    }
    let nx = path_of.len();
    let tv = nx;
    let nv = nx + 1;
    let mut a: Vec<Vec<Q>> = Vec::new();
    let mut b: Vec<Q> = Vec::new();
    // delivery rows as two inequalities: d t - sum x = 0
    for (i, c) in tm.commodities.iter().enumerate() {
        let mut row = vec![Q::zero(); nv];
        for (j, (k, _)) in path_of.iter().enumerate() {
            if *k == i {
                row[j] = Q::one();
            }
        }
        row[tv] = -q(c.demand);
        let neg: Vec<Q> = row.iter().map(|v| -v.clone()).collect();
        a.push(row);
        b.push(Q::zero());
        a.push(neg);
        b.push(Q::zero());
    }
    for (l, link) in t.links.iter().enumerate() {
        for arc in [2 * l, 2 * l + 1] {
            let mut row = vec![Q::zero(); nv];
            for (j, (_, p)) in path_of.iter().enumerate() {
                if p.contains(&arc) {
                    row[j] = Q::one();
                }
            }
            a.push(row);
            b.push(q(link.capacity));
        }
    }
    if access {
        let mut cap: BTreeMap<usize, f64> = BTreeMap::new();
        for s in &t.servers {
            let key = match tm.aggregation {
                Aggregation::Server => s.server_id,
                Aggregation::Switch => s.switch_id,
            };
            *cap.entry(key).or_insert(0.0) += s.access_capacity;
        }
        let mut out: BTreeMap<usize, f64> = BTreeMap::new();
        let mut inn: BTreeMap<usize, f64> = BTreeMap::new();
        for c in &tm.commodities {
            *out.entry(c.src).or_insert(0.0) += c.demand;
            *inn.entry(c.dst).or_insert(0.0) += c.demand;
        }
        for (e, d) in out.into_iter().chain(inn) {
            let mut row = vec![Q::zero(); nv];
            row[tv] = q(d);
            a.push(row);
            b.push(q(cap.get(&e).copied().unwrap_or(0.0)));
        }
    }
    let mut c = vec![Q::zero(); nv];
    c[tv] = Q::one();
    simplex_max(a, b, c).map(|v| v.to_f64().expect("representable"))
}

/// A connected topology with at most 5 switches and at most 6 servers, and a
/// random server-level traffic matrix over it.
pub fn random_instance(seed: u64) -> (Topology, TrafficMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=5usize);
    let mut links = Vec::new();
    let mut present = std::collections::BTreeSet::new();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    for i in 1..n {
        let j = order[rng.random_range(0..i)];
        let (a, b) = (order[i].min(j), order[i].max(j));
        present.insert((a, b));
    }
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(0.4) {
                present.insert((a, b));
            }
        }
    }
    for (a, b) in present {
        links.push(Link { a, b, capacity: rng.random_range(1..=3) as f64 });
    }
    let s = rng.random_range(2..=6usize);
    let servers: Vec<ServerAttachment> = (0..s)
        .map(|i| ServerAttachment {
            server_id: i,
            switch_id: rng.random_range(0..n),
            access_capacity: rng.random_range(1..=2) as f64,
        })
        .collect();
    let mut pairs: Vec<(usize, usize)> = (0..s).flat_map(|a| (0..s).filter(move |&b| b != a).map(move |b| (a, b))).collect();
    pairs.shuffle(&mut rng);
    let k = rng.random_range(1..=pairs.len().min(8));
    let mut commodities: Vec<Commodity> = pairs[..k]
        .iter()
        .map(|&(a, b)| Commodity { src: a, dst: b, demand: rng.random_range(1..=2) as f64 })
        .collect();
    commodities.sort_by_key(|c| (c.src, c.dst));
    let ports: Vec<usize> = (0..n)
        .map(|i| {
            servers.iter().filter(|x| x.switch_id == i).count()
                + links.iter().filter(|l: &&Link| l.a == i || l.b == i).count()
        })
        .collect();
    let t = Topology {
        switches: (0..n).map(|i| SwitchSpec::uniform(i, 1.0, ports[i].max(1))).collect(),
        servers,
        links,
        cluster_of: None,
    };
    (t, TrafficMatrix { aggregation: Aggregation::Server, commodities })
}
