//! Column generation over paths.
//!
//! The restricted master keeps a few paths per switch pair; shortest paths
//! under the current arc prices add any path that improves the objective.
//! When none does, the restricted optimum is optimal for the full path LP,
//! which has the same optimum as the arc formulations.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};
use std::time::Instant;

use dctopo_lp::{solve as lp_solve, Basis, Problem, Sense, SolveOptions, Solution, Var};
use log::debug;

use crate::topology::Topology;
use crate::traffic::TrafficMatrix;
use crate::CoreError;

use super::{check_status, model, FlowOptions, FlowSolution, HOLD_FRACTION};

const PRICE_TOL: f64 = 1e-8;
const MAX_ROUNDS: usize = 100_000;
/// Fewest-hop paths per switch pair in the first master.
const INITIAL_PATHS: usize = 4;

struct Graph {
    nodes: usize,
    arcs: Vec<(usize, usize)>,
    cap: Vec<f64>,
    out: Vec<Vec<usize>>,
}

struct Column {
    pair: usize,
    arcs: Vec<usize>,
}

#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

/// Distances and predecessor arcs from `src` under nonnegative arc weights.
fn dijkstra(g: &Graph, w: &[f64], src: usize) -> (Vec<f64>, Vec<usize>) {
    let mut dist = vec![f64::INFINITY; g.nodes];
    let mut pred = vec![model::NO_ARC; g.nodes];
    dist[src] = 0.0;
    let mut heap = BinaryHeap::from([Item(0.0, src)]);
    while let Some(Item(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &a in &g.out[u] {
            let v = g.arcs[a].1;
            let nd = d + w[a];
            if nd < dist[v] {
                dist[v] = nd;
                pred[v] = a;
                heap.push(Item(nd, v));
            }
        }
    }
    (dist, pred)
}

fn hop_distances(g: &Graph, src: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; g.nodes];
    dist[src] = 0;
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        for &a in &g.out[u] {
            let v = g.arcs[a].1;
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Up to `cap` fewest-hop paths from `src` to `dst`, in arc order.
fn shortest_paths(g: &Graph, dist: &[usize], src: usize, dst: usize, cap: usize) -> Vec<Vec<usize>> {
    // walk back from dst over arcs that lose one hop
    let mut out = Vec::new();
    let mut stack: Vec<(usize, Vec<usize>)> = vec![(dst, Vec::new())];
    while let Some((v, suffix)) = stack.pop() {
        if v == src {
            let mut p = suffix;
            p.reverse();
            out.push(p);
            if out.len() == cap {
                break;
            }
            continue;
        }
        for &b in g.out[v].iter().rev() {
            // arc b leaves v; its reverse enters v
            let a = b ^ 1;
            let u = g.arcs[a].0;
            if dist[u] != usize::MAX && dist[u] + 1 == dist[v] {
                let mut next = suffix.clone();
                next.push(a);
                stack.push((u, next));
            }
        }
    }
    out
}

fn trace(g: &Graph, pred: &[usize], src: usize, dst: usize) -> Vec<usize> {
    let mut arcs = Vec::new();
    let mut v = dst;
    while v != src {
        let a = pred[v];
        arcs.push(a);
        v = g.arcs[a].0;
    }
    arcs.reverse();
    arcs
}

struct Master<'a> {
    g: &'a Graph,
    pairs: Vec<(usize, usize, f64)>,
    cols: Vec<Column>,
    known: BTreeSet<(usize, Vec<usize>)>,
    t_upper: f64,
}

impl Master<'_> {
    /// Restricted master LP. With `hold`, `t` is fixed and total path
    /// length is minimized.
    fn problem(&self, hold: Option<f64>) -> Problem {
        let mut p = Problem::new(if hold.is_some() { Sense::Minimize } else { Sense::Maximize });
        let t = match hold {
            Some(h) => p.add_var("t", 0.0, h, h),
            None => p.add_var("t", 1.0, 0.0, self.t_upper),
        };
        let mut pair_rows: Vec<Vec<(Var, f64)>> =
            self.pairs.iter().map(|&(_, _, d)| vec![(t, -d)]).collect();
        let mut arc_rows: Vec<Vec<(Var, f64)>> = vec![Vec::new(); self.g.arcs.len()];
        for (i, c) in self.cols.iter().enumerate() {
            let cost = if hold.is_some() { c.arcs.len() as f64 } else { 0.0 };
            let x = p.add_var(format!("p{i}"), cost, 0.0, f64::INFINITY);
            pair_rows[c.pair].push((x, 1.0));
            for &a in &c.arcs {
                arc_rows[a].push((x, 1.0));
            }
        }
        for (k, row) in pair_rows.into_iter().enumerate() {
            p.add_row(format!("pair{k}"), 0.0, 0.0, row);
        }
        for (a, row) in arc_rows.into_iter().enumerate() {
            p.add_row(format!("cap_e{a}"), f64::NEG_INFINITY, self.g.cap[a], row);
        }
        p
    }

    /// Adds the shortest path of every pair whose reduced cost improves the
    /// master. Returns the number of paths added.
    fn price(&mut self, sol: &Solution, minimize: bool) -> usize {
        let np = self.pairs.len();
        let pi = &sol.duals[..np];
        let y = &sol.duals[np..];
        // reduced cost in minimization form: sum_a s (c_a - y_a) - s pi_k
        let s = if minimize { 1.0 } else { -1.0 };
        let arc_cost = if minimize { 1.0 } else { 0.0 };
        let w: Vec<f64> = y.iter().map(|&ya| (s * (arc_cost - ya)).max(0.0)).collect();
        let mut by_src: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (k, &(a, _, _)) in self.pairs.iter().enumerate() {
            by_src.entry(a).or_default().push(k);
        }
        let mut added = 0;
        for (src, ks) in by_src {
            let (dist, pred) = dijkstra(self.g, &w, src);
            for k in ks {
                let dst = self.pairs[k].1;
                if dist[dst] < s * pi[k] - PRICE_TOL {
                    let arcs = trace(self.g, &pred, src, dst);
                    if self.known.insert((k, arcs.clone())) {
                        self.cols.push(Column { pair: k, arcs });
                        added += 1;
                    }
                }
            }
        }
        added
    }
}

/// Carries a basis over to a master with more columns appended.
fn extend_basis(b: &Basis, n_old: usize, n_new: usize) -> Basis {
    let shift = |j: usize| if j < n_old { j } else { j - n_old + n_new };
    let basic = b.basic.iter().map(|&j| shift(j)).collect();
    let at_upper = if b.at_upper.is_empty() {
        Vec::new()
    } else {
        let mut v = b.at_upper[..n_old].to_vec();
        v.resize(n_new, false);
        v.extend_from_slice(&b.at_upper[n_old..]);
        v
    };
    Basis { basic, at_upper }
}

pub(crate) fn solve_paths(t: &Topology, tm: &TrafficMatrix, opts: &FlowOptions) -> Result<FlowSolution, CoreError> {
    let start = Instant::now();
    let index = t.index_of();
    let pairs_of = model::check_endpoints(t, tm, &index)?;
    let mut g = Graph { nodes: t.switches.len(), arcs: Vec::new(), cap: Vec::new(), out: vec![Vec::new(); t.switches.len()] };
    for l in &t.links {
        let (a, b) = (index[&l.a], index[&l.b]);
        for (u, v) in [(a, b), (b, a)] {
            g.out[u].push(g.arcs.len());
            g.arcs.push((u, v));
            g.cap.push(l.capacity);
        }
    }
    let mut demand: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (c, &(a, b)) in tm.commodities.iter().zip(&pairs_of) {
        if a != b {
            *demand.entry((a, b)).or_insert(0.0) += c.demand;
        }
    }
    let t_upper = model::access_limit_for(t, tm, opts.access);
    let demands: Vec<f64> = tm.commodities.iter().map(|c| c.demand).collect();
    let finish = |th: f64, edge_flow: Vec<f64>, iterations: usize| FlowSolution {
        throughput: th,
        commodity_delivered: demands.iter().map(|d| d * th).collect(),
        edge_flow,
        iterations,
    };
    if demand.is_empty() {
        if !t_upper.is_finite() {
            return Err(CoreError::Solver("throughput is unbounded".into()));
        }
        return Ok(finish(t_upper, vec![0.0; g.arcs.len()], 0));
    }
    let mut master = Master {
        g: &g,
        pairs: demand.iter().map(|(&(a, b), &d)| (a, b, d)).collect(),
        cols: Vec::new(),
        known: BTreeSet::new(),
        t_upper,
    };
    let mut by_src: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (k, &(a, _, _)) in master.pairs.iter().enumerate() {
        by_src.entry(a).or_default().push(k);
    }
    for (src, ks) in by_src {
        let dist = hop_distances(&g, src);
        for k in ks {
            for arcs in shortest_paths(&g, &dist, src, master.pairs[k].1, INITIAL_PATHS) {
                master.known.insert((k, arcs.clone()));
                master.cols.push(Column { pair: k, arcs });
            }
        }
    }

    let mut iterations = 0;
    let mut basis: Option<Basis> = None;
    let mut n_prev = 0;
    let mut hold = None;
    let mut rounds = 0;
    let sol = loop {
        let lp_opts = SolveOptions {
            time_limit: opts.time_limit.map(|l| l.saturating_sub(start.elapsed())),
            ..SolveOptions::default()
        };
        let p = master.problem(hold);
        let warm = basis.as_ref().map(|b| extend_basis(b, n_prev, p.num_vars()));
        let sol = lp_solve(&p, &lp_opts, warm.as_ref())?;
        iterations += sol.iterations;
        check_status(sol.status, &sol.x, Var(0))?;
        rounds += 1;
        if rounds > MAX_ROUNDS {
            return Err(CoreError::Solver("column generation did not converge".into()));
        }
        n_prev = p.num_vars();
        basis = Some(sol.basis.clone());
        if master.price(&sol, hold.is_some()) > 0 {
            continue;
        }
        debug!(
            "paths: t = {} after {rounds} rounds, {} columns, {iterations} pivots",
            sol.x[0],
            master.cols.len()
        );
        if opts.min_total_flow && hold.is_none() {
            hold = Some(sol.x[0] * HOLD_FRACTION);
            continue;
        }
        break sol;
    };
    let mut edge_flow = vec![0.0; g.arcs.len()];
    for (i, c) in master.cols.iter().enumerate() {
        let x = sol.x[i + 1];
        if x != 0.0 {
            for &a in &c.arcs {
                edge_flow[a] += x;
            }
        }
    }
    Ok(finish(sol.x[0], edge_flow, iterations))
}
