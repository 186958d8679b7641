//! LP formulations of the maximum concurrent flow problem.

use std::collections::{BTreeMap, VecDeque};

use dctopo_lp::{Basis, Problem, RowId, Sense, Var};

use crate::topology::Topology;
use crate::traffic::{Aggregation, TrafficMatrix};
use crate::CoreError;

use super::{AccessModel, FlowOptions, Formulation};

pub(crate) const NO_ARC: usize = usize::MAX;

/// A formulated instance: the LP plus what is needed to read flows back.
#[derive(Clone, Debug)]
pub struct FlowModel {
    pub problem: Problem,
    pub formulation: Formulation,
    pub(crate) t_var: Var,
    /// Directed switch arc carried by each LP variable, or `NO_ARC`.
    pub(crate) var_arc: Vec<usize>,
    pub(crate) num_switch_arcs: usize,
    pub(crate) demands: Vec<f64>,
    /// Conservation row at each commodity's source, when commodities are kept apart.
    pub(crate) source_rows: Vec<Option<RowId>>,
    pub(crate) crash: Basis,
}

impl FlowModel {
    pub fn throughput_var(&self) -> Var {
        self.t_var
    }

    pub fn num_commodities(&self) -> usize {
        self.demands.len()
    }
}

/// Directed network over which flow groups are routed.
struct Net {
    nodes: usize,
    arcs: Vec<(usize, usize)>,
    cap: Vec<f64>,
    /// Switch arc index carried by each arc, or `NO_ARC` for access arcs.
    switch_arc: Vec<usize>,
}

/// Flow that leaves `root` and is absorbed by the negative supplies; all
/// supplies scale with `t`.
struct Group {
    label: String,
    root: usize,
    supply: BTreeMap<usize, f64>,
    /// Commodity whose source row is tracked.
    commodity: Option<usize>,
}

/// Switch arcs `2 l` (a to b) and `2 l + 1` (b to a) for link `l`.
fn switch_net(t: &Topology, index: &BTreeMap<usize, usize>) -> Net {
    let mut net = Net { nodes: t.switches.len(), arcs: Vec::new(), cap: Vec::new(), switch_arc: Vec::new() };
    for l in &t.links {
        let (a, b) = (index[&l.a], index[&l.b]);
        for (u, v) in [(a, b), (b, a)] {
            net.switch_arc.push(net.arcs.len());
            net.arcs.push((u, v));
            net.cap.push(l.capacity);
        }
    }
    net
}

pub(crate) fn access_limit_for(t: &Topology, tm: &TrafficMatrix, access: AccessModel) -> f64 {
    match access {
        AccessModel::Capacitated => access_limit(t, tm),
        AccessModel::Unconstrained => f64::INFINITY,
    }
}

/// Largest `t` the access links allow, with switch endpoints using the sum
/// of their servers' access capacities.
fn access_limit(t: &Topology, tm: &TrafficMatrix) -> f64 {
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
    out.iter()
        .chain(inn.iter())
        .map(|(e, &d)| cap.get(e).copied().unwrap_or(0.0) / d)
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn check_endpoints(t: &Topology, tm: &TrafficMatrix, index: &BTreeMap<usize, usize>) -> Result<Vec<(usize, usize)>, CoreError> {
    if tm.is_empty() {
        return Err(CoreError::NoCommodities);
    }
    tm.check()?;
    let comp = t.components();
    let pairs: Vec<(usize, usize)> =
        tm.switch_pairs(t)?.into_iter().map(|(a, b)| (index[&a], index[&b])).collect();
    for (c, &(a, b)) in tm.commodities.iter().zip(&pairs) {
        if comp[a] != comp[b] {
            return Err(CoreError::InfeasibleCommodity { src: c.src, dst: c.dst });
        }
    }
    Ok(pairs)
}

/// Builds the LP for `tm` on `t`.
///
/// The explicit form has one flow variable per commodity and directed arc,
/// including server access arcs for server-level matrices. The compact form
/// merges all commodities leaving the same switch into one flow group over
/// switch arcs only; access capacity then enters as an upper bound on `t`.
/// Both have the same optimal throughput.
pub fn formulate(t: &Topology, tm: &TrafficMatrix, opts: &FlowOptions) -> Result<FlowModel, CoreError> {
    let index = t.index_of();
    let pairs = check_endpoints(t, tm, &index)?;
    let demands: Vec<f64> = tm.commodities.iter().map(|c| c.demand).collect();
    let capacitated = opts.access == AccessModel::Capacitated;
    match (opts.formulation, tm.aggregation) {
        (Formulation::Paths, _) => Err(CoreError::InvalidInput("the path form is generated while solving; formulate an arc form".into())),
        (Formulation::Explicit, Aggregation::Server) => {
            let mut net = switch_net(t, &index);
            let num_switch_arcs = net.arcs.len();
            let server_node: BTreeMap<usize, usize> =
                t.servers.iter().enumerate().map(|(k, s)| (s.server_id, net.nodes + k)).collect();
            for s in &t.servers {
                let (u, sw) = (server_node[&s.server_id], index[&s.switch_id]);
                let cap = if capacitated { s.access_capacity } else { f64::INFINITY };
                for arc in [(u, sw), (sw, u)] {
                    net.arcs.push(arc);
                    net.cap.push(cap);
                    net.switch_arc.push(NO_ARC);
                }
            }
            net.nodes += t.servers.len();
            let groups = tm
                .commodities
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let (a, b) = (server_node[&c.src], server_node[&c.dst]);
                    Group { label: format!("c{i}"), root: a, supply: [(a, c.demand), (b, -c.demand)].into(), commodity: Some(i) }
                })
                .collect();
            build(&net, groups, f64::INFINITY, Formulation::Explicit, demands, num_switch_arcs)
        }
        (Formulation::Explicit, Aggregation::Switch) => {
            let net = switch_net(t, &index);
            let num_switch_arcs = net.arcs.len();
            let groups = tm
                .commodities
                .iter()
                .zip(&pairs)
                .enumerate()
                .map(|(i, (c, &(a, b)))| Group {
                    label: format!("c{i}"),
                    root: a,
                    supply: [(a, c.demand), (b, -c.demand)].into(),
                    commodity: Some(i),
                })
                .collect();
            let ub = if capacitated { access_limit(t, tm) } else { f64::INFINITY };
            build(&net, groups, ub, Formulation::Explicit, demands, num_switch_arcs)
        }
        (Formulation::Compact, _) => {
            let net = switch_net(t, &index);
            let num_switch_arcs = net.arcs.len();
            let mut by_source: BTreeMap<usize, BTreeMap<usize, f64>> = BTreeMap::new();
            for (c, &(a, b)) in tm.commodities.iter().zip(&pairs) {
                if a != b {
                    let sup = by_source.entry(a).or_default();
                    *sup.entry(a).or_insert(0.0) += c.demand;
                    *sup.entry(b).or_insert(0.0) -= c.demand;
                }
            }
            let groups = by_source
                .into_iter()
                .enumerate()
                .map(|(g, (root, supply))| Group { label: format!("g{g}"), root, supply, commodity: None })
                .collect();
            let ub = if capacitated { access_limit(t, tm) } else { f64::INFINITY };
            build(&net, groups, ub, Formulation::Compact, demands, num_switch_arcs)
        }
    }
}

fn build(
    net: &Net,
    groups: Vec<Group>,
    t_upper: f64,
    formulation: Formulation,
    demands: Vec<f64>,
    num_switch_arcs: usize,
) -> Result<FlowModel, CoreError> {
    let mut p = Problem::new(Sense::Maximize);
    let t_var = p.add_var("t", 1.0, 0.0, t_upper);
    let mut var_arc = vec![NO_ARC];
    let mut out_arcs: Vec<Vec<usize>> = vec![Vec::new(); net.nodes];
    let mut undirected: Vec<Vec<usize>> = vec![Vec::new(); net.nodes];
    for (j, &(u, v)) in net.arcs.iter().enumerate() {
        out_arcs[u].push(j);
        undirected[u].push(v);
        undirected[v].push(u);
    }
    let mut arc_users: Vec<Vec<Var>> = vec![Vec::new(); net.arcs.len()];
    let mut basic: Vec<usize> = Vec::new();
    let mut pending_rows: Vec<(String, Vec<(Var, f64)>, bool)> = Vec::new();
    let mut source_rows = vec![None; demands.len()];
    for g in &groups {
        // nodes reachable from the root, in BFS order, with the arc that reached each
        let mut seen = vec![false; net.nodes];
        let mut parent_arc = vec![NO_ARC; net.nodes];
        let mut order = vec![g.root];
        seen[g.root] = true;
        let mut queue = VecDeque::from([g.root]);
        while let Some(u) = queue.pop_front() {
            for &v in &undirected[u] {
                if !seen[v] {
                    seen[v] = true;
                    order.push(v);
                    queue.push_back(v);
                }
            }
        }
        let mut var_of = vec![None; net.arcs.len()];
        let mut rows: Vec<Vec<(Var, f64)>> = vec![Vec::new(); net.nodes];
        for (j, &(u, v)) in net.arcs.iter().enumerate() {
            if !seen[u] {
                continue;
            }
            let x = p.add_var(format!("f_{}_e{j}", g.label), 0.0, 0.0, f64::INFINITY);
            var_arc.push(net.switch_arc[j]);
            var_of[j] = Some(x);
            rows[u].push((x, 1.0));
            rows[v].push((x, -1.0));
            if net.cap[j].is_finite() {
                arc_users[j].push(x);
            }
        }
        // spanning tree directed away from the root
        for &u in &order {
            for &j in &out_arcs[u] {
                let v = net.arcs[j].1;
                if v != g.root && parent_arc[v] == NO_ARC {
                    parent_arc[v] = j;
                }
            }
        }
        for &v in &order {
            let name = format!("bal_{}_n{v}", g.label);
            let mut row = std::mem::take(&mut rows[v]);
            if let Some(&b) = g.supply.get(&v) {
                row.push((t_var, -b));
            }
            let is_root = v == g.root;
            if !is_root {
                basic.push(var_of[parent_arc[v]].expect("tree arc inside component").0);
            }
            pending_rows.push((name, row, is_root));
            if is_root {
                if let Some(i) = g.commodity {
                    source_rows[i] = Some(RowId(pending_rows.len() - 1));
                }
            }
        }
    }
    let n = p.num_vars();
    let mut logical_basic: Vec<usize> = Vec::new();
    for (name, row, is_root) in pending_rows {
        let r = p.add_row(name, 0.0, 0.0, row);
        if is_root {
            logical_basic.push(n + r.0);
        }
    }
    for (j, users) in arc_users.iter().enumerate() {
        if users.is_empty() {
            continue;
        }
        let r = p.add_row(format!("cap_e{j}"), f64::NEG_INFINITY, net.cap[j], users.iter().map(|&x| (x, 1.0)));
        logical_basic.push(n + r.0);
    }
    basic.extend(logical_basic);
    debug_assert_eq!(basic.len(), p.num_rows());
    Ok(FlowModel {
        problem: p,
        formulation,
        t_var,
        var_arc,
        num_switch_arcs,
        demands,
        source_rows,
        crash: Basis::new(basic),
    })
}
