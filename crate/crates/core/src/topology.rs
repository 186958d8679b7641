//! Switch-level topology model.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::CoreError;

/// A group of identical ports on one switch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PortClass {
    pub speed: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwitchSpec {
    pub id: usize,
    pub ports: Vec<PortClass>,
}

impl SwitchSpec {
    pub fn uniform(id: usize, speed: f64, count: usize) -> Self {
        SwitchSpec { id, ports: vec![PortClass { speed, count }] }
    }

    pub fn port_count(&self) -> usize {
        self.ports.iter().map(|p| p.count).sum()
    }

    /// Ports available at one line-speed.
    pub fn ports_at(&self, speed: f64) -> usize {
        self.ports.iter().filter(|p| p.speed == speed).map(|p| p.count).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ServerAttachment {
    #[serde(rename = "id")]
    pub server_id: usize,
    #[serde(rename = "switch")]
    pub switch_id: usize,
    #[serde(rename = "speed")]
    pub access_capacity: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub a: usize,
    pub b: usize,
    pub capacity: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub switches: Vec<SwitchSpec>,
    pub servers: Vec<ServerAttachment>,
    pub links: Vec<Link>,
    #[serde(rename = "clusters", default, skip_serializing_if = "Option::is_none")]
    pub cluster_of: Option<BTreeMap<usize, u8>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<String>,
    pub connected: bool,
}

/// Which unordered switch pairs an ASPL average runs over.
#[derive(Clone, Debug)]
pub enum PairSelector {
    AllPairs,
    /// Explicit pairs of switch ids; same-switch pairs count as distance 0.
    Pairs(Vec<(usize, usize)>),
}

impl Topology {
    pub fn num_switches(&self) -> usize {
        self.switches.len()
    }

    /// Position of each switch id in `switches`.
    pub fn index_of(&self) -> BTreeMap<usize, usize> {
        self.switches.iter().enumerate().map(|(i, s)| (s.id, i)).collect()
    }

    /// Server count per switch, indexed by position.
    pub fn servers_per_switch(&self) -> Vec<usize> {
        let idx = self.index_of();
        let mut count = vec![0; self.switches.len()];
        for s in &self.servers {
            if let Some(&i) = idx.get(&s.switch_id) {
                count[i] += 1;
            }
        }
        count
    }

    /// Neighbour lists by switch position, ignoring capacity and parallel links.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let idx = self.index_of();
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); self.switches.len()];
        for l in &self.links {
            if let (Some(&a), Some(&b)) = (idx.get(&l.a), idx.get(&l.b)) {
                if a != b {
                    adj[a].insert(b);
                    adj[b].insert(a);
                }
            }
        }
        adj.into_iter().map(|s| s.into_iter().collect()).collect()
    }

    /// Connected component label for each switch position.
    pub fn components(&self) -> Vec<usize> {
        let adj = self.adjacency();
        let mut comp = vec![usize::MAX; adj.len()];
        let mut next = 0;
        for s in 0..adj.len() {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = next;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if comp[v] == usize::MAX {
                        comp[v] = next;
                        queue.push_back(v);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    pub fn is_connected(&self) -> bool {
        self.components().iter().all(|&c| c == 0)
    }

    /// Degree of each switch position in switch-switch links.
    pub fn link_degrees(&self) -> Vec<usize> {
        let idx = self.index_of();
        let mut deg = vec![0; self.switches.len()];
        for l in &self.links {
            if let Some(&a) = idx.get(&l.a) {
                deg[a] += 1;
            }
            if let Some(&b) = idx.get(&l.b) {
                deg[b] += 1;
            }
        }
        deg
    }
}

/// Checks every structural invariant and reports all violations found.
pub fn validate(t: &Topology) -> ValidationReport {
    let mut v = Vec::new();
    let idx = t.index_of();
    if idx.len() != t.switches.len() {
        v.push("duplicate switch id".to_string());
    }
    for s in &t.switches {
        let mut speeds = BTreeSet::new();
        for p in &s.ports {
            if p.count < 1 {
                v.push(format!("switch {}: empty port class", s.id));
            }
            if !(p.speed > 0.0) {
                v.push(format!("switch {}: non-positive line-speed", s.id));
            }
            if !speeds.insert(p.speed.to_bits()) {
                v.push(format!("switch {}: repeated line-speed {}", s.id, p.speed));
            }
        }
    }
    // ports consumed per (switch position, speed)
    let mut used: BTreeMap<(usize, u64), usize> = BTreeMap::new();
    let mut server_ids = BTreeSet::new();
    for s in &t.servers {
        if !server_ids.insert(s.server_id) {
            v.push(format!("duplicate server id {}", s.server_id));
        }
        if !(s.access_capacity > 0.0) {
            v.push(format!("server {}: non-positive access capacity", s.server_id));
        }
        match idx.get(&s.switch_id) {
            Some(&i) => *used.entry((i, s.access_capacity.to_bits())).or_default() += 1,
            None => v.push(format!("server {}: unknown switch {}", s.server_id, s.switch_id)),
        }
    }
    let mut seen_pairs = BTreeSet::new();
    for (k, l) in t.links.iter().enumerate() {
        if l.a == l.b {
            v.push(format!("link {k}: self-loop at switch {}", l.a));
        }
        if !(l.capacity > 0.0) {
            v.push(format!("link {k}: non-positive capacity"));
        }
        let key = (l.a.min(l.b), l.a.max(l.b), l.capacity.to_bits());
        if !seen_pairs.insert(key) {
            v.push(format!("link {k}: parallel link between {} and {}", l.a, l.b));
        }
        for end in [l.a, l.b] {
            match idx.get(&end) {
                Some(&i) => *used.entry((i, l.capacity.to_bits())).or_default() += 1,
                None => v.push(format!("link {k}: unknown switch {end}")),
            }
        }
    }
    for (&(i, bits), &n) in &used {
        let speed = f64::from_bits(bits);
        let sw = &t.switches[i];
        let have = sw.ports_at(speed);
        if have == 0 {
            v.push(format!("switch {}: no port of speed {speed}", sw.id));
        } else if n > have {
            v.push(format!("switch {}: port budget exceeded at speed {speed} ({n} > {have})", sw.id));
        }
    }
    if let Some(c) = &t.cluster_of {
        for (id, &label) in c {
            if label > 1 {
                v.push(format!("switch {id}: cluster label {label} not in {{0, 1}}"));
            }
            if !idx.contains_key(id) {
                v.push(format!("cluster label for unknown switch {id}"));
            }
        }
    }
    ValidationReport { ok: v.is_empty(), violations: v, connected: t.is_connected() }
}

/// Total directed capacity of the switch-switch links.
pub fn total_capacity(t: &Topology) -> f64 {
    2.0 * t.links.iter().map(|l| l.capacity).sum::<f64>()
}

/// Directed capacity of links whose endpoints carry different labels.
pub fn cut_capacity(t: &Topology, clusters: &BTreeMap<usize, u8>) -> Result<f64, CoreError> {
    for s in &t.switches {
        if !clusters.contains_key(&s.id) {
            return Err(CoreError::MissingClusterLabel(s.id));
        }
    }
    Ok(2.0
        * t.links
            .iter()
            .filter(|l| clusters[&l.a] != clusters[&l.b])
            .map(|l| l.capacity)
            .sum::<f64>())
}

/// Hop distances from one switch position; `usize::MAX` marks unreachable.
pub fn bfs_distances(adj: &[Vec<usize>], src: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[src] = 0;
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// All-pairs hop distances by switch position.
pub fn distance_matrix(t: &Topology) -> Vec<Vec<usize>> {
    let adj = t.adjacency();
    (0..adj.len()).map(|s| bfs_distances(&adj, s)).collect()
}

/// Mean shortest-path hop count over the selected unordered switch pairs.
pub fn aspl(t: &Topology, pairs: &PairSelector) -> Result<f64, CoreError> {
    let adj = t.adjacency();
    let n = adj.len();
    match pairs {
        PairSelector::AllPairs => {
            if n < 2 {
                return Ok(0.0);
            }
            let mut total: u64 = 0;
            for s in 0..n {
                let d = bfs_distances(&adj, s);
                for (v, &dv) in d.iter().enumerate().skip(s + 1) {
                    if dv == usize::MAX {
                        return Err(CoreError::UnreachablePair(t.switches[s].id, t.switches[v].id));
                    }
                    total += dv as u64;
                }
            }
            Ok(total as f64 / (n * (n - 1) / 2) as f64)
        }
        PairSelector::Pairs(list) => {
            if list.is_empty() {
                return Ok(0.0);
            }
            let idx = t.index_of();
            let mut cache: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            let mut total = 0u64;
            for &(a, b) in list {
                let ia = *idx.get(&a).ok_or(CoreError::UnknownSwitch(a))?;
                let ib = *idx.get(&b).ok_or(CoreError::UnknownSwitch(b))?;
                let d = cache.entry(ia).or_insert_with(|| bfs_distances(&adj, ia))[ib];
                if d == usize::MAX {
                    return Err(CoreError::UnreachablePair(a, b));
                }
                total += d as u64;
            }
            Ok(total as f64 / list.len() as f64)
        }
    }
}
