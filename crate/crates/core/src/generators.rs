//! Topology families, each a pure function of (config, seed).

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::rng::{derive_seed, rng_from_seed, Rng};
use crate::topology::{Link, PortClass, ServerAttachment, SwitchSpec, Topology};
use crate::CoreError;

/// Fresh seeds tried before a generator gives up.
const MAX_ATTEMPTS: u64 = 8;
/// Pure configuration-model draws tried by `gen_rrg` before repairing.
const REJECTION_DRAWS: usize = 50;
const BASE_SPEED: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoClassConfig {
    pub n_large: usize,
    pub n_small: usize,
    pub ports_large: usize,
    pub ports_small: usize,
    pub total_servers: usize,
}

impl TwoClassConfig {
    pub fn large_ports_total(&self) -> usize {
        self.n_large * self.ports_large
    }

    pub fn small_ports_total(&self) -> usize {
        self.n_small * self.ports_small
    }

    fn check(&self) -> Result<(), CoreError> {
        if self.n_large == 0 || self.n_small == 0 || self.ports_large == 0 || self.ports_small == 0 {
            return Err(CoreError::InvalidInput("two-class counts must be positive".into()));
        }
        if self.total_servers > self.large_ports_total() + self.small_ports_total() {
            return Err(CoreError::InfeasibleDistribution);
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineSpeedOverlayConfig {
    pub base: TwoClassConfig,
    pub high_ports_per_large: usize,
    pub high_speed: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RewiredVl2Config {
    pub da: usize,
    pub di: usize,
    pub num_tors: usize,
    pub servers_per_tor: usize,
    pub tor_uplinks: usize,
    pub uplink_speed: f64,
    pub server_speed: f64,
}

impl RewiredVl2Config {
    pub fn new(da: usize, di: usize, num_tors: usize) -> Self {
        RewiredVl2Config {
            da,
            di,
            num_tors,
            servers_per_tor: 20,
            tor_uplinks: 2,
            uplink_speed: 10.0,
            server_speed: 1.0,
        }
    }
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Splits `total` in proportion to integer weights: floors first, then the
/// largest remainders, ties to the lowest index.
pub fn largest_remainder(weights: &[u64], total: u64) -> Vec<u64> {
    let w: u128 = weights.iter().map(|&x| x as u128).sum();
    if w == 0 {
        return vec![0; weights.len()];
    }
    let mut out: Vec<u64> = weights.iter().map(|&x| (total as u128 * x as u128 / w) as u64).collect();
    let mut rem: Vec<(u128, usize)> =
        weights.iter().enumerate().map(|(i, &x)| (total as u128 * x as u128 % w, i)).collect();
    rem.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let short = total - out.iter().sum::<u64>();
    for &(_, i) in rem.iter().take(short as usize) {
        out[i] += 1;
    }
    out
}

/// Real-weighted variant of [`largest_remainder`].
pub fn largest_remainder_real(weights: &[f64], total: u64) -> Vec<u64> {
    let w: f64 = weights.iter().sum();
    if !(w > 0.0) {
        return vec![0; weights.len()];
    }
    let quota: Vec<f64> = weights.iter().map(|&x| total as f64 * x / w).collect();
    let mut out: Vec<u64> = quota.iter().map(|q| q.floor() as u64).collect();
    let mut rem: Vec<(f64, usize)> = quota.iter().enumerate().map(|(i, q)| (q - q.floor(), i)).collect();
    rem.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let assigned: u64 = out.iter().sum();
    for &(_, i) in rem.iter().take(total.saturating_sub(assigned) as usize) {
        out[i] += 1;
    }
    out
}

/// Multiset of undirected edges with per-pair multiplicity.
struct EdgeCounts(BTreeMap<(usize, usize), usize>);

impl EdgeCounts {
    fn new(edges: &[(usize, usize)]) -> Self {
        let mut m = BTreeMap::new();
        for &(a, b) in edges {
            *m.entry(key(a, b)).or_insert(0) += 1;
        }
        EdgeCounts(m)
    }

    fn get(&self, a: usize, b: usize) -> usize {
        self.0.get(&key(a, b)).copied().unwrap_or(0)
    }

    fn add(&mut self, a: usize, b: usize) {
        *self.0.entry(key(a, b)).or_insert(0) += 1;
    }

    fn remove(&mut self, a: usize, b: usize) {
        let k = key(a, b);
        if let Some(c) = self.0.get_mut(&k) {
            *c -= 1;
            if *c == 0 {
                self.0.remove(&k);
            }
        }
    }
}

fn is_simple(edges: &[(usize, usize)], forbidden: &BTreeSet<(usize, usize)>) -> bool {
    let mut seen = BTreeSet::new();
    edges
        .iter()
        .all(|&(a, b)| a != b && !forbidden.contains(&key(a, b)) && seen.insert(key(a, b)))
}

/// Removes self-loops, repeated pairs and forbidden pairs with random
/// double-edge swaps. With `bipartite` every edge is `(left, right)` and
/// swaps keep that orientation.
fn repair_edges(
    edges: &mut [(usize, usize)],
    forbidden: &BTreeSet<(usize, usize)>,
    bipartite: bool,
    rng: &mut Rng,
) -> Result<(), CoreError> {
    let m = edges.len();
    let mut counts = EdgeCounts::new(edges);
    let bad = |e: (usize, usize), c: &EdgeCounts| {
        e.0 == e.1 || c.get(e.0, e.1) > 1 || forbidden.contains(&key(e.0, e.1))
    };
    let limit = 200 * m + 1000;
    let mut attempts = 0;
    loop {
        let bad_idx: Vec<usize> = (0..m).filter(|&i| bad(edges[i], &counts)).collect();
        if bad_idx.is_empty() {
            return Ok(());
        }
        if m < 2 {
            return Err(CoreError::GenerationFailed);
        }
        for i in bad_idx {
            if !bad(edges[i], &counts) {
                continue;
            }
            loop {
                attempts += 1;
                if attempts > limit {
                    return Err(CoreError::GenerationFailed);
                }
                let j = rng.random_range(0..m);
                if j == i {
                    continue;
                }
                let (a, b) = edges[i];
                let (c, d) = edges[j];
                let (e1, e2) = if bipartite || rng.random::<bool>() { ((a, d), (c, b)) } else { ((a, c), (b, d)) };
                counts.remove(a, b);
                counts.remove(c, d);
                let ok = e1.0 != e1.1
                    && e2.0 != e2.1
                    && key(e1.0, e1.1) != key(e2.0, e2.1)
                    && counts.get(e1.0, e1.1) == 0
                    && counts.get(e2.0, e2.1) == 0
                    && !forbidden.contains(&key(e1.0, e1.1))
                    && !forbidden.contains(&key(e2.0, e2.1));
                if ok {
                    counts.add(e1.0, e1.1);
                    counts.add(e2.0, e2.1);
                    edges[i] = e1;
                    edges[j] = e2;
                    break;
                }
                counts.add(a, b);
                counts.add(c, d);
            }
        }
    }
}

/// Uniformly pairs the stubs (node ids repeated by degree) and repairs the
/// result into a simple graph avoiding `forbidden`.
fn match_stubs(
    stubs: &[usize],
    forbidden: &BTreeSet<(usize, usize)>,
    rng: &mut Rng,
) -> Result<Vec<(usize, usize)>, CoreError> {
    debug_assert!(stubs.len() % 2 == 0);
    let mut s = stubs.to_vec();
    s.shuffle(rng);
    let mut edges: Vec<(usize, usize)> = s.chunks(2).map(|c| (c[0], c[1])).collect();
    repair_edges(&mut edges, forbidden, false, rng)?;
    Ok(edges)
}

/// Havel–Hakimi realization of a graphical degree sequence, lowest ids
/// first among equal degrees.
fn havel_hakimi(degrees: &[usize]) -> Option<Vec<(usize, usize)>> {
    let mut left: Vec<usize> = degrees.to_vec();
    let mut edges = Vec::new();
    loop {
        let mut order: Vec<usize> = (0..left.len()).filter(|&v| left[v] > 0).collect();
        if order.is_empty() {
            return Some(edges);
        }
        order.sort_by(|&a, &b| left[b].cmp(&left[a]).then(a.cmp(&b)));
        let v = order[0];
        let d = left[v];
        if d > order.len() - 1 {
            return None;
        }
        for &u in &order[1..=d] {
            left[u] -= 1;
            edges.push((v, u));
        }
        left[v] = 0;
    }
}

/// Random degree-preserving double-edge swaps that keep the graph simple.
fn randomize_by_swaps(edges: &mut [(usize, usize)], forbidden: &BTreeSet<(usize, usize)>, tries: usize, rng: &mut Rng) {
    let m = edges.len();
    if m < 2 {
        return;
    }
    let mut counts = EdgeCounts::new(edges);
    for _ in 0..tries {
        let i = rng.random_range(0..m);
        let j = rng.random_range(0..m);
        let (a, b) = edges[i];
        let (c, d) = edges[j];
        let (e1, e2) = if rng.random::<bool>() { ((a, d), (c, b)) } else { ((a, c), (b, d)) };
        if e1.0 == e1.1
            || e2.0 == e2.1
            || key(e1.0, e1.1) == key(e2.0, e2.1)
            || counts.get(e1.0, e1.1) > 0
            || counts.get(e2.0, e2.1) > 0
            || forbidden.contains(&key(e1.0, e1.1))
            || forbidden.contains(&key(e2.0, e2.1))
        {
            continue;
        }
        counts.remove(a, b);
        counts.remove(c, d);
        counts.add(e1.0, e1.1);
        counts.add(e2.0, e2.1);
        edges[i] = e1;
        edges[j] = e2;
    }
}

fn component_labels(n: usize, edges: &[(usize, usize)], fixed: &[(usize, usize)]) -> (Vec<usize>, usize) {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(a, b) in edges.iter().chain(fixed) {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut label = vec![0; n];
    let mut ids = BTreeMap::new();
    for x in 0..n {
        let r = find(&mut parent, x);
        let next = ids.len();
        label[x] = *ids.entry(r).or_insert(next);
    }
    (label, ids.len())
}

/// Joins components with random double-edge swaps between them. Nodes in
/// `ignore` (for example switches without network ports) are not required to
/// be connected.
fn connect_by_swaps(
    n: usize,
    edges: &mut [(usize, usize)],
    fixed: &[(usize, usize)],
    forbidden: &BTreeSet<(usize, usize)>,
    ignore: &BTreeSet<usize>,
    rng: &mut Rng,
) -> Result<(), CoreError> {
    let limit = 100 * edges.len() + 1000;
    let mut counts = EdgeCounts::new(edges);
    for attempt in 0.. {
        let (label, _) = component_labels(n, edges, fixed);
        let relevant: BTreeSet<usize> = (0..n).filter(|x| !ignore.contains(x)).map(|x| label[x]).collect();
        if relevant.len() <= 1 {
            return Ok(());
        }
        if attempt > limit || edges.len() < 2 {
            return Err(CoreError::GenerationFailed);
        }
        let i = rng.random_range(0..edges.len());
        let j = rng.random_range(0..edges.len());
        let (a, b) = edges[i];
        let (c, d) = edges[j];
        if label[a] == label[c] {
            continue;
        }
        let (e1, e2) = ((a, c), (b, d));
        if counts.get(e1.0, e1.1) > 0
            || counts.get(e2.0, e2.1) > 0
            || forbidden.contains(&key(e1.0, e1.1))
            || forbidden.contains(&key(e2.0, e2.1))
        {
            continue;
        }
        let before = relevant.len();
        edges[i] = e1;
        edges[j] = e2;
        let (label2, _) = component_labels(n, edges, fixed);
        let after: BTreeSet<usize> = (0..n).filter(|x| !ignore.contains(x)).map(|x| label2[x]).collect();
        if after.len() < before {
            counts.remove(a, b);
            counts.remove(c, d);
            counts.add(e1.0, e1.1);
            counts.add(e2.0, e2.1);
        } else {
            edges[i] = (a, b);
            edges[j] = (c, d);
        }
    }
    unreachable!()
}

fn is_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    component_labels(n, edges, &[]).1 <= 1
}

fn stubs_from_degrees(degrees: &[usize]) -> Vec<usize> {
    degrees.iter().enumerate().flat_map(|(v, &d)| std::iter::repeat_n(v, d)).collect()
}

/// Drops one stub from the lowest-id node with a stub left when the total is odd.
fn fix_parity(degrees: &mut [usize]) {
    if degrees.iter().sum::<usize>() % 2 == 1 {
        if let Some(d) = degrees.iter_mut().find(|d| **d > 0) {
            *d -= 1;
        }
    }
}

/// Erdős–Gallai test for a simple graph with these degrees.
pub fn is_graphical(degrees: &[usize]) -> bool {
    let mut d = degrees.to_vec();
    d.sort_unstable_by(|a, b| b.cmp(a));
    if d.iter().sum::<usize>() % 2 == 1 {
        return false;
    }
    let mut lhs = 0;
    for k in 1..=d.len() {
        lhs += d[k - 1];
        let rhs = k * (k - 1) + d[k..].iter().map(|&x| x.min(k)).sum::<usize>();
        if lhs > rhs {
            return false;
        }
    }
    true
}

/// Leaves ports unused, two at a time on the switches with the most free
/// ports, until a simple graph exists. Returns the number of ports dropped.
fn trim_to_graphical(degrees: &mut [usize]) -> usize {
    let mut dropped = 0;
    while !is_graphical(degrees) {
        let mut order: Vec<usize> = (0..degrees.len()).collect();
        order.sort_by(|&a, &b| degrees[b].cmp(&degrees[a]).then(a.cmp(&b)));
        degrees[order[0]] -= 1;
        degrees[order[1]] -= 1;
        dropped += 2;
    }
    dropped
}

fn links_from(edges: &[(usize, usize)], capacity: f64) -> Vec<Link> {
    let mut links: Vec<Link> = edges.iter().map(|&(a, b)| Link { a: a.min(b), b: a.max(b), capacity }).collect();
    links.sort_by(|x, y| (x.a, x.b).cmp(&(y.a, y.b)));
    links
}

fn attach_servers(counts: &[usize], speed: f64) -> Vec<ServerAttachment> {
    let mut servers = Vec::new();
    for (sw, &c) in counts.iter().enumerate() {
        for _ in 0..c {
            servers.push(ServerAttachment { server_id: servers.len(), switch_id: sw, access_capacity: speed });
        }
    }
    servers
}

/// Connected simple `r`-regular graph on `n` switches with unit links.
///
/// Pure configuration-model draws are tried first; if none is simple and
/// connected, the last draw is repaired with random double-edge swaps.
pub fn gen_rrg(n: usize, r: usize, seed: u64) -> Result<Topology, CoreError> {
    if r >= n || (n * r) % 2 == 1 {
        return Err(CoreError::InfeasibleDegreeSequence);
    }
    let stubs = stubs_from_degrees(&vec![r; n]);
    let none = BTreeSet::new();
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = rng_from_seed(derive_seed(seed, &[attempt]));
        let mut edges = Vec::new();
        let mut found = false;
        for _ in 0..REJECTION_DRAWS {
            let mut s = stubs.clone();
            s.shuffle(&mut rng);
            edges = s.chunks(2).map(|c| (c[0], c[1])).collect();
            if is_simple(&edges, &none) && is_connected(n, &edges) {
                found = true;
                break;
            }
        }
        if !found {
            if repair_edges(&mut edges, &none, false, &mut rng).is_err() {
                continue;
            }
            if connect_by_swaps(n, &mut edges, &[], &none, &BTreeSet::new(), &mut rng).is_err() {
                continue;
            }
        }
        return Ok(Topology {
            switches: (0..n).map(|i| SwitchSpec::uniform(i, BASE_SPEED, r)).collect(),
            servers: Vec::new(),
            links: links_from(&edges, 1.0),
            cluster_of: None,
        });
    }
    Err(CoreError::GenerationFailed)
}

/// Adds `counts[i]` servers to switch position `i`, growing that switch's
/// port class at `speed` so the new servers have ports.
pub fn with_servers(mut t: Topology, counts: &[usize], speed: f64) -> Topology {
    let mut next_id = t.servers.iter().map(|s| s.server_id + 1).max().unwrap_or(0);
    for (i, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let sw = &mut t.switches[i];
        match sw.ports.iter_mut().find(|p| p.speed == speed) {
            Some(p) => p.count += c,
            None => sw.ports.push(PortClass { speed, count: c }),
        }
        for _ in 0..c {
            t.servers.push(ServerAttachment { server_id: next_id, switch_id: sw.id, access_capacity: speed });
            next_id += 1;
        }
    }
    t
}

/// Per-switch server counts (large switches first) putting `x` times the
/// port-proportional share on the large switches.
pub fn server_distribution_two_class(cfg: &TwoClassConfig, x: f64) -> Result<Vec<usize>, CoreError> {
    cfg.check()?;
    if !(x >= 0.0) || !x.is_finite() {
        return Err(CoreError::InvalidInput("x must be a finite value >= 0".into()));
    }
    let (pl, ps) = (cfg.large_ports_total() as f64, cfg.small_ports_total() as f64);
    let large = (x * cfg.total_servers as f64 * pl / (pl + ps)).round() as usize;
    if large > cfg.total_servers {
        return Err(CoreError::InfeasibleDistribution);
    }
    let small = cfg.total_servers - large;
    let split = |total: usize, n: usize| -> Vec<usize> {
        (0..n).map(|i| total / n + usize::from(i < total % n)).collect()
    };
    let mut counts = split(large, cfg.n_large);
    counts.extend(split(small, cfg.n_small));
    let ports = |i: usize| if i < cfg.n_large { cfg.ports_large } else { cfg.ports_small };
    if counts.iter().enumerate().any(|(i, &c)| c > ports(i)) {
        return Err(CoreError::InfeasibleDistribution);
    }
    Ok(counts)
}

/// Servers in proportion to `k_i^beta`, rounded to total exactly `s`.
pub fn server_distribution_powerlaw(ports: &[usize], beta: f64, s: usize) -> Result<Vec<usize>, CoreError> {
    if s > ports.iter().sum::<usize>() {
        return Err(CoreError::InfeasibleDistribution);
    }
    let weights: Vec<f64> = ports.iter().map(|&k| (k as f64).powf(beta)).collect();
    let counts: Vec<usize> = largest_remainder_real(&weights, s as u64).into_iter().map(|c| c as usize).collect();
    if counts.iter().zip(ports).any(|(&c, &k)| c > 0 && c >= k) {
        return Err(CoreError::InfeasibleDistribution);
    }
    Ok(counts)
}

/// Port counts drawn from a discrete power law `P(k) ∝ k^-exponent` on
/// `[k_min, k_max]`.
pub fn powerlaw_port_counts(n: usize, k_min: usize, k_max: usize, exponent: f64, seed: u64) -> Result<Vec<usize>, CoreError> {
    if k_min == 0 || k_min > k_max {
        return Err(CoreError::InvalidInput("need 0 < k_min <= k_max".into()));
    }
    let weights: Vec<f64> = (k_min..=k_max).map(|k| (k as f64).powf(-exponent)).collect();
    let total: f64 = weights.iter().sum();
    let mut rng = rng_from_seed(seed);
    Ok((0..n)
        .map(|_| {
            let mut u = rng.random::<f64>() * total;
            for (i, w) in weights.iter().enumerate() {
                if u < *w {
                    return k_min + i;
                }
                u -= w;
            }
            k_max
        })
        .collect())
}

/// Random simple graph over the ports left after attaching servers, every
/// switch with one uniform port class. Ports that no simple graph can use
/// stay free.
pub fn gen_degree_sequence(ports: &[usize], server_counts: &[usize], seed: u64) -> Result<Topology, CoreError> {
    if ports.len() != server_counts.len() {
        return Err(CoreError::InvalidInput("ports and server counts differ in length".into()));
    }
    let mut free: Vec<usize> = Vec::with_capacity(ports.len());
    for (&k, &s) in ports.iter().zip(server_counts) {
        if s > k {
            return Err(CoreError::InfeasibleDistribution);
        }
        free.push(k - s);
    }
    fix_parity(&mut free);
    let dropped = trim_to_graphical(&mut free);
    if dropped > 0 {
        log::debug!("{dropped} ports left unused: free degrees are not graphical");
    }
    let n = ports.len();
    let ignore: BTreeSet<usize> = (0..n).filter(|&i| free[i] == 0).collect();
    let stubs = stubs_from_degrees(&free);
    let none = BTreeSet::new();
    let topology = |edges: &[(usize, usize)]| Topology {
        switches: ports.iter().enumerate().map(|(i, &k)| SwitchSpec::uniform(i, BASE_SPEED, k)).collect(),
        servers: attach_servers(server_counts, BASE_SPEED),
        links: links_from(edges, 1.0),
        cluster_of: None,
    };
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = rng_from_seed(derive_seed(seed, &[attempt]));
        let Ok(mut edges) = match_stubs(&stubs, &none, &mut rng) else { continue };
        if connect_by_swaps(n, &mut edges, &[], &none, &ignore, &mut rng).is_err() {
            continue;
        }
        return Ok(topology(&edges));
    }
    // near-extremal sequences: a deterministic realization mixed by swaps
    let mut rng = rng_from_seed(derive_seed(seed, &[MAX_ATTEMPTS]));
    let mut edges = havel_hakimi(&free).ok_or(CoreError::GenerationFailed)?;
    let tries = 100 * edges.len();
    randomize_by_swaps(&mut edges, &none, tries, &mut rng);
    connect_by_swaps(n, &mut edges, &[], &none, &ignore, &mut rng)?;
    Ok(topology(&edges))
}

/// Unbiased random interconnect of a two-class configuration.
pub fn gen_two_class_random(cfg: &TwoClassConfig, server_counts: &[usize], seed: u64) -> Result<Topology, CoreError> {
    cfg.check()?;
    let ports = two_class_ports(cfg);
    let mut t = gen_degree_sequence(&ports, server_counts, seed)?;
    t.cluster_of = Some(two_class_labels(cfg));
    Ok(t)
}

fn two_class_ports(cfg: &TwoClassConfig) -> Vec<usize> {
    (0..cfg.n_large + cfg.n_small)
        .map(|i| if i < cfg.n_large { cfg.ports_large } else { cfg.ports_small })
        .collect()
}

fn two_class_labels(cfg: &TwoClassConfig) -> BTreeMap<usize, u8> {
    (0..cfg.n_large + cfg.n_small).map(|i| (i, u8::from(i >= cfg.n_large))).collect()
}

/// Free network stubs per switch after server attachment and parity fix.
fn two_class_free_stubs(cfg: &TwoClassConfig, server_counts: &[usize]) -> Result<Vec<usize>, CoreError> {
    cfg.check()?;
    let ports = two_class_ports(cfg);
    if server_counts.len() != ports.len() {
        return Err(CoreError::InvalidInput("server counts do not match the switch count".into()));
    }
    let mut free = Vec::with_capacity(ports.len());
    for (&k, &s) in ports.iter().zip(server_counts) {
        if s > k {
            return Err(CoreError::InfeasibleDistribution);
        }
        free.push(k - s);
    }
    fix_parity(&mut free);
    Ok(free)
}

/// Network stubs `(P1, P2)` left on the large and small cluster.
pub fn cluster_stub_counts(cfg: &TwoClassConfig, server_counts: &[usize]) -> Result<(usize, usize), CoreError> {
    let free = two_class_free_stubs(cfg, server_counts)?;
    Ok((free[..cfg.n_large].iter().sum(), free[cfg.n_large..].iter().sum()))
}

/// Cross-cluster links expected under uniform stub matching.
pub fn expected_cross_links(p1: usize, p2: usize) -> f64 {
    if p1 + p2 < 2 {
        return 0.0;
    }
    (p1 * p2) as f64 / (p1 + p2 - 1) as f64
}

/// Cross-link target for a bias ratio, if it is feasible.
pub fn cross_target(p1: usize, p2: usize, x_cross: f64) -> Result<usize, CoreError> {
    if !(x_cross >= 0.0) || !x_cross.is_finite() {
        return Err(CoreError::InfeasibleBias);
    }
    let target = (x_cross * expected_cross_links(p1, p2)).round() as usize;
    if target > p1.min(p2) || (p1 - target) % 2 == 1 || (p2 - target) % 2 == 1 {
        return Err(CoreError::InfeasibleBias);
    }
    Ok(target)
}

/// The feasible cross-link count closest to `x_cross` times the expected
/// count, with the ratio it corresponds to. Ties go to the smaller count.
pub fn nearest_feasible_cross(p1: usize, p2: usize, x_cross: f64) -> Option<(usize, f64)> {
    if (p1 + p2) % 2 == 1 {
        return None;
    }
    let e = expected_cross_links(p1, p2);
    let want = x_cross * e;
    (0..=p1.min(p2))
        .filter(|x| (p1 - x) % 2 == 0)
        .min_by(|&a, &b| (a as f64 - want).abs().total_cmp(&(b as f64 - want).abs()).then(a.cmp(&b)))
        .map(|x| (x, if e > 0.0 { x as f64 / e } else { 0.0 }))
}

/// Random simple graph on the given stubs. Ports no simple graph can use
/// stay free; when stub matching fails, a Havel-Hakimi graph is mixed by
/// swaps instead.
fn intra_edges(stubs: &[usize], rng: &mut Rng) -> Option<Vec<(usize, usize)>> {
    let none = BTreeSet::new();
    let ids: BTreeSet<usize> = stubs.iter().copied().collect();
    let ids: Vec<usize> = ids.into_iter().collect();
    let mut degrees: Vec<usize> = ids.iter().map(|v| stubs.iter().filter(|s| *s == v).count()).collect();
    if trim_to_graphical(&mut degrees) == 0 {
        if let Ok(edges) = match_stubs(stubs, &none, rng) {
            return Some(edges);
        }
    }
    let local = stubs_from_degrees(&degrees);
    let mut edges = match match_stubs(&local, &none, rng) {
        Ok(e) => e,
        Err(_) => {
            let mut e = havel_hakimi(&degrees)?;
            let tries = 100 * e.len();
            randomize_by_swaps(&mut e, &none, tries, rng);
            e
        }
    };
    for e in &mut edges {
        *e = (ids[e.0], ids[e.1]);
    }
    Some(edges)
}

/// Two clusters with a chosen number of cross-cluster links.
pub fn gen_two_cluster_biased(
    cfg: &TwoClassConfig,
    server_counts: &[usize],
    x_cross: f64,
    seed: u64,
) -> Result<Topology, CoreError> {
    let (p1, p2) = cluster_stub_counts(cfg, server_counts)?;
    let target = cross_target(p1, p2, x_cross)?;
    gen_two_cluster_with_cross(cfg, server_counts, target, seed)
}

/// As [`gen_two_cluster_biased`], with the cross-link count given directly.
pub fn gen_two_cluster_with_cross(
    cfg: &TwoClassConfig,
    server_counts: &[usize],
    cross: usize,
    seed: u64,
) -> Result<Topology, CoreError> {
    let free = two_class_free_stubs(cfg, server_counts)?;
    let nl = cfg.n_large;
    let stubs1 = stubs_from_degrees(&free[..nl]);
    let stubs2: Vec<usize> = stubs_from_degrees(&free[nl..]).into_iter().map(|v| v + nl).collect();
    let (p1, p2) = (stubs1.len(), stubs2.len());
    if cross > p1.min(p2) || (p1 - cross) % 2 == 1 || (p2 - cross) % 2 == 1 {
        return Err(CoreError::InfeasibleBias);
    }
    let none = BTreeSet::new();
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = rng_from_seed(derive_seed(seed, &[attempt]));
        let mut s1 = stubs1.clone();
        let mut s2 = stubs2.clone();
        s1.shuffle(&mut rng);
        s2.shuffle(&mut rng);
        let mut cross_edges: Vec<(usize, usize)> = s1[..cross].iter().copied().zip(s2[..cross].iter().copied()).collect();
        if repair_edges(&mut cross_edges, &none, true, &mut rng).is_err() {
            continue;
        }
        let Some(in1) = intra_edges(&s1[cross..], &mut rng) else { continue };
        let Some(in2) = intra_edges(&s2[cross..], &mut rng) else { continue };
        let mut edges = cross_edges;
        edges.extend(in1);
        edges.extend(in2);
        return Ok(Topology {
            switches: two_class_ports(cfg).iter().enumerate().map(|(i, &k)| SwitchSpec::uniform(i, BASE_SPEED, k)).collect(),
            servers: attach_servers(server_counts, BASE_SPEED),
            links: links_from(&edges, 1.0),
            cluster_of: Some(two_class_labels(cfg)),
        });
    }
    Err(CoreError::GenerationFailed)
}

/// Two-cluster graph plus a random matching among the large switches'
/// high-speed ports.
pub fn gen_linespeed_overlay(
    cfg: &LineSpeedOverlayConfig,
    server_counts: &[usize],
    x_cross: f64,
    seed: u64,
) -> Result<Topology, CoreError> {
    let (p1, p2) = cluster_stub_counts(&cfg.base, server_counts)?;
    let target = cross_target(p1, p2, x_cross)?;
    gen_linespeed_overlay_with_cross(cfg, server_counts, target, seed)
}

pub fn gen_linespeed_overlay_with_cross(
    cfg: &LineSpeedOverlayConfig,
    server_counts: &[usize],
    cross: usize,
    seed: u64,
) -> Result<Topology, CoreError> {
    if !(cfg.high_speed >= 1.0) {
        return Err(CoreError::InvalidInput("high_speed must be >= 1".into()));
    }
    let h = cfg.high_ports_per_large;
    let nl = cfg.base.n_large;
    if (nl * h) % 2 == 1 {
        return Err(CoreError::InfeasibleOverlay);
    }
    let mut t = gen_two_cluster_with_cross(&cfg.base, server_counts, cross, seed)?;
    if h == 0 {
        return Ok(t);
    }
    let speed = cfg.high_speed;
    // a high-speed class equal to the base speed shares ports and pairs with it
    let forbidden: BTreeSet<(usize, usize)> = if speed == BASE_SPEED {
        t.links.iter().filter(|l| l.a < nl && l.b < nl).map(|l| key(l.a, l.b)).collect()
    } else {
        BTreeSet::new()
    };
    let stubs = stubs_from_degrees(&vec![h; nl]);
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = rng_from_seed(derive_seed(seed, &[u64::from_le_bytes(*b"overlay\0"), attempt]));
        let Ok(edges) = match_stubs(&stubs, &forbidden, &mut rng) else { continue };
        for sw in t.switches.iter_mut().take(nl) {
            match sw.ports.iter_mut().find(|p| p.speed == speed) {
                Some(p) => p.count += h,
                None => sw.ports.push(PortClass { speed, count: h }),
            }
        }
        t.links.extend(links_from(&edges, speed));
        return Ok(t);
    }
    Err(CoreError::GenerationFailed)
}

fn vl2_check(da: usize, di: usize) -> Result<(), CoreError> {
    if da < 2 || di < 2 || da % 2 == 1 || di % 2 == 1 {
        return Err(CoreError::InvalidVl2Parameters);
    }
    Ok(())
}

/// VL2 with its full complement of `da * di / 4` ToRs.
pub fn gen_vl2(da: usize, di: usize) -> Result<Topology, CoreError> {
    vl2_check(da, di)?;
    gen_vl2_with_tors(da, di, da * di / 4)
}

/// VL2 fabric with the first `num_tors` ToRs wired round-robin.
///
/// Ids: aggregation switches `0..di`, core switches next, ToRs last.
pub fn gen_vl2_with_tors(da: usize, di: usize, num_tors: usize) -> Result<Topology, CoreError> {
    vl2_check(da, di)?;
    if num_tors > da * di / 4 {
        return Err(CoreError::Infeasible(format!("VL2({da},{di}) has room for {} ToRs", da * di / 4)));
    }
    let cfg = RewiredVl2Config::new(da, di, num_tors);
    let n_core = da / 2;
    let mut switches = Vec::new();
    for a in 0..di {
        switches.push(SwitchSpec::uniform(a, cfg.uplink_speed, da));
    }
    for c in 0..n_core {
        switches.push(SwitchSpec::uniform(di + c, cfg.uplink_speed, di));
    }
    let tor0 = di + n_core;
    let mut links = Vec::new();
    for a in 0..di {
        for c in 0..n_core {
            links.push(Link { a, b: di + c, capacity: cfg.uplink_speed });
        }
    }
    for j in 0..num_tors {
        switches.push(tor_spec(tor0 + j, &cfg));
        for k in 0..cfg.tor_uplinks {
            let agg = (cfg.tor_uplinks * j + k) % di;
            links.push(Link { a: agg, b: tor0 + j, capacity: cfg.uplink_speed });
        }
    }
    Ok(Topology { servers: tor_servers(tor0, &cfg), switches, links, cluster_of: None })
}

fn tor_spec(id: usize, cfg: &RewiredVl2Config) -> SwitchSpec {
    SwitchSpec {
        id,
        ports: vec![
            PortClass { speed: cfg.server_speed, count: cfg.servers_per_tor },
            PortClass { speed: cfg.uplink_speed, count: cfg.tor_uplinks },
        ],
    }
}

fn tor_servers(tor0: usize, cfg: &RewiredVl2Config) -> Vec<ServerAttachment> {
    (0..cfg.num_tors * cfg.servers_per_tor)
        .map(|s| ServerAttachment {
            server_id: s,
            switch_id: tor0 + s / cfg.servers_per_tor,
            access_capacity: cfg.server_speed,
        })
        .collect()
}

/// Per-switch ToR uplink counts for the rewired design, proportional to the
/// port counts of the pooled aggregation and core switches.
pub fn rewired_uplink_quotas(cfg: &RewiredVl2Config) -> Result<Vec<usize>, CoreError> {
    vl2_check(cfg.da, cfg.di)?;
    let ports: Vec<u64> = (0..cfg.di).map(|_| cfg.da as u64).chain((0..cfg.da / 2).map(|_| cfg.di as u64)).collect();
    let uplinks = (cfg.tor_uplinks * cfg.num_tors) as u64;
    if uplinks > ports.iter().sum::<u64>() {
        return Err(CoreError::Infeasible(format!("{} ToRs exceed the fabric's ports", cfg.num_tors)));
    }
    let quotas = largest_remainder(&ports, uplinks);
    for (q, p) in quotas.iter().zip(&ports) {
        if q > p || *q as usize > cfg.num_tors {
            return Err(CoreError::Infeasible("proportional uplink assignment exceeds a switch".into()));
        }
    }
    Ok(quotas.into_iter().map(|q| q as usize).collect())
}

/// VL2 equipment with ToRs spread over aggregation and core switches in
/// proportion to their port counts and the remaining fabric ports wired at
/// random.
pub fn gen_rewired_vl2(cfg: &RewiredVl2Config, seed: u64) -> Result<Topology, CoreError> {
    let quotas = rewired_uplink_quotas(cfg)?;
    if cfg.tor_uplinks != 2 {
        return Err(CoreError::InvalidInput("rewired VL2 assumes two uplinks per ToR".into()));
    }
    let (da, di, t) = (cfg.da, cfg.di, cfg.num_tors);
    let n_fabric = di + da / 2;
    let tor0 = n_fabric;
    let slots: Vec<usize> = quotas.iter().enumerate().flat_map(|(s, &q)| std::iter::repeat_n(s, q)).collect();
    let tor_edges: Vec<(usize, usize)> =
        (0..t).flat_map(|j| [(slots[j], tor0 + j), (slots[j + t], tor0 + j)]).collect();
    let mut free: Vec<usize> = (0..n_fabric)
        .map(|s| if s < di { da } else { di } - quotas[s])
        .collect();
    fix_parity(&mut free);
    let stubs = stubs_from_degrees(&free);
    let none = BTreeSet::new();
    let n = n_fabric + t;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = rng_from_seed(derive_seed(seed, &[attempt]));
        let Ok(mut edges) = match_stubs(&stubs, &none, &mut rng) else { continue };
        if connect_by_swaps(n, &mut edges, &tor_edges, &none, &BTreeSet::new(), &mut rng).is_err() {
            continue;
        }
        let mut switches: Vec<SwitchSpec> = (0..n_fabric)
            .map(|s| SwitchSpec::uniform(s, cfg.uplink_speed, if s < di { da } else { di }))
            .collect();
        switches.extend((0..t).map(|j| tor_spec(tor0 + j, cfg)));
        let mut links = links_from(&edges, cfg.uplink_speed);
        links.extend(tor_edges.iter().map(|&(s, tor)| Link { a: s, b: tor, capacity: cfg.uplink_speed }));
        return Ok(Topology { servers: tor_servers(tor0, cfg), switches, links, cluster_of: None });
    }
    Err(CoreError::GenerationFailed)
}
