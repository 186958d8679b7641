//! Traffic matrices: random permutations, all-to-all and chunky.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::rng::{rng_from_seed, Rng};
use crate::topology::Topology;
use crate::CoreError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    /// Endpoints are server ids.
    Server,
    /// Endpoints are switch ids.
    Switch,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Commodity {
    pub src: usize,
    pub dst: usize,
    pub demand: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrafficMatrix {
    pub aggregation: Aggregation,
    pub commodities: Vec<Commodity>,
}

impl TrafficMatrix {
    pub fn total_demand(&self) -> f64 {
        self.commodities.iter().map(|c| c.demand).sum()
    }

    pub fn len(&self) -> usize {
        self.commodities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.commodities.is_empty()
    }

    /// Same commodities with every source and destination swapped.
    pub fn reversed(&self) -> TrafficMatrix {
        TrafficMatrix {
            aggregation: self.aggregation,
            commodities: self.commodities.iter().map(|c| Commodity { src: c.dst, dst: c.src, ..*c }).collect(),
        }
    }

    /// Switch id hosting each endpoint, per commodity.
    pub fn switch_pairs(&self, t: &Topology) -> Result<Vec<(usize, usize)>, CoreError> {
        let host: BTreeMap<usize, usize> = t.servers.iter().map(|s| (s.server_id, s.switch_id)).collect();
        let index = t.index_of();
        let lookup = |e: usize| -> Result<usize, CoreError> {
            match self.aggregation {
                Aggregation::Server => host.get(&e).copied().ok_or(CoreError::UnknownServer(e)),
                Aggregation::Switch => index.get(&e).map(|_| e).ok_or(CoreError::UnknownSwitch(e)),
            }
        };
        self.commodities.iter().map(|c| Ok((lookup(c.src)?, lookup(c.dst)?))).collect()
    }

    /// Checks the matrix invariants: distinct endpoints, no repeated pair and
    /// positive demands.
    pub fn check(&self) -> Result<(), CoreError> {
        let mut seen = std::collections::BTreeSet::new();
        for c in &self.commodities {
            if c.src == c.dst {
                return Err(CoreError::InvalidInput(format!("commodity {} -> {} loops", c.src, c.dst)));
            }
            if !(c.demand > 0.0) || !c.demand.is_finite() {
                return Err(CoreError::InvalidInput(format!("commodity {} -> {} has demand {}", c.src, c.dst, c.demand)));
            }
            if !seen.insert((c.src, c.dst)) {
                return Err(CoreError::InvalidInput(format!("repeated commodity {} -> {}", c.src, c.dst)));
            }
        }
        Ok(())
    }
}

/// Destination index for each position of `hosts`, a derangement with no
/// position mapped to a position on the same host.
fn host_derangement(hosts: &[usize], rng: &mut Rng) -> Result<Vec<usize>, CoreError> {
    let n = hosts.len();
    let mut per_host: BTreeMap<usize, usize> = BTreeMap::new();
    for &h in hosts {
        *per_host.entry(h).or_insert(0) += 1;
    }
    if n < 2 || per_host.values().any(|&c| 2 * c > n) {
        return Err(CoreError::NoValidPermutation);
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let clash = |perm: &[usize], i: usize| hosts[perm[i]] == hosts[i];
    let limit = 1000 * n + 10_000;
    let mut attempts = 0;
    for i in 0..n {
        while clash(&perm, i) {
            attempts += 1;
            if attempts > limit {
                return Err(CoreError::GenerationFailed);
            }
            let j = rng.random_range(0..n);
            if hosts[perm[j]] != hosts[i] && hosts[perm[i]] != hosts[j] {
                perm.swap(i, j);
            }
        }
    }
    Ok(perm)
}

/// Every server sends one unit to, and receives one unit from, a server on
/// another switch.
pub fn random_permutation(t: &Topology, seed: u64) -> Result<TrafficMatrix, CoreError> {
    let mut rng = rng_from_seed(seed);
    let servers: Vec<usize> = t.servers.iter().map(|s| s.server_id).collect();
    let hosts: Vec<usize> = t.servers.iter().map(|s| s.switch_id).collect();
    let perm = host_derangement(&hosts, &mut rng)?;
    Ok(TrafficMatrix {
        aggregation: Aggregation::Server,
        commodities: (0..servers.len())
            .map(|i| Commodity { src: servers[i], dst: servers[perm[i]], demand: 1.0 })
            .collect(),
    })
}

/// Every server sends one unit to every other server. With `aggregate`
/// the matrix is folded to one commodity per ordered switch pair carrying
/// `s_i * s_j`; pairs on the same switch are then dropped.
pub fn all_to_all(t: &Topology, aggregate: bool) -> Result<TrafficMatrix, CoreError> {
    if t.servers.len() < 2 {
        return Err(CoreError::InvalidInput("all-to-all needs at least 2 servers".into()));
    }
    if !aggregate {
        let ids: Vec<usize> = t.servers.iter().map(|s| s.server_id).collect();
        let commodities = ids
            .iter()
            .flat_map(|&a| ids.iter().filter(move |&&b| b != a).map(move |&b| Commodity { src: a, dst: b, demand: 1.0 }))
            .collect();
        return Ok(TrafficMatrix { aggregation: Aggregation::Server, commodities });
    }
    let counts = t.servers_per_switch();
    let hosts: Vec<(usize, usize)> = t
        .switches
        .iter()
        .zip(&counts)
        .filter(|(_, &c)| c > 0)
        .map(|(s, &c)| (s.id, c))
        .collect();
    let mut commodities = Vec::new();
    for &(a, ca) in &hosts {
        for &(b, cb) in &hosts {
            if a != b {
                commodities.push(Commodity { src: a, dst: b, demand: (ca * cb) as f64 });
            }
        }
    }
    Ok(TrafficMatrix { aggregation: Aggregation::Switch, commodities })
}

/// `x_percent` of the server-hosting switches form a switch-level
/// derangement, server `i` of one sending to server `i` of its partner;
/// servers on the other switches form a server-level permutation.
pub fn chunky(t: &Topology, x_percent: f64, seed: u64) -> Result<TrafficMatrix, CoreError> {
    if !(x_percent > 0.0 && x_percent <= 100.0) {
        return Err(CoreError::InvalidInput("chunky percentage must lie in (0, 100]".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut by_tor: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for s in &t.servers {
        by_tor.entry(s.switch_id).or_default().push(s.server_id);
    }
    let mut tors: Vec<usize> = by_tor.keys().copied().collect();
    let c = (x_percent / 100.0 * tors.len() as f64).round() as usize;
    if c == 1 {
        return Err(CoreError::NoValidTorPermutation);
    }
    tors.shuffle(&mut rng);
    let (chosen, rest) = tors.split_at(c);
    let mut commodities = Vec::new();
    if c > 0 {
        let partner = loop {
            let mut p: Vec<usize> = (0..c).collect();
            p.shuffle(&mut rng);
            if p.iter().enumerate().all(|(i, &j)| i != j) {
                break p;
            }
        };
        for (i, &j) in partner.iter().enumerate() {
            let (a, b) = (&by_tor[&chosen[i]], &by_tor[&chosen[j]]);
            for k in 0..a.len().min(b.len()) {
                commodities.push(Commodity { src: a[k], dst: b[k], demand: 1.0 });
            }
        }
    }
    if !rest.is_empty() {
        let mut rest = rest.to_vec();
        rest.sort_unstable();
        let mut servers = Vec::new();
        let mut hosts = Vec::new();
        for tor in rest {
            for &s in &by_tor[&tor] {
                servers.push(s);
                hosts.push(tor);
            }
        }
        let perm = host_derangement(&hosts, &mut rng)?;
        commodities.extend((0..servers.len()).map(|i| Commodity { src: servers[i], dst: servers[perm[i]], demand: 1.0 }));
    }
    Ok(TrafficMatrix { aggregation: Aggregation::Server, commodities })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{Link, ServerAttachment, SwitchSpec};

    fn star(servers: &[usize]) -> Topology {
        let mut t = Topology {
            switches: (0..servers.len()).map(|i| SwitchSpec::uniform(i, 1.0, 8)).collect(),
            servers: Vec::new(),
            links: (1..servers.len()).map(|i| Link { a: 0, b: i, capacity: 1.0 }).collect(),
            cluster_of: None,
        };
        for (sw, &c) in servers.iter().enumerate() {
            for _ in 0..c {
                let id = t.servers.len();
                t.servers.push(ServerAttachment { server_id: id, switch_id: sw, access_capacity: 1.0 });
            }
        }
        t
    }

    #[test]
    fn permutation_is_a_cross_switch_bijection() {
        let t = star(&[3, 1, 2, 2]);
        let tm = random_permutation(&t, 9).unwrap();
        tm.check().unwrap();
        let mut srcs: Vec<usize> = tm.commodities.iter().map(|c| c.src).collect();
        let mut dsts: Vec<usize> = tm.commodities.iter().map(|c| c.dst).collect();
        srcs.sort();
        dsts.sort();
        assert_eq!(srcs, (0..8).collect::<Vec<_>>());
        assert_eq!(dsts, srcs);
        for (a, b) in tm.switch_pairs(&t).unwrap() {
            assert_ne!(a, b);
        }
        assert_eq!(tm, random_permutation(&t, 9).unwrap());
    }

    #[test]
    fn permutation_rejects_single_switch() {
        assert!(matches!(random_permutation(&star(&[4]), 1), Err(CoreError::NoValidPermutation)));
        assert!(matches!(random_permutation(&star(&[3, 1]), 1), Err(CoreError::NoValidPermutation)));
    }

    #[test]
    fn all_to_all_counts() {
        let t = star(&[1, 1, 1]);
        assert_eq!(all_to_all(&t, false).unwrap().len(), 6);
        let t = star(&[5, 5, 5, 5]);
        let tm = all_to_all(&t, true).unwrap();
        assert_eq!(tm.len(), 12);
        assert!(tm.commodities.iter().all(|c| c.demand == 25.0));
        let t = star(&[2, 0]);
        let tm = all_to_all(&t, false).unwrap();
        assert_eq!(tm.switch_pairs(&t).unwrap(), vec![(0, 0), (0, 0)]);
    }

    #[test]
    fn chunky_rounding() {
        let t = star(&[2; 10]);
        let tm = chunky(&t, 40.0, 5).unwrap();
        assert_eq!(tm.len(), 20);
        tm.check().unwrap();
        let pairs = tm.switch_pairs(&t).unwrap();
        let mut partner: BTreeMap<usize, std::collections::BTreeSet<usize>> = BTreeMap::new();
        for (a, b) in pairs {
            partner.entry(a).or_default().insert(b);
        }
        // the 4 chunky switches each send to exactly one switch
        let whole = partner.values().filter(|s| s.len() == 1).count();
        assert!(whole >= 4);
        assert!(matches!(chunky(&star(&[2; 10]), 10.0, 1), Err(CoreError::NoValidTorPermutation)));
        assert!(chunky(&t, 0.0, 1).is_err());
        let all = chunky(&t, 100.0, 3).unwrap();
        assert_eq!(all.len(), 20);
    }
}
