//! One topology and traffic matrix per experiment cell.

use std::collections::BTreeMap;

use dctopo_core::bounds::aspl_lower_bound;
use dctopo_core::generators::*;
use dctopo_core::rng::derive_seed;
use dctopo_core::topology::Topology;
use dctopo_core::traffic::{all_to_all, chunky, random_permutation, TrafficMatrix};
use dctopo_core::CoreError;

use crate::spec::{Family, Placement, TrafficKind};

pub struct Instance {
    pub topology: Topology,
    pub traffic: Option<TrafficMatrix>,
    /// `(N, r)` for regular families.
    pub regular: Option<(usize, usize)>,
    pub d_star: Option<f64>,
}

fn placement_counts(cfg: &TwoClassConfig, placement: &Placement) -> Result<Vec<usize>, CoreError> {
    match *placement {
        Placement::Share { share, .. } => server_distribution_two_class(cfg, share),
        Placement::PerSwitch { large, small } => {
            if large > cfg.ports_large || small > cfg.ports_small {
                return Err(CoreError::InfeasibleDistribution);
            }
            Ok(std::iter::repeat_n(large, cfg.n_large).chain(std::iter::repeat_n(small, cfg.n_small)).collect())
        }
    }
}

fn two_class_cfg(n_large: usize, n_small: usize, ports_large: usize, ports_small: usize, placement: &Placement) -> TwoClassConfig {
    let total_servers = match *placement {
        Placement::Share { total, .. } => total,
        Placement::PerSwitch { large, small } => n_large * large + n_small * small,
    };
    TwoClassConfig { n_large, n_small, ports_large, ports_small, total_servers }
}

/// Cross-link count nearest to `x` times the unbiased expectation.
fn snapped_cross(cfg: &TwoClassConfig, counts: &[usize], x: f64) -> Result<usize, CoreError> {
    let (p1, p2) = cluster_stub_counts(cfg, counts)?;
    nearest_feasible_cross(p1, p2, x).map(|(c, _)| c).ok_or(CoreError::InfeasibleBias)
}

pub fn build(family: &Family, traffic: &TrafficKind, seed: u64) -> Result<Instance, CoreError> {
    let topo_seed = derive_seed(seed, &[0]);
    let tm_seed = derive_seed(seed, &[1]);
    let mut regular = None;
    let mut d_star = None;
    let topology = match family {
        &Family::Rrg { switches, degree, servers_per_switch } => {
            regular = Some((switches, degree));
            d_star = Some(aspl_lower_bound(switches as u64, degree as u64)?);
            with_servers(gen_rrg(switches, degree, topo_seed)?, &vec![servers_per_switch; switches], 1.0)
        }
        Family::TwoClass { n_large, n_small, ports_large, ports_small, placement, cross } => {
            let cfg = two_class_cfg(*n_large, *n_small, *ports_large, *ports_small, placement);
            let counts = placement_counts(&cfg, placement)?;
            match cross {
                None => gen_two_class_random(&cfg, &counts, topo_seed)?,
                Some(x) => gen_two_cluster_with_cross(&cfg, &counts, snapped_cross(&cfg, &counts, *x)?, topo_seed)?,
            }
        }
        &Family::PowerLaw { switches, k_min, k_max, exponent, servers, beta } => {
            let ports = powerlaw_port_counts(switches, k_min, k_max, exponent, derive_seed(topo_seed, &[0]))?;
            let counts = server_distribution_powerlaw(&ports, beta, servers)?;
            gen_degree_sequence(&ports, &counts, derive_seed(topo_seed, &[1]))?
        }
        Family::Overlay { n_large, n_small, ports_large, ports_small, placement, high_ports, high_speed, cross } => {
            let base = two_class_cfg(*n_large, *n_small, *ports_large, *ports_small, placement);
            let counts = placement_counts(&base, placement)?;
            let cfg = LineSpeedOverlayConfig { base, high_ports_per_large: *high_ports, high_speed: *high_speed };
            gen_linespeed_overlay_with_cross(&cfg, &counts, snapped_cross(&base, &counts, *cross)?, topo_seed)?
        }
        &Family::Vl2 { da, di } => gen_vl2(da, di)?,
        &Family::RewiredVl2 { da, di, tors } => {
            gen_rewired_vl2(&RewiredVl2Config::new(da, di, tors.unwrap_or(da * di / 4)), topo_seed)?
        }
    };
    let traffic = traffic_for(&topology, traffic, tm_seed)?;
    Ok(Instance { topology, traffic, regular, d_star })
}

pub fn traffic_for(t: &Topology, kind: &TrafficKind, seed: u64) -> Result<Option<TrafficMatrix>, CoreError> {
    Ok(match *kind {
        TrafficKind::Permutation => Some(random_permutation(t, seed)?),
        TrafficKind::AllToAll => Some(all_to_all(t, true)?),
        TrafficKind::Chunky(x) if x == 0.0 => Some(random_permutation(t, seed)?),
        TrafficKind::Chunky(x) => Some(chunky(t, x, seed)?),
        TrafficKind::None => None,
    })
}

/// Servers per cluster label.
pub fn servers_by_cluster(t: &Topology) -> Option<BTreeMap<u8, usize>> {
    let labels = t.cluster_of.as_ref()?;
    let mut n: BTreeMap<u8, usize> = BTreeMap::new();
    for s in &t.servers {
        *n.entry(labels[&s.switch_id]).or_insert(0) += 1;
    }
    Some(n)
}

/// Servers in the large and small cluster, when the family has two.
pub fn cluster_servers(family: &Family) -> Option<(usize, usize)> {
    let (n_large, n_small, ports_large, ports_small, placement) = match family {
        Family::TwoClass { n_large, n_small, ports_large, ports_small, placement, .. }
        | Family::Overlay { n_large, n_small, ports_large, ports_small, placement, .. } => {
            (*n_large, *n_small, *ports_large, *ports_small, placement)
        }
        _ => return None,
    };
    let cfg = two_class_cfg(n_large, n_small, ports_large, ports_small, placement);
    let counts = placement_counts(&cfg, placement).ok()?;
    let n1: usize = counts[..n_large].iter().sum();
    Some((n1, counts.iter().sum::<usize>() - n1))
}
