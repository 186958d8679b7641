#![allow(dead_code)]

pub mod oracle;

use dctopo_core::topology::{Link, ServerAttachment, SwitchSpec, Topology};

/// Unit ring of `n` switches with `per` servers each.
pub fn ring(n: usize, per: usize) -> Topology {
    Topology {
        switches: (0..n).map(|i| SwitchSpec::uniform(i, 1.0, 2 + per)).collect(),
        servers: (0..n * per)
            .map(|s| ServerAttachment { server_id: s, switch_id: s / per, access_capacity: 1.0 })
            .collect(),
        links: (0..n).map(|i| Link { a: i, b: (i + 1) % n, capacity: 1.0 }).collect(),
        cluster_of: None,
    }
}

/// The Petersen graph with unit links.
pub fn petersen() -> Topology {
    let mut links = Vec::new();
    for i in 0..5 {
        links.push(Link { a: i, b: (i + 1) % 5, capacity: 1.0 });
        links.push(Link { a: i, b: i + 5, capacity: 1.0 });
        links.push(Link { a: 5 + i, b: 5 + (i + 2) % 5, capacity: 1.0 });
    }
    Topology {
        switches: (0..10).map(|i| SwitchSpec::uniform(i, 1.0, 3)).collect(),
        servers: Vec::new(),
        links,
        cluster_of: None,
    }
}
