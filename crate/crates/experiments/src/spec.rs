//! Declarative experiment descriptions.

use serde::{Deserialize, Serialize};

use dctopo_core::flow::AccessModel;

/// How servers are spread over a two-class network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// `total` servers with `share` times the port-proportional count on
    /// the large switches.
    Share { total: usize, share: f64 },
    /// Fixed counts per large and per small switch.
    PerSwitch { large: usize, small: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    Rrg {
        switches: usize,
        degree: usize,
        servers_per_switch: usize,
    },
    TwoClass {
        n_large: usize,
        n_small: usize,
        ports_large: usize,
        ports_small: usize,
        placement: Placement,
        /// Cross-cluster links relative to the unbiased expectation; `None`
        /// builds an unbiased random interconnect.
        cross: Option<f64>,
    },
    PowerLaw {
        switches: usize,
        k_min: usize,
        k_max: usize,
        exponent: f64,
        servers: usize,
        beta: f64,
    },
    Overlay {
        n_large: usize,
        n_small: usize,
        ports_large: usize,
        ports_small: usize,
        placement: Placement,
        high_ports: usize,
        high_speed: f64,
        cross: f64,
    },
    Vl2 {
        da: usize,
        di: usize,
    },
    RewiredVl2 {
        da: usize,
        di: usize,
        /// Defaults to the VL2 ToR count `da * di / 4`.
        tors: Option<usize>,
    },
}

/// The family parameter replaced by each sweep value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Degree,
    Switches,
    ServerShare,
    Cross,
    Beta,
    ChunkyPercent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrafficKind {
    Permutation,
    /// Switch-level all-to-all.
    AllToAll,
    /// Chunky with this percentage of ToRs; 0 falls back to a permutation.
    Chunky(f64),
    /// No flow is solved; rows carry only the graph metrics.
    None,
}

fn default_runs() -> usize {
    20
}

fn default_access() -> AccessModel {
    AccessModel::Unconstrained
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub family: Family,
    pub axis: Axis,
    pub sweep: Vec<f64>,
    pub traffic: TrafficKind,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_access")]
    pub access: AccessModel,
    /// Second LP phase that removes detours from the optimal flow.
    #[serde(default)]
    pub min_flow: bool,
}

impl ExperimentSpec {
    pub fn check(&self) -> Result<(), String> {
        if self.runs == 0 {
            return Err(format!("{}: runs must be at least 1", self.name));
        }
        if self.sweep.is_empty() {
            return Err(format!("{}: empty sweep", self.name));
        }
        if self.sweep.iter().any(|v| !v.is_finite()) || self.sweep.windows(2).any(|w| w[0] >= w[1]) {
            return Err(format!("{}: sweep values must be finite and increasing", self.name));
        }
        Ok(())
    }

    /// The family with the sweep axis set to `value`.
    pub fn family_at(&self, value: f64) -> Result<(Family, TrafficKind), String> {
        let mut family = self.family.clone();
        let mut traffic = self.traffic.clone();
        let whole = |v: f64| -> Result<usize, String> {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(format!("axis value {v} must be a non-negative integer"))
            }
        };
        match (self.axis, &mut family) {
            (Axis::Degree, Family::Rrg { degree, .. }) => *degree = whole(value)?,
            (Axis::Switches, Family::Rrg { switches, .. }) => *switches = whole(value)?,
            (Axis::ServerShare, Family::TwoClass { placement: Placement::Share { share, .. }, .. }) => *share = value,
            (Axis::Cross, Family::TwoClass { cross, .. }) => *cross = Some(value),
            (Axis::Cross, Family::Overlay { cross, .. }) => *cross = value,
            (Axis::Beta, Family::PowerLaw { beta, .. }) => *beta = value,
            (Axis::ChunkyPercent, _) => traffic = TrafficKind::Chunky(value),
            (axis, _) => return Err(format!("axis {axis:?} does not apply to this family")),
        }
        Ok((family, traffic))
    }
}
