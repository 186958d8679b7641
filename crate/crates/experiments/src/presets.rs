//! Figure presets. Values absent from the figure descriptions are required
//! parameters (`key=value`) instead of defaults.

use std::collections::BTreeMap;
use std::str::FromStr;

use thiserror::Error;

use dctopo_core::flow::AccessModel;

use crate::spec::{Axis, ExperimentSpec, Family, Placement, TrafficKind};
use crate::vl2::Vl2Task;

pub type Params = BTreeMap<String, String>;

#[derive(Debug, Error, PartialEq)]
pub enum PresetError {
    #[error("unknown preset {0:?}; known: {known}", known = PRESETS.join(", "))]
    Unknown(String),
    #[error("preset {preset} requires --param {param}=...")]
    Missing { preset: String, param: String },
    #[error("bad value {value:?} for parameter {param}")]
    Invalid { param: String, value: String },
}

pub enum Plan {
    Flow(Vec<ExperimentSpec>),
    Vl2(Vec<Vl2Task>),
}

pub const PRESETS: &[&str] = &[
    "fig1",
    "fig2",
    "boundcompare",
    "fig3a",
    "fig3b",
    "fig3c",
    "fig4",
    "fig5a",
    "fig5b",
    "fig5c",
    "fig6a",
    "fig6b",
    "fig7a",
    "fig7b",
    "fig7c",
    "fig9",
    "fig10a",
    "fig10b",
    "fig10c",
];

const SHARE_SWEEP: [f64; 9] = [0.4, 0.55, 0.7, 0.85, 1.0, 1.15, 1.3, 1.45, 1.6];
const CROSS_SWEEP: [f64; 12] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0];

struct Args<'a> {
    preset: &'a str,
    params: &'a Params,
}

impl Args<'_> {
    fn raw(&self, key: &str) -> Result<&str, PresetError> {
        self.params.get(key).map(String::as_str).ok_or_else(|| PresetError::Missing {
            preset: self.preset.to_string(),
            param: key.to_string(),
        })
    }

    fn one<T: FromStr>(&self, key: &str) -> Result<T, PresetError> {
        let v = self.raw(key)?;
        v.trim().parse().map_err(|_| PresetError::Invalid { param: key.into(), value: v.into() })
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>, PresetError> {
        let v = self.raw(key)?;
        v.split(',')
            .map(|x| x.trim().parse().map_err(|_| PresetError::Invalid { param: key.into(), value: v.into() }))
            .collect()
    }

    /// `large:small` per-switch server counts, comma separated.
    fn dists(&self, key: &str) -> Result<Vec<(usize, usize)>, PresetError> {
        let v = self.raw(key)?;
        let bad = || PresetError::Invalid { param: key.into(), value: v.into() };
        v.split(',')
            .map(|d| {
                let (h, l) = d.split_once(':').ok_or_else(bad)?;
                Ok((h.trim().parse().map_err(|_| bad())?, l.trim().parse().map_err(|_| bad())?))
            })
            .collect()
    }

    fn sweep(&self, default: &[f64]) -> Result<Vec<f64>, PresetError> {
        if self.params.contains_key("sweep") {
            self.list("sweep")
        } else {
            Ok(default.to_vec())
        }
    }
}

fn spec(name: String, family: Family, axis: Axis, sweep: &[f64], traffic: TrafficKind) -> ExperimentSpec {
    ExperimentSpec {
        name,
        family,
        axis,
        sweep: sweep.to_vec(),
        traffic,
        runs: 20,
        seed: 0,
        access: AccessModel::Unconstrained,
        min_flow: false,
    }
}

fn two_class(n_large: usize, n_small: usize, ports_large: usize, ports_small: usize, placement: Placement) -> Family {
    Family::TwoClass { n_large, n_small, ports_large, ports_small, placement, cross: None }
}

fn share(total: usize) -> Placement {
    Placement::Share { total, share: 1.0 }
}

/// Builds the plan of `name`. Every preset accepts `sweep=v1,v2,...` to
/// replace its default sweep.
pub fn preset(name: &str, params: &Params) -> Result<Plan, PresetError> {
    let a = Args { preset: name, params };
    let perm = || TrafficKind::Permutation;
    let flow = |specs: Vec<ExperimentSpec>| Ok(Plan::Flow(specs));
    match name {
        "fig1" => {
            let sweep = a.sweep(&[4.0, 6.0, 8.0, 10.0, 13.0, 16.0, 20.0, 25.0, 30.0, 35.0])?;
            let rrg = |s| Family::Rrg { switches: 40, degree: 0, servers_per_switch: s };
            flow(vec![
                spec("fig1/perm5".into(), rrg(5), Axis::Degree, &sweep, perm()),
                spec("fig1/perm10".into(), rrg(10), Axis::Degree, &sweep, perm()),
                spec("fig1/a2a".into(), rrg(5), Axis::Degree, &sweep, TrafficKind::AllToAll),
            ])
        }
        "fig2" => {
            let s = a.one("servers_per_switch")?;
            let sweep = a.sweep(&[20.0, 40.0, 60.0, 80.0, 100.0, 120.0, 160.0, 200.0])?;
            let family = Family::Rrg { switches: 0, degree: 10, servers_per_switch: s };
            flow(vec![spec("fig2/perm".into(), family, Axis::Switches, &sweep, perm())])
        }
        "boundcompare" => {
            let sweep =
                a.sweep(&[10.0, 17.0, 20.0, 35.0, 53.0, 80.0, 110.0, 161.0, 250.0, 350.0, 485.0])?;
            let family = Family::Rrg { switches: 0, degree: 4, servers_per_switch: 0 };
            flow(vec![spec("boundcompare".into(), family, Axis::Switches, &sweep, TrafficKind::None)])
        }
        "fig3a" | "fig3b" | "fig3c" | "fig5a" | "fig5b" | "fig5c" => {
            let (axis, default): (Axis, &[f64]) =
                if name.starts_with("fig3") { (Axis::ServerShare, &SHARE_SWEEP) } else { (Axis::Cross, &CROSS_SWEEP) };
            let sweep = a.sweep(default)?;
            let mut series: Vec<(String, Family)> = match &name[4..] {
                "a" => {
                    let total = a.one("servers")?;
                    [10, 15, 20].iter().map(|&p| (format!("small{p}"), two_class(20, 40, 30, p, share(total)))).collect()
                }
                "b" => {
                    let total = a.one("servers")?;
                    [20, 30, 40].iter().map(|&n| (format!("n_small{n}"), two_class(20, n, 30, 20, share(total)))).collect()
                }
                _ => {
                    let totals: Vec<usize> =
                        if name == "fig3c" { vec![480, 510, 540] } else { a.list("servers")? };
                    totals.iter().map(|&s| (format!("servers{s}"), two_class(20, 30, 30, 20, share(s)))).collect()
                }
            };
            if axis == Axis::Cross {
                for (_, f) in &mut series {
                    if let Family::TwoClass { cross, .. } = f {
                        *cross = Some(1.0);
                    }
                }
            }
            flow(series
                .into_iter()
                .map(|(label, family)| {
                    let mut s = spec(format!("{name}/{label}"), family, axis, &sweep, perm());
                    s.min_flow = name.ends_with('c');
                    s
                })
                .collect())
        }
        "fig4" => {
            let family = Family::PowerLaw {
                switches: a.one("switches")?,
                k_min: a.one("k_min")?,
                k_max: a.one("k_max")?,
                exponent: a.one("exponent")?,
                servers: a.one("servers")?,
                beta: 1.0,
            };
            let sweep = a.sweep(&[0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0])?;
            flow(vec![spec("fig4".into(), family, Axis::Beta, &sweep, perm())])
        }
        "fig6a" | "fig6b" => {
            let ports_small = if name == "fig6a" { 10 } else { 20 };
            let sweep = a.sweep(&CROSS_SWEEP)?;
            flow(a
                .dists("dists")?
                .into_iter()
                .map(|(h, l)| {
                    let mut family = two_class(20, 40, 30, ports_small, Placement::PerSwitch { large: h, small: l });
                    if let Family::TwoClass { cross, .. } = &mut family {
                        *cross = Some(1.0);
                    }
                    let mut s = spec(format!("{name}/{h}H{l}L"), family, Axis::Cross, &sweep, perm());
                    s.runs = 10;
                    s
                })
                .collect())
        }
        "fig7a" | "fig7b" | "fig7c" => {
            let sweep = a.sweep(&CROSS_SWEEP)?;
            let overlay = |(h, l): (usize, usize), high_ports, high_speed| Family::Overlay {
                n_large: 20,
                n_small: 20,
                ports_large: 40,
                ports_small: 15,
                placement: Placement::PerSwitch { large: h, small: l },
                high_ports,
                high_speed,
                cross: 1.0,
            };
            let series: Vec<(String, Family)> = match name {
                "fig7a" => a.dists("dists")?.into_iter().map(|d| (format!("{}H{}L", d.0, d.1), overlay(d, 3, 10.0))).collect(),
                "fig7b" => {
                    let d = a.dists("dist")?[0];
                    a.list::<f64>("speeds")?.into_iter().map(|v| (format!("speed{v}"), overlay(d, 6, v))).collect()
                }
                _ => {
                    let d = a.dists("dist")?[0];
                    a.list::<usize>("counts")?.into_iter().map(|k| (format!("links{k}"), overlay(d, k, 4.0))).collect()
                }
            };
            flow(series
                .into_iter()
                .map(|(label, family)| {
                    let mut s = spec(format!("{name}/{label}"), family, Axis::Cross, &sweep, perm());
                    s.min_flow = name == "fig7c";
                    s
                })
                .collect())
        }
        "fig9" => {
            let mut family = two_class(
                a.one("n_large")?,
                a.one("n_small")?,
                a.one("ports_large")?,
                a.one("ports_small")?,
                share(a.one("servers")?),
            );
            if let Family::TwoClass { cross, .. } = &mut family {
                *cross = Some(1.0);
            }
            let sweep = a.sweep(&CROSS_SWEEP)?;
            flow(vec![spec("fig9".into(), family, Axis::Cross, &sweep, perm())])
        }
        "fig10a" | "fig10c" => {
            let da: usize = a.one("da")?;
            let kinds = if name == "fig10a" {
                vec![perm()]
            } else {
                vec![TrafficKind::AllToAll, perm(), TrafficKind::Chunky(100.0)]
            };
            let mut tasks = Vec::new();
            for di in a.list::<usize>("di")? {
                for k in &kinds {
                    tasks.push(Vl2Task { preset: name.into(), da, di, traffic: k.clone() });
                }
            }
            Ok(Plan::Vl2(tasks))
        }
        "fig10b" => {
            let (da, di) = (a.one("da")?, a.one("di")?);
            let sweep = a.list::<f64>("percents")?;
            let tors = a.one("tors")?;
            let mut rewired = spec(
                format!("{name}/rewired"),
                Family::RewiredVl2 { da, di, tors: Some(tors) },
                Axis::ChunkyPercent,
                &sweep,
                perm(),
            );
            let mut vl2 = spec(format!("{name}/vl2"), Family::Vl2 { da, di }, Axis::ChunkyPercent, &sweep, perm());
            rewired.access = AccessModel::Capacitated;
            vl2.access = AccessModel::Capacitated;
            flow(vec![vl2, rewired])
        }
        _ => Err(PresetError::Unknown(name.into())),
    }
}
