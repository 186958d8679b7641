//! Servers supported at full throughput: VL2 against its rewired variant.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use dctopo_core::flow::{max_concurrent_flow, max_supported_load, FlowOptions};
use dctopo_core::generators::{gen_rewired_vl2, gen_vl2, RewiredVl2Config};
use dctopo_core::rng::derive_seed;
use dctopo_core::topology::Topology;
use dctopo_core::traffic::TrafficMatrix;
use dctopo_core::CoreError;

use crate::instance::traffic_for;
use crate::spec::TrafficKind;

#[derive(Debug, Error)]
pub enum Vl2Error {
    #[error("baseline violation: VL2({da},{di}) reaches only {throughput} in run {run}")]
    BaselineViolation { da: usize, di: usize, run: usize, throughput: f64 },
    #[error(transparent)]
    Core(#[from] CoreError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vl2Comparison {
    pub vl2_tors: usize,
    pub rewired_tors: usize,
    pub gain_percent: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vl2Row {
    pub preset: String,
    pub da: usize,
    pub di: usize,
    pub traffic: String,
    pub vl2_tors: Option<usize>,
    pub rewired_tors: Option<usize>,
    pub gain_percent: Option<f64>,
    pub status: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Vl2Task {
    pub preset: String,
    pub da: usize,
    pub di: usize,
    pub traffic: TrafficKind,
}

pub fn traffic_label(kind: &TrafficKind) -> String {
    match kind {
        TrafficKind::Permutation => "permutation".into(),
        TrafficKind::AllToAll => "all_to_all".into(),
        TrafficKind::Chunky(x) => format!("chunky{x}"),
        TrafficKind::None => "none".into(),
    }
}

/// Traffic for a full-throughput check. All-to-all demands are scaled by
/// `1 / (S - 1)` so that `t = 1` means every server sends at line rate.
fn matrix(t: &Topology, kind: &TrafficKind, seed: u64) -> Result<TrafficMatrix, CoreError> {
    let mut tm = traffic_for(t, kind, seed)?.ok_or(CoreError::NoCommodities)?;
    if *kind == TrafficKind::AllToAll {
        let scale = 1.0 / (t.servers.len() - 1) as f64;
        for c in &mut tm.commodities {
            c.demand *= scale;
        }
    }
    Ok(tm)
}

/// Rewired VL2 with `tors` ToRs and its traffic matrix.
pub fn rewired_instance(
    da: usize,
    di: usize,
    tors: usize,
    kind: &TrafficKind,
    seed: u64,
) -> Result<(Topology, TrafficMatrix), CoreError> {
    let t = gen_rewired_vl2(&RewiredVl2Config::new(da, di, tors), derive_seed(seed, &[0]))?;
    let tm = matrix(&t, kind, derive_seed(seed, &[1]))?;
    Ok((t, tm))
}

/// Checks that VL2 carries `kind` at full throughput with its `DA DI / 4`
/// ToRs, then finds the most ToRs the rewired equipment carries by binary
/// search over `2..=3 DA DI / 4`.
pub fn vl2_compare(
    da: usize,
    di: usize,
    kind: &TrafficKind,
    runs: usize,
    eps: f64,
    seed: u64,
    opts: &FlowOptions,
) -> Result<Vl2Comparison, Vl2Error> {
    let vl2_tors = da * di / 4;
    let base = gen_vl2(da, di)?;
    for run in 0..runs {
        let tm = matrix(&base, kind, derive_seed(seed, &[0, run as u64]))?;
        let throughput = max_concurrent_flow(&base, &tm, opts)?.throughput;
        if throughput < 1.0 - eps {
            return Err(Vl2Error::BaselineViolation { da, di, run, throughput });
        }
    }
    let hi = (3 * da * di / 4) as u64;
    let rewired_tors = max_supported_load(
        |load, s| rewired_instance(da, di, load as usize, kind, s),
        runs,
        eps,
        (2, hi),
        derive_seed(seed, &[1]),
        opts,
    )? as usize;
    let gain_percent = 100.0 * (rewired_tors as f64 - vl2_tors as f64) / vl2_tors as f64;
    Ok(Vl2Comparison { vl2_tors, rewired_tors, gain_percent })
}

/// One row per task, in task order; failures are recorded in `status`.
pub fn run_vl2_tasks(tasks: &[Vl2Task], runs: usize, eps: f64, seed: u64, opts: &FlowOptions) -> Vec<Vl2Row> {
    tasks
        .par_iter()
        .map(|task| {
            let mut row = Vl2Row {
                preset: task.preset.clone(),
                da: task.da,
                di: task.di,
                traffic: traffic_label(&task.traffic),
                vl2_tors: None,
                rewired_tors: None,
                gain_percent: None,
                status: "ok".into(),
            };
            match vl2_compare(task.da, task.di, &task.traffic, runs, eps, seed, opts) {
                Ok(c) => {
                    row.vl2_tors = Some(c.vl2_tors);
                    row.rewired_tors = Some(c.rewired_tors);
                    row.gain_percent = Some(crate::runner::round_sig(c.gain_percent));
                }
                Err(e) => row.status = e.to_string(),
            }
            row
        })
        .collect()
}
