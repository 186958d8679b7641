//! Seeded sweep execution.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use dctopo_core::bounds::{drop_threshold, hetero_throughput_bound, homog_throughput_bound};
use dctopo_core::flow::{decompose, max_concurrent_flow, FlowOptions};
use dctopo_core::rng::derive_seed;
use dctopo_core::topology::{aspl, cut_capacity, total_capacity, PairSelector};
use dctopo_core::CoreError;

use crate::instance::{build, servers_by_cluster, Instance};
use crate::spec::{Axis, ExperimentSpec, TrafficKind};

/// One (sweep value, seed) run. Cells that do not apply are `None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub preset: String,
    pub sweep: f64,
    pub seed: u64,
    pub throughput: Option<f64>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    #[serde(rename = "C_bar")]
    pub c_bar: Option<f64>,
    #[serde(rename = "U")]
    pub u: Option<f64>,
    #[serde(rename = "D_flows")]
    pub d_flows: Option<f64>,
    #[serde(rename = "AS")]
    pub stretch: Option<f64>,
    pub path_bound: Option<f64>,
    pub cut_bound: Option<f64>,
    pub d_star: Option<f64>,
    pub seconds: Option<f64>,
    pub status: String,
}

impl ResultRow {
    fn empty(preset: &str, sweep: f64, seed: u64) -> Self {
        ResultRow {
            preset: preset.to_string(),
            sweep,
            seed,
            throughput: None,
            c: None,
            c_bar: None,
            u: None,
            d_flows: None,
            stretch: None,
            path_bound: None,
            cut_bound: None,
            d_star: None,
            seconds: None,
            status: String::new(),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    /// Rounds every float to the exported precision.
    fn rounded(mut self) -> Self {
        self.sweep = round_sig(self.sweep);
        for v in [
            &mut self.throughput,
            &mut self.c,
            &mut self.c_bar,
            &mut self.u,
            &mut self.d_flows,
            &mut self.stretch,
            &mut self.path_bound,
            &mut self.cut_bound,
            &mut self.d_star,
            &mut self.seconds,
        ] {
            *v = v.map(round_sig);
        }
        self
    }
}

/// `x` rounded to 9 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub time_limit: Option<Duration>,
    /// Fill the seconds column; makes output timing dependent.
    pub timing: bool,
}

/// Mean and spread of one sweep value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub preset: String,
    pub sweep: f64,
    pub runs: usize,
    pub ok: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub c_bar_mean: Option<f64>,
    /// Cut capacity below which throughput must fall under the sweep peak.
    pub c_bar_star: Option<f64>,
}

fn flow_options(spec: &ExperimentSpec, opts: &RunOptions) -> FlowOptions {
    FlowOptions {
        access: spec.access,
        time_limit: opts.time_limit,
        min_total_flow: spec.min_flow,
        ..FlowOptions::default()
    }
}

fn fill(row: &mut ResultRow, inst: &Instance, spec: &ExperimentSpec, opts: &RunOptions) -> Result<(), CoreError> {
    let t = &inst.topology;
    let c = total_capacity(t);
    row.c = Some(c);
    row.d_star = inst.d_star;
    if let Some(labels) = &t.cluster_of {
        row.c_bar = Some(cut_capacity(t, labels)?);
    }
    let Some(tm) = &inst.traffic else {
        row.d_flows = Some(aspl(t, &PairSelector::AllPairs)?);
        return Ok(());
    };
    let sol = max_concurrent_flow(t, tm, &flow_options(spec, opts))?;
    row.throughput = Some(sol.throughput);
    let f = tm.total_demand();
    if let Some((n, r)) = inst.regular {
        let d = aspl(t, &PairSelector::AllPairs)?;
        row.path_bound = Some(homog_throughput_bound(n as u64, r as u64, f, Some(d))?);
    }
    match decompose(t, tm, &sol) {
        Ok(rep) => {
            row.u = Some(rep.u);
            row.d_flows = Some(rep.d_flows);
            row.stretch = Some(rep.stretch);
            if inst.regular.is_none() {
                row.path_bound = Some(c / (rep.d_flows * rep.f_effective));
            }
        }
        Err(CoreError::DegenerateDecomposition) => {}
        Err(e) => return Err(e),
    }
    if let (Some(c_bar), Some(d), Some(n)) = (row.c_bar, row.d_flows, servers_by_cluster(t)) {
        if spec.traffic == TrafficKind::Permutation && n.len() == 2 {
            let mut it = n.values();
            let (n1, n2) = (*it.next().unwrap() as f64, *it.next().unwrap() as f64);
            if n1 > 0.0 && n2 > 0.0 {
                row.cut_bound = Some(hetero_throughput_bound(c, c_bar, n1, n2, d)?.cut_bound);
            }
        }
    }
    Ok(())
}

fn run_cell(spec: &ExperimentSpec, value: f64, seed: u64, opts: &RunOptions) -> ResultRow {
    let start = Instant::now();
    let mut row = ResultRow::empty(&spec.name, value, seed);
    let result = spec
        .family_at(value)
        .map_err(CoreError::InvalidInput)
        .and_then(|(family, traffic)| build(&family, &traffic, seed))
        .and_then(|inst| fill(&mut row, &inst, spec, opts));
    row.status = match result {
        Ok(()) => "ok".into(),
        // a timed-out solve keeps the graph metrics
        Err(e @ CoreError::Timeout { .. }) => e.to_string(),
        Err(e) => {
            row = ResultRow::empty(&spec.name, value, seed);
            e.to_string()
        }
    };
    if opts.timing {
        row.seconds = Some(start.elapsed().as_secs_f64());
    }
    row.rounded()
}

/// Seed of run `run` at sweep index `sweep_idx`.
pub fn cell_seed(master: u64, sweep_idx: usize, run: usize) -> u64 {
    derive_seed(master, &[sweep_idx as u64, run as u64])
}

/// Runs every (sweep value, seed) cell, in parallel on the current rayon
/// pool. Rows come back ordered by sweep value, then run.
pub fn run_experiment(spec: &ExperimentSpec, opts: &RunOptions) -> Result<Vec<ResultRow>, String> {
    spec.check()?;
    let cells: Vec<(f64, u64)> = spec
        .sweep
        .iter()
        .enumerate()
        .flat_map(|(i, &v)| (0..spec.runs).map(move |k| (v, cell_seed(spec.seed, i, k))))
        .collect();
    Ok(cells.par_iter().map(|&(v, seed)| run_cell(spec, v, seed, opts)).collect())
}

fn mean_std(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let std = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (Some(mean), Some(std))
}

/// Per sweep value statistics over the `ok` rows. For cluster families the
/// peak mean throughput `T*` gives the marker `C_bar*`.
pub fn summarize(spec: &ExperimentSpec, rows: &[ResultRow]) -> Vec<SummaryRow> {
    let clusters = crate::instance::cluster_servers(&spec.family);
    let mut out: Vec<SummaryRow> = Vec::new();
    for &v in &spec.sweep {
        let v = round_sig(v);
        let group: Vec<&ResultRow> = rows.iter().filter(|r| r.preset == spec.name && r.sweep == v).collect();
        let ok: Vec<&&ResultRow> = group.iter().filter(|r| r.is_ok()).collect();
        let ts: Vec<f64> = ok.iter().filter_map(|r| r.throughput).collect();
        let cb: Vec<f64> = ok.iter().filter_map(|r| r.c_bar).collect();
        let (mean, std) = mean_std(&ts);
        out.push(SummaryRow {
            preset: spec.name.clone(),
            sweep: v,
            runs: group.len(),
            ok: ok.len(),
            mean: mean.map(round_sig),
            std: std.map(round_sig),
            c_bar_mean: mean_std(&cb).0.map(round_sig),
            c_bar_star: None,
        });
    }
    let t_star = out.iter().filter_map(|s| s.mean).fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.max(x))));
    if let (Some((n1, n2)), Some(t_star), TrafficKind::Permutation, Axis::Cross) = (clusters, t_star, &spec.traffic, spec.axis) {
        let marker = round_sig(drop_threshold(t_star, n1 as f64, n2 as f64));
        for s in &mut out {
            s.c_bar_star = Some(marker);
        }
    }
    out
}
