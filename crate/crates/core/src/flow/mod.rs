//! Maximum concurrent multi-commodity flow: formulation, solution and
//! analysis of the routed flow.

mod analysis;
mod load;
mod model;
mod paths;

use std::time::Duration;

use dctopo_lp::{solve as lp_solve, Sense, SolveOptions, Status, Var};
use log::debug;
use serde::{Deserialize, Serialize};

use crate::topology::Topology;
use crate::traffic::TrafficMatrix;
use crate::CoreError;

pub use analysis::{decompose, utilization_by_class, DecompositionReport};
pub use load::max_supported_load;
pub use model::{formulate, FlowModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Formulation {
    /// One variable per commodity and directed arc.
    Explicit,
    /// One flow group per source switch.
    Compact,
    /// Paths per switch pair, generated as needed.
    Paths,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AccessModel {
    /// Server access links bound the flow.
    Capacitated,
    /// Only switch-switch links bound the flow.
    Unconstrained,
}

#[derive(Clone, Debug)]
pub struct FlowOptions {
    pub formulation: Formulation,
    pub access: AccessModel,
    pub time_limit: Option<Duration>,
    /// After maximizing `t`, hold it (less a relative `1e-9`) and minimize
    /// the total switch-link flow, so no capacity is spent on detours.
    pub min_total_flow: bool,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            formulation: Formulation::Paths,
            access: AccessModel::Capacitated,
            time_limit: None,
            min_total_flow: false,
        }
    }
}

impl FlowOptions {
    pub fn unconstrained() -> Self {
        FlowOptions { access: AccessModel::Unconstrained, ..Self::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowSolution {
    pub throughput: f64,
    /// Flow on directed switch arc `2 l` (link `l` from `a` to `b`) and
    /// `2 l + 1` (from `b` to `a`).
    pub edge_flow: Vec<f64>,
    pub commodity_delivered: Vec<f64>,
    pub iterations: usize,
}

impl FlowSolution {
    pub fn arc_flow(&self, link: usize, reverse: bool) -> f64 {
        self.edge_flow[2 * link + usize::from(reverse)]
    }
}

pub(crate) const HOLD_FRACTION: f64 = 1.0 - 1e-9;

fn lp_options(opts: &FlowOptions) -> SolveOptions {
    SolveOptions { time_limit: opts.time_limit, ..SolveOptions::default() }
}

pub(crate) fn check_status(status: Status, x: &[f64], t_var: Var) -> Result<(), CoreError> {
    match status {
        Status::Optimal => Ok(()),
        Status::TimeLimit => Err(CoreError::Timeout { best: x[t_var.0] }),
        Status::Unbounded => Err(CoreError::Solver("throughput is unbounded".into())),
        Status::Infeasible => Err(CoreError::Solver("model reported infeasible".into())),
        Status::IterationLimit => Err(CoreError::Solver("iteration limit reached".into())),
    }
}

/// Solves a formulated model.
pub fn solve(model: &FlowModel, opts: &FlowOptions) -> Result<FlowSolution, CoreError> {
    let lp_opts = lp_options(opts);
    let first = lp_solve(&model.problem, &lp_opts, Some(&model.crash))?;
    check_status(first.status, &first.x, model.t_var)?;
    let mut sol = first;
    debug!("max t = {} after {} iterations", sol.x[model.t_var.0], sol.iterations);
    if opts.min_total_flow {
        let hold = sol.x[model.t_var.0] * HOLD_FRACTION;
        let mut p = model.problem.clone();
        p.set_sense(Sense::Minimize);
        p.clear_costs();
        p.set_var_bounds(model.t_var, hold, hold);
        for (j, &arc) in model.var_arc.iter().enumerate() {
            if arc != model::NO_ARC {
                p.set_cost(Var(j), 1.0);
            }
        }
        let second = lp_solve(&p, &lp_opts, Some(&sol.basis))?;
        check_status(second.status, &second.x, model.t_var)?;
        let iterations = sol.iterations + second.iterations;
        sol = second;
        sol.iterations = iterations;
    }
    let t = sol.x[model.t_var.0];
    let mut edge_flow = vec![0.0; model.num_switch_arcs];
    for (j, &arc) in model.var_arc.iter().enumerate() {
        if arc != model::NO_ARC {
            edge_flow[arc] += sol.x[j];
        }
    }
    let commodity_delivered = model
        .demands
        .iter()
        .zip(&model.source_rows)
        .map(|(&d, row)| match row {
            // net outflow at the source: the row holds out - in - d t = 0
            Some(r) => sol.row_activity[r.0] + d * t,
            None => d * t,
        })
        .collect();
    Ok(FlowSolution { throughput: t, edge_flow, commodity_delivered, iterations: sol.iterations })
}

/// Formulates and solves in one step.
pub fn max_concurrent_flow(t: &Topology, tm: &TrafficMatrix, opts: &FlowOptions) -> Result<FlowSolution, CoreError> {
    match opts.formulation {
        Formulation::Paths => paths::solve_paths(t, tm, opts),
        _ => solve(&formulate(t, tm, opts)?, opts),
    }
}
