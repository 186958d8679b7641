//! Bounded primal simplex on `A x - s = 0` with `s` carrying the row bounds.
//!
//! Variables `0..n` are structurals and `n..n+m` are the row logicals, whose
//! columns are `-e_i`. Phase 1 minimizes the sum of bound violations of the
//! basic variables; phase 2 optimizes the true objective. The ratio test is
//! EXPAND (a Harris two-pass test against bounds relaxed by a slowly growing
//! tolerance), which keeps every step nonnegative and breaks degenerate
//! cycles.

use std::time::{Duration, Instant};

use log::debug;

use crate::lu::LuFactors;
use crate::problem::{Problem, Sense};
use crate::sparse::CscMatrix;
use crate::LpError;

const NONE: usize = usize::MAX;
/// Refactor once the eta file outgrows the fresh factors by this factor.
const ETA_GROWTH: usize = 8;

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Largest bound violation accepted on any variable.
    pub feasibility_tol: f64,
    /// Smallest reduced cost that still counts as improving.
    pub optimality_tol: f64,
    /// Pivot elements below this magnitude are never chosen.
    pub pivot_tol: f64,
    pub max_iterations: usize,
    pub time_limit: Option<Duration>,
    /// Basis updates between fresh factorizations.
    pub refactor_interval: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            feasibility_tol: 1e-9,
            optimality_tol: 1e-9,
            pivot_tol: 1e-9,
            max_iterations: usize::MAX,
            time_limit: None,
            refactor_interval: 40,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    TimeLimit,
}

/// A simplex basis, usable as a warm start.
///
/// Index `j < n` denotes structural `j` and `n + i` the logical of row `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Basis {
    /// One basic variable per row.
    pub basic: Vec<usize>,
    /// For each of the `n + m` variables, whether it rests at its upper bound
    /// when nonbasic. May be empty, meaning every nonbasic variable sits at
    /// its lower bound where one exists.
    pub at_upper: Vec<bool>,
}

impl Basis {
    pub fn new(basic: Vec<usize>) -> Self {
        Basis { basic, at_upper: Vec::new() }
    }

    /// The basis made of all row logicals.
    pub fn slack(num_vars: usize, num_rows: usize) -> Self {
        Basis::new((num_vars..num_vars + num_rows).collect())
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub status: Status,
    /// Objective value in the problem's own sense.
    pub objective: f64,
    pub x: Vec<f64>,
    pub row_activity: Vec<f64>,
    /// Row prices `y` of the final basis: the reduced cost of variable `j`
    /// in the problem's sense is `c_j - sum_i a_ij y_i`.
    pub duals: Vec<f64>,
    pub basis: Basis,
    pub iterations: usize,
}

impl Solution {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

/// Solves `problem`, optionally starting from `warm`.
pub fn solve(problem: &Problem, options: &SolveOptions, warm: Option<&Basis>) -> Result<Solution, LpError> {
    problem.check()?;
    let mut s = Simplex::new(problem, options);
    match warm {
        Some(b) => s.load_basis(b)?,
        None => s.load_basis(&Basis::slack(s.n, s.m))?,
    }
    let status = s.run()?;
    let duals = s.row_duals(problem);
    let x: Vec<f64> = s.x[..s.n].to_vec();
    let row_activity = problem.row_activity(&x);
    Ok(Solution {
        status,
        objective: problem.objective_value(&x),
        x,
        row_activity,
        duals,
        basis: Basis { basic: s.basis.clone(), at_upper: s.at_upper.clone() },
        iterations: s.iterations,
    })
}

enum Step {
    Flip(f64),
    Pivot { pos: usize, theta: f64, to_upper: bool },
    Unbounded,
}

struct Simplex<'a> {
    opts: &'a SolveOptions,
    n: usize,
    m: usize,
    a: CscMatrix,
    at: CscMatrix,
    a_nonzeros: usize,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    pos: Vec<usize>,
    at_upper: Vec<bool>,
    lu: LuFactors,
    d: Vec<f64>,
    weights: Vec<f64>,
    iterations: usize,
    delta: f64,
    // dense work vectors
    rhs: Vec<f64>,
    alpha: Vec<f64>,
    rho: Vec<f64>,
    prow: Vec<f64>,
    touched: Vec<usize>,
}

impl<'a> Simplex<'a> {
    fn new(problem: &Problem, opts: &'a SolveOptions) -> Self {
        let n = problem.num_vars();
        let m = problem.num_rows();
        let a = problem.to_csc();
        let at = a.transpose();
        let sign = match problem.sense() {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut cost: Vec<f64> = problem.costs().iter().map(|c| sign * c).collect();
        cost.resize(n + m, 0.0);
        let (cl, cu) = problem.col_bounds_slices();
        let (rl, ru) = problem.row_bounds_slices();
        let lower: Vec<f64> = cl.iter().chain(rl).copied().collect();
        let upper: Vec<f64> = cu.iter().chain(ru).copied().collect();
        Simplex {
            opts,
            n,
            m,
            a_nonzeros: problem.num_nonzeros(),
            a,
            at,
            cost,
            lower,
            upper,
            x: vec![0.0; n + m],
            basis: Vec::new(),
            pos: vec![NONE; n + m],
            at_upper: vec![false; n + m],
            lu: LuFactors::default(),
            d: vec![0.0; n + m],
            weights: vec![1.0; n + m],
            iterations: 0,
            delta: 0.0,
            rhs: vec![0.0; m],
            alpha: vec![0.0; m],
            rho: vec![0.0; m],
            prow: vec![0.0; n + m],
            touched: Vec::new(),
        }
    }

    fn load_basis(&mut self, b: &Basis) -> Result<(), LpError> {
        let total = self.n + self.m;
        if b.basic.len() != self.m {
            return Err(LpError::BasisShape { got: b.basic.len(), expected: self.m });
        }
        self.pos.iter_mut().for_each(|p| *p = NONE);
        let mut ok = true;
        for (p, &j) in b.basic.iter().enumerate() {
            if j >= total || self.pos[j] != NONE {
                ok = false;
                break;
            }
            self.pos[j] = p;
        }
        if ok {
            self.basis = b.basic.clone();
        } else {
            debug!("warm-start basis rejected, using slack basis");
            self.pos.iter_mut().for_each(|p| *p = NONE);
            self.basis = (self.n..total).collect();
            for (p, &j) in self.basis.iter().enumerate() {
                self.pos[j] = p;
            }
        }
        for j in 0..total {
            let only_upper = self.lower[j] == f64::NEG_INFINITY && self.upper[j].is_finite();
            let up = if b.at_upper.len() == total {
                b.at_upper[j] && self.upper[j].is_finite() || only_upper
            } else {
                only_upper
            };
            self.at_upper[j] = up;
            if self.pos[j] == NONE {
                self.x[j] = self.nonbasic_value(j);
            }
        }
        Ok(())
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        if self.at_upper[j] && self.upper[j].is_finite() {
            self.upper[j]
        } else if self.lower[j].is_finite() {
            self.lower[j]
        } else if self.upper[j].is_finite() {
            self.upper[j]
        } else {
            0.0
        }
    }

    /// Adds `scale * column(j)` to the dense row vector `v`.
    fn scatter_column(&self, j: usize, scale: f64, v: &mut [f64]) {
        if j < self.n {
            let (idx, val) = self.a.col(j);
            for (&i, &a) in idx.iter().zip(val) {
                v[i] += scale * a;
            }
        } else {
            v[j - self.n] -= scale;
        }
    }

    fn dot_column(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.n {
            let (idx, val) = self.a.col(j);
            idx.iter().zip(val).map(|(&i, &a)| a * y[i]).sum()
        } else {
            -y[j - self.n]
        }
    }

    fn refactor(&mut self) -> Result<(), LpError> {
        for _attempt in 0..8 {
            let cols: Vec<Vec<(usize, f64)>> = self
                .basis
                .iter()
                .map(|&j| {
                    if j < self.n {
                        let (idx, val) = self.a.col(j);
                        idx.iter().copied().zip(val.iter().copied()).collect()
                    } else {
                        vec![(j - self.n, -1.0)]
                    }
                })
                .collect();
            match LuFactors::factorize(self.m, cols) {
                Ok(f) => {
                    self.lu = f;
                    return Ok(());
                }
                Err(sing) => {
                    debug!("singular basis, replacing {} columns", sing.positions.len());
                    let free_rows: Vec<usize> =
                        sing.rows.iter().copied().filter(|&r| self.pos[self.n + r] == NONE).collect();
                    let mut rows = free_rows.into_iter();
                    for &p in &sing.positions {
                        let Some(r) = rows.next() else { break };
                        let old = self.basis[p];
                        self.pos[old] = NONE;
                        let xo = self.x[old];
                        self.at_upper[old] = self.upper[old].is_finite()
                            && (!self.lower[old].is_finite()
                                || (xo - self.upper[old]).abs() < (xo - self.lower[old]).abs());
                        self.x[old] = self.nonbasic_value(old);
                        let new = self.n + r;
                        self.basis[p] = new;
                        self.pos[new] = p;
                    }
                }
            }
        }
        Err(LpError::Numerical("basis stayed singular after repair".into()))
    }

    /// Recomputes the basic values from the nonbasic ones.
    fn compute_xb(&mut self) {
        let mut rhs = std::mem::take(&mut self.rhs);
        rhs.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..self.n + self.m {
            if self.pos[j] == NONE && self.x[j] != 0.0 {
                self.scatter_column(j, -self.x[j], &mut rhs);
            }
        }
        let mut out = std::mem::take(&mut self.alpha);
        self.lu.ftran(&mut rhs, &mut out);
        for p in 0..self.m {
            self.x[self.basis[p]] = out[p];
        }
        self.rhs = rhs;
        self.alpha = out;
    }

    fn row_duals(&mut self, problem: &Problem) -> Vec<f64> {
        let sign = match problem.sense() {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut cb: Vec<f64> = self.basis.iter().map(|&j| self.cost[j]).collect();
        let mut y = vec![0.0; self.m];
        self.lu.btran(&mut cb, &mut y);
        y.iter_mut().for_each(|v| *v *= sign);
        y
    }

    /// Reduced costs for the given cost vector.
    fn compute_duals(&mut self, cost: &[f64]) {
        let mut cb: Vec<f64> = self.basis.iter().map(|&j| cost[j]).collect();
        let mut y = std::mem::take(&mut self.rho);
        self.lu.btran(&mut cb, &mut y);
        for j in 0..self.n + self.m {
            self.d[j] = if self.pos[j] == NONE { cost[j] - self.dot_column(j, &y) } else { 0.0 };
        }
        self.rho = y;
    }

    fn phase1_cost(&self, tol: f64) -> Option<Vec<f64>> {
        if !self.basis.iter().any(|&j| self.x[j] < self.lower[j] - tol || self.x[j] > self.upper[j] + tol) {
            return None;
        }
        let mut c = vec![0.0; self.n + self.m];
        let mut any = false;
        for &j in &self.basis {
            if self.x[j] < self.lower[j] - tol {
                c[j] = -1.0;
                any = true;
            } else if self.x[j] > self.upper[j] + tol {
                c[j] = 1.0;
                any = true;
            }
        }
        any.then_some(c)
    }

    /// Moves nonbasic variables back onto their bounds and recomputes the
    /// basic values from a fresh factorization.
    fn reset(&mut self) -> Result<(), LpError> {
        for j in 0..self.n + self.m {
            if self.pos[j] == NONE {
                self.x[j] = self.nonbasic_value(j);
            }
        }
        self.refactor()?;
        self.compute_xb();
        self.delta = 0.5 * self.opts.feasibility_tol;
        Ok(())
    }

    /// Devex pricing. Returns the entering variable and its direction.
    fn price(&self) -> Option<(usize, f64)> {
        let tol = self.opts.optimality_tol;
        let mut best = None;
        let mut best_score = 0.0;
        for j in 0..self.n + self.m {
            if self.pos[j] != NONE || self.lower[j] == self.upper[j] {
                continue;
            }
            let dj = self.d[j];
            let dir = if self.at_upper[j] {
                if dj > tol { -1.0 } else { continue }
            } else if self.lower[j].is_finite() {
                if dj < -tol { 1.0 } else { continue }
            } else if dj.abs() > tol {
                -dj.signum()
            } else {
                continue;
            };
            let score = dj * dj / self.weights[j];
            if score > best_score {
                best_score = score;
                best = Some((j, dir));
            }
        }
        best
    }

    /// Bounds the ratio test works against for basic variable `j`.
    fn working_bounds(&self, j: usize, phase1: bool) -> (f64, f64) {
        let (l, u) = (self.lower[j], self.upper[j]);
        if phase1 {
            let tol = self.opts.feasibility_tol;
            if self.x[j] < l - tol {
                return (f64::NEG_INFINITY, l);
            }
            if self.x[j] > u + tol {
                return (u, f64::INFINITY);
            }
        }
        (l, u)
    }

    fn ratio_test(&self, q: usize, dir: f64, phase1: bool) -> Step {
        let ptol = self.opts.pivot_tol;
        let delta = self.delta;
        let mut theta_max = f64::INFINITY;
        for p in 0..self.m {
            let a = self.alpha[p];
            if a.abs() <= ptol {
                continue;
            }
            let j = self.basis[p];
            let rate = -dir * a;
            let (lo, hi) = self.working_bounds(j, phase1);
            let t = if rate < 0.0 {
                if lo == f64::NEG_INFINITY { continue }
                (self.x[j] - (lo - delta)) / -rate
            } else {
                if hi == f64::INFINITY { continue }
                ((hi + delta) - self.x[j]) / rate
            };
            theta_max = theta_max.min(t.max(0.0));
        }
        let range = self.upper[q] - self.lower[q];
        if range.is_finite() && range <= theta_max {
            return Step::Flip(range);
        }
        if theta_max == f64::INFINITY {
            return Step::Unbounded;
        }
        let mut best: Option<(usize, f64, bool)> = None;
        let mut best_abs = 0.0;
        for p in 0..self.m {
            let a = self.alpha[p];
            if a.abs() <= ptol {
                continue;
            }
            let j = self.basis[p];
            let rate = -dir * a;
            let (lo, hi) = self.working_bounds(j, phase1);
            let (t, bound) = if rate < 0.0 {
                if lo == f64::NEG_INFINITY { continue }
                ((self.x[j] - lo) / -rate, lo)
            } else {
                if hi == f64::INFINITY { continue }
                ((hi - self.x[j]) / rate, hi)
            };
            if t.max(0.0) <= theta_max && a.abs() > best_abs {
                best_abs = a.abs();
                let to_upper = bound == self.upper[j] && self.lower[j] < self.upper[j];
                best = Some((p, t.max(0.0), to_upper));
            }
        }
        let (pos, t, to_upper) = best.expect("a blocking row exists below theta_max");
        let theta_min = self.tau_inc() / best_abs;
        Step::Pivot { pos, theta: t.max(theta_min).min(theta_max), to_upper }
    }

    fn tau_inc(&self) -> f64 {
        0.49 * self.opts.feasibility_tol / 10_000.0
    }

    /// Fills `prow` with the pivot row `e_pᵀ B⁻¹ A` over nonbasic variables and
    /// records the touched indices.
    fn compute_pivot_row(&mut self, p: usize) {
        let mut e = std::mem::take(&mut self.rhs);
        e.iter_mut().for_each(|v| *v = 0.0);
        e[p] = 1.0;
        let mut rho = std::mem::take(&mut self.rho);
        self.lu.btran(&mut e, &mut rho);
        self.touched.clear();
        self.rhs = e;
        // row-wise product when the rows hit by rho hold fewer entries than A
        let row_work: usize = (0..self.m).filter(|&i| rho[i] != 0.0).map(|i| self.at.col(i).0.len() + 1).sum();
        if row_work < self.a_nonzeros + self.n / 4 {
            for i in 0..self.m {
                let r = rho[i];
                if r == 0.0 {
                    continue;
                }
                let (idx, val) = self.at.col(i);
                for (&j, &a) in idx.iter().zip(val) {
                    if self.pos[j] == NONE {
                        if self.prow[j] == 0.0 {
                            self.touched.push(j);
                        }
                        self.prow[j] += r * a;
                        if self.prow[j] == 0.0 {
                            self.prow[j] = f64::MIN_POSITIVE;
                        }
                    }
                }
                let l = self.n + i;
                if self.pos[l] == NONE {
                    self.prow[l] = -r;
                    self.touched.push(l);
                }
            }
        } else {
            for j in 0..self.n + self.m {
                if self.pos[j] == NONE {
                    let v = self.dot_column(j, &rho);
                    if v != 0.0 {
                        self.prow[j] = v;
                        self.touched.push(j);
                    }
                }
            }
        }
        self.rho = rho;
    }

    fn run(&mut self) -> Result<Status, LpError> {
        let start = Instant::now();
        let tol = self.opts.feasibility_tol;
        let delta_max = 0.99 * tol;
        self.refactor()?;
        self.compute_xb();
        self.delta = 0.5 * tol;
        let mut just_reset = false;
        let mut needs_refactor = false;
        let mut duals_valid = false;
        loop {
            if self.iterations >= self.opts.max_iterations {
                return Ok(Status::IterationLimit);
            }
            if let Some(limit) = self.opts.time_limit {
                if self.iterations % 50 == 0 && start.elapsed() > limit {
                    return Ok(Status::TimeLimit);
                }
            }
            if needs_refactor || self.lu.num_etas() >= self.opts.refactor_interval {
                self.refactor()?;
                self.compute_xb();
                needs_refactor = false;
                duals_valid = false;
            }
            let p1cost = self.phase1_cost(tol);
            let phase1 = p1cost.is_some();
            match &p1cost {
                Some(c) => {
                    self.compute_duals(c);
                    duals_valid = false;
                }
                None if !duals_valid => {
                    let c = self.cost.clone();
                    self.compute_duals(&c);
                    duals_valid = true;
                }
                // phase 2 reduced costs are otherwise updated from the pivot row
                None => {}
            }
            let Some((q, dir)) = self.price() else {
                if just_reset {
                    return Ok(if phase1 { Status::Infeasible } else { Status::Optimal });
                }
                self.reset()?;
                duals_valid = false;
                just_reset = true;
                continue;
            };
            just_reset = false;

            let mut rhs = std::mem::take(&mut self.rhs);
            rhs.iter_mut().for_each(|v| *v = 0.0);
            self.scatter_column(q, 1.0, &mut rhs);
            let mut alpha = std::mem::take(&mut self.alpha);
            self.lu.ftran(&mut rhs, &mut alpha);
            self.rhs = rhs;
            self.alpha = alpha;

            let step = self.ratio_test(q, dir, phase1);
            self.iterations += 1;
            match step {
                Step::Unbounded => {
                    if phase1 {
                        needs_refactor = true;
                        continue;
                    }
                    return Ok(Status::Unbounded);
                }
                Step::Flip(theta) => {
                    self.apply_step(q, dir, theta);
                    self.at_upper[q] = !self.at_upper[q];
                    self.x[q] = self.nonbasic_value(q);
                }
                Step::Pivot { pos, theta, to_upper } => {
                    self.apply_step(q, dir, theta);
                    let leaving = self.basis[pos];
                    let apq = self.alpha[pos];
                    if !phase1 {
                        self.compute_pivot_row(pos);
                        let check = self.prow[q];
                        if (check - apq).abs() > 1e-7 * (1.0 + apq.abs()) {
                            needs_refactor = true;
                        }
                        let theta_d = self.d[q] / apq;
                        let wq = self.weights[q].max(1.0);
                        let mut reset_weights = false;
                        for k in 0..self.touched.len() {
                            let j = self.touched[k];
                            let r = self.prow[j];
                            self.prow[j] = 0.0;
                            if j == q {
                                continue;
                            }
                            self.d[j] -= theta_d * r;
                            let ratio = r / apq;
                            let w = ratio * ratio * wq;
                            if w > self.weights[j] {
                                self.weights[j] = w;
                                if w > 1e6 {
                                    reset_weights = true;
                                }
                            }
                        }
                        self.prow[q] = 0.0;
                        self.d[q] = 0.0;
                        self.d[leaving] = -theta_d;
                        self.weights[leaving] = (wq / (apq * apq)).max(1.0);
                        if reset_weights {
                            self.weights.iter_mut().for_each(|w| *w = 1.0);
                        }
                    } else {
                        self.weights[leaving] = 1.0;
                    }
                    self.at_upper[leaving] = to_upper;
                    self.pos[leaving] = NONE;
                    self.pos[q] = pos;
                    self.basis[pos] = q;
                    let alpha = std::mem::take(&mut self.alpha);
                    self.lu.push_eta(pos, &alpha);
                    self.alpha = alpha;
                    if self.lu.eta_nonzeros() > ETA_GROWTH * (self.lu.factor_nonzeros() + self.m) {
                        needs_refactor = true;
                    }
                }
            }
            self.delta += self.tau_inc();
            if self.delta >= delta_max {
                self.reset()?;
                duals_valid = false;
            }
        }
    }

    fn apply_step(&mut self, q: usize, dir: f64, theta: f64) {
        if theta == 0.0 {
            return;
        }
        self.x[q] += dir * theta;
        for p in 0..self.m {
            let a = self.alpha[p];
            if a != 0.0 {
                let j = self.basis[p];
                self.x[j] -= dir * theta * a;
            }
        }
    }
}
