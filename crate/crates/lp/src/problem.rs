use crate::sparse::CscMatrix;
use crate::LpError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Handle to a structural variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub usize);

/// Handle to a constraint row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RowId(pub usize);

/// A linear program `opt c·x  s.t.  lo_r <= A x <= hi_r,  lo_x <= x <= hi_x`.
///
/// Bounds may be infinite; an equality row has `lo_r == hi_r`.
#[derive(Clone, Debug)]
pub struct Problem {
    sense: Sense,
    cost: Vec<f64>,
    col_lower: Vec<f64>,
    col_upper: Vec<f64>,
    col_names: Vec<String>,
    row_lower: Vec<f64>,
    row_upper: Vec<f64>,
    row_names: Vec<String>,
    row_start: Vec<usize>,
    entries: Vec<(usize, f64)>,
}

impl Problem {
    pub fn new(sense: Sense) -> Self {
        Problem {
            sense,
            cost: Vec::new(),
            col_lower: Vec::new(),
            col_upper: Vec::new(),
            col_names: Vec::new(),
            row_lower: Vec::new(),
            row_upper: Vec::new(),
            row_names: Vec::new(),
            row_start: vec![0],
            entries: Vec::new(),
        }
    }

    pub fn add_var(&mut self, name: impl Into<String>, cost: f64, lower: f64, upper: f64) -> Var {
        self.cost.push(cost);
        self.col_lower.push(lower);
        self.col_upper.push(upper);
        self.col_names.push(name.into());
        Var(self.cost.len() - 1)
    }

    /// Appends the row `lower <= Σ coef·var <= upper`. Repeated variables are
    /// summed and exact zeros dropped.
    pub fn add_row<I>(&mut self, name: impl Into<String>, lower: f64, upper: f64, coefs: I) -> RowId
    where
        I: IntoIterator<Item = (Var, f64)>,
    {
        let start = self.entries.len();
        self.entries
            .extend(coefs.into_iter().map(|(v, c)| (v.0, c)));
        let row = &mut self.entries[start..];
        row.sort_unstable_by_key(|e| e.0);
        // merge duplicates in place
        let mut w = start;
        for r in start..self.entries.len() {
            let (col, val) = self.entries[r];
            if w > start && self.entries[w - 1].0 == col {
                self.entries[w - 1].1 += val;
            } else {
                self.entries[w] = (col, val);
                w += 1;
            }
        }
        self.entries.truncate(w);
        let mut w2 = start;
        for r in start..self.entries.len() {
            if self.entries[r].1 != 0.0 {
                self.entries[w2] = self.entries[r];
                w2 += 1;
            }
        }
        self.entries.truncate(w2);
        self.row_start.push(self.entries.len());
        self.row_lower.push(lower);
        self.row_upper.push(upper);
        self.row_names.push(name.into());
        RowId(self.row_lower.len() - 1)
    }

    pub fn set_cost(&mut self, var: Var, cost: f64) {
        self.cost[var.0] = cost;
    }

    pub fn clear_costs(&mut self) {
        self.cost.iter_mut().for_each(|c| *c = 0.0);
    }

    pub fn set_sense(&mut self, sense: Sense) {
        self.sense = sense;
    }

    pub fn set_var_bounds(&mut self, var: Var, lower: f64, upper: f64) {
        self.col_lower[var.0] = lower;
        self.col_upper[var.0] = upper;
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn num_rows(&self) -> usize {
        self.row_lower.len()
    }

    pub fn num_nonzeros(&self) -> usize {
        self.entries.len()
    }

    pub fn cost(&self, var: Var) -> f64 {
        self.cost[var.0]
    }

    pub fn var_bounds(&self, var: Var) -> (f64, f64) {
        (self.col_lower[var.0], self.col_upper[var.0])
    }

    pub fn row_bounds(&self, row: RowId) -> (f64, f64) {
        (self.row_lower[row.0], self.row_upper[row.0])
    }

    pub fn var_name(&self, var: Var) -> &str {
        &self.col_names[var.0]
    }

    pub fn row_name(&self, row: RowId) -> &str {
        &self.row_names[row.0]
    }

    /// Coefficients of one row, sorted by variable index.
    pub fn row(&self, row: RowId) -> impl Iterator<Item = (Var, f64)> + '_ {
        self.entries[self.row_start[row.0]..self.row_start[row.0 + 1]]
            .iter()
            .map(|&(c, v)| (Var(c), v))
    }

    /// Row activities `A x` for a candidate point.
    pub fn row_activity(&self, x: &[f64]) -> Vec<f64> {
        (0..self.num_rows())
            .map(|r| self.row(RowId(r)).map(|(v, a)| a * x[v.0]).sum())
            .collect()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.cost.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub(crate) fn check(&self) -> Result<(), LpError> {
        for (i, (&lo, &hi)) in self.col_lower.iter().zip(&self.col_upper).enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(LpError::InvalidBounds { what: "variable", index: i, lower: lo, upper: hi });
            }
        }
        for (i, (&lo, &hi)) in self.row_lower.iter().zip(&self.row_upper).enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(LpError::InvalidBounds { what: "row", index: i, lower: lo, upper: hi });
            }
        }
        for r in 0..self.num_rows() {
            if self.row(RowId(r)).any(|(_, a)| !a.is_finite()) {
                return Err(LpError::NonFiniteCoefficient { row: r });
            }
        }
        Ok(())
    }

    pub(crate) fn costs(&self) -> &[f64] {
        &self.cost
    }

    pub(crate) fn col_bounds_slices(&self) -> (&[f64], &[f64]) {
        (&self.col_lower, &self.col_upper)
    }

    pub(crate) fn row_bounds_slices(&self) -> (&[f64], &[f64]) {
        (&self.row_lower, &self.row_upper)
    }

    pub(crate) fn to_csc(&self) -> CscMatrix {
        CscMatrix::from_rows(self.num_rows(), self.num_vars(), &self.row_start, &self.entries)
    }
}
