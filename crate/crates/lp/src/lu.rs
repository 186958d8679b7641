//! Sparse LU factorization of a simplex basis.
//!
//! Right-looking Gaussian elimination with Markowitz pivot selection and
//! threshold partial pivoting. Basis changes between refactorizations are
//! appended as product-form eta columns.

const NONE: usize = usize::MAX;

/// Entries whose magnitude falls below this after elimination are dropped.
const DROP_TOL: f64 = 1e-14;
/// A column whose largest entry is below this is treated as numerically zero.
const ZERO_TOL: f64 = 1e-11;
/// Threshold for partial pivoting relative to the column maximum.
const PIVOT_THRESHOLD: f64 = 0.1;

/// Basis positions that could not be pivoted, paired with the rows left
/// without a pivot. Replacing each position with the logical of a row makes
/// the basis nonsingular.
#[derive(Debug)]
pub(crate) struct Singular {
    pub positions: Vec<usize>,
    pub rows: Vec<usize>,
}

/// Doubly linked buckets of items keyed by their current nonzero count.
struct CountLists {
    head: Vec<usize>,
    next: Vec<usize>,
    prev: Vec<usize>,
    count: Vec<usize>,
}

impl CountLists {
    fn new(items: usize, max_count: usize) -> Self {
        CountLists {
            head: vec![NONE; max_count + 2],
            next: vec![NONE; items],
            prev: vec![NONE; items],
            count: vec![0; items],
        }
    }

    fn insert(&mut self, x: usize, c: usize) {
        self.count[x] = c;
        self.prev[x] = NONE;
        self.next[x] = self.head[c];
        if self.head[c] != NONE {
            self.prev[self.head[c]] = x;
        }
        self.head[c] = x;
    }

    fn remove(&mut self, x: usize) {
        let c = self.count[x];
        if self.prev[x] != NONE {
            self.next[self.prev[x]] = self.next[x];
        } else {
            self.head[c] = self.next[x];
        }
        if self.next[x] != NONE {
            self.prev[self.next[x]] = self.prev[x];
        }
        self.next[x] = NONE;
        self.prev[x] = NONE;
    }

    fn update(&mut self, x: usize, c: usize) {
        self.remove(x);
        self.insert(x, c);
    }
}

#[derive(Clone, Debug, Default)]
pub(crate) struct LuFactors {
    m: usize,
    piv_row: Vec<usize>,
    piv_pos: Vec<usize>,
    piv_val: Vec<f64>,
    // Row multipliers of each elimination step.
    l_start: Vec<usize>,
    l_index: Vec<usize>,
    l_value: Vec<f64>,
    // Off-diagonal part of U, stored by pivot row (positions of later pivots)...
    u_start: Vec<usize>,
    u_index: Vec<usize>,
    u_value: Vec<f64>,
    // ...and by basis position (rows of earlier pivots).
    uc_start: Vec<usize>,
    uc_index: Vec<usize>,
    uc_value: Vec<f64>,
    // Product-form updates.
    eta_pos: Vec<usize>,
    eta_piv: Vec<f64>,
    eta_start: Vec<usize>,
    eta_index: Vec<usize>,
    eta_value: Vec<f64>,
}

impl LuFactors {
    /// Factorizes the square matrix whose column `p` is `columns[p]`, given
    /// as `(row, value)` pairs.
    pub fn factorize(m: usize, mut cols: Vec<Vec<(usize, f64)>>) -> Result<LuFactors, Singular> {
        debug_assert_eq!(cols.len(), m);
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (p, col) in cols.iter_mut().enumerate() {
            col.retain(|e| e.1 != 0.0);
            for &(r, _) in col.iter() {
                rows[r].push(p);
            }
        }
        let mut col_lists = CountLists::new(m, m);
        let mut row_lists = CountLists::new(m, m);
        for p in 0..m {
            col_lists.insert(p, cols[p].len());
            row_lists.insert(p, rows[p].len());
        }
        let mut col_active = vec![true; m];
        let mut row_active = vec![true; m];
        let mut scatter = vec![NONE; m];

        let mut f = LuFactors {
            m,
            l_start: vec![0],
            u_start: vec![0],
            eta_start: vec![0],
            ..Default::default()
        };
        let mut singular_cols = Vec::new();
        let mut mults: Vec<(usize, f64)> = Vec::new();

        loop {
            // empty columns cannot be pivoted
            while col_lists.head[0] != NONE {
                let c = col_lists.head[0];
                col_lists.remove(c);
                col_active[c] = false;
                singular_cols.push(c);
            }
            let Some((r, c, piv)) = choose_pivot(m, &cols, &rows, &col_lists, &row_lists) else {
                break;
            };

            // pivot column -> multipliers
            col_lists.remove(c);
            col_active[c] = false;
            let pivcol = std::mem::take(&mut cols[c]);
            mults.clear();
            for &(i, v) in &pivcol {
                remove_item(&mut rows[i], c);
                if i != r {
                    mults.push((i, v / piv));
                }
            }
            // pivot row -> U, update remaining columns
            row_lists.remove(r);
            row_active[r] = false;
            let prow = std::mem::take(&mut rows[r]);
            for &j in &prow {
                let col = &mut cols[j];
                let idx = col.iter().position(|e| e.0 == r).expect("row pattern out of sync");
                let a_rj = col.swap_remove(idx).1;
                f.u_index.push(j);
                f.u_value.push(a_rj);
                if !mults.is_empty() {
                    for (k, &(i, _)) in col.iter().enumerate() {
                        scatter[i] = k;
                    }
                    for &(i, l) in &mults {
                        let delta = -l * a_rj;
                        if scatter[i] != NONE {
                            col[scatter[i]].1 += delta;
                        } else {
                            col.push((i, delta));
                            scatter[i] = col.len() - 1;
                            rows[i].push(j);
                        }
                    }
                    for &(i, _) in col.iter() {
                        scatter[i] = NONE;
                    }
                    if col.iter().any(|e| e.1.abs() < DROP_TOL) {
                        for &(i, v) in col.iter() {
                            if v.abs() < DROP_TOL {
                                remove_item(&mut rows[i], j);
                            }
                        }
                        col.retain(|e| e.1.abs() >= DROP_TOL);
                    }
                }
                col_lists.update(j, cols[j].len());
            }
            for &(i, _) in &mults {
                row_lists.update(i, rows[i].len());
            }
            f.u_start.push(f.u_index.len());
            for &(i, l) in &mults {
                f.l_index.push(i);
                f.l_value.push(l);
            }
            f.l_start.push(f.l_index.len());
            f.piv_row.push(r);
            f.piv_pos.push(c);
            f.piv_val.push(piv);
        }

        for p in 0..m {
            if col_active[p] {
                singular_cols.push(p);
            }
        }
        if !singular_cols.is_empty() {
            let rows_left: Vec<usize> = (0..m).filter(|&r| row_active[r]).collect();
            singular_cols.sort_unstable();
            debug_assert_eq!(rows_left.len(), singular_cols.len());
            return Err(Singular { positions: singular_cols, rows: rows_left });
        }

        // column view of U
        let mut count = vec![0usize; m + 1];
        for &j in &f.u_index {
            count[j + 1] += 1;
        }
        for j in 0..m {
            count[j + 1] += count[j];
        }
        f.uc_start = count.clone();
        f.uc_index = vec![0; f.u_index.len()];
        f.uc_value = vec![0.0; f.u_index.len()];
        for k in 0..f.piv_row.len() {
            for e in f.u_start[k]..f.u_start[k + 1] {
                let j = f.u_index[e];
                let dst = count[j];
                f.uc_index[dst] = k;
                f.uc_value[dst] = f.u_value[e];
                count[j] += 1;
            }
        }
        Ok(f)
    }

    pub fn num_etas(&self) -> usize {
        self.eta_pos.len()
    }

    pub fn eta_nonzeros(&self) -> usize {
        self.eta_index.len()
    }

    pub fn factor_nonzeros(&self) -> usize {
        self.l_index.len() + self.u_index.len() + self.m
    }

    /// Solves `B x = b`. `rhs` is indexed by row and is destroyed; the
    /// result is written to `out`, indexed by basis position.
    pub fn ftran(&self, rhs: &mut [f64], out: &mut [f64]) {
        for k in 0..self.piv_row.len() {
            let br = rhs[self.piv_row[k]];
            if br != 0.0 {
                for e in self.l_start[k]..self.l_start[k + 1] {
                    rhs[self.l_index[e]] -= self.l_value[e] * br;
                }
            }
        }
        for k in (0..self.piv_row.len()).rev() {
            let p = self.piv_pos[k];
            let xk = rhs[self.piv_row[k]] / self.piv_val[k];
            out[p] = xk;
            if xk != 0.0 {
                for e in self.uc_start[p]..self.uc_start[p + 1] {
                    rhs[self.piv_row[self.uc_index[e]]] -= self.uc_value[e] * xk;
                }
            }
        }
        for t in 0..self.eta_pos.len() {
            let p = self.eta_pos[t];
            let xp = out[p] / self.eta_piv[t];
            out[p] = xp;
            if xp != 0.0 {
                for e in self.eta_start[t]..self.eta_start[t + 1] {
                    out[self.eta_index[e]] -= self.eta_value[e] * xp;
                }
            }
        }
    }

    /// Solves `Bᵀ y = c`. `c` is indexed by basis position and is destroyed;
    /// the result is written to `out`, indexed by row.
    pub fn btran(&self, c: &mut [f64], out: &mut [f64]) {
        for t in (0..self.eta_pos.len()).rev() {
            let p = self.eta_pos[t];
            let mut s = c[p];
            for e in self.eta_start[t]..self.eta_start[t + 1] {
                s -= self.eta_value[e] * c[self.eta_index[e]];
            }
            c[p] = s / self.eta_piv[t];
        }
        for k in 0..self.piv_row.len() {
            let z = c[self.piv_pos[k]] / self.piv_val[k];
            out[self.piv_row[k]] = z;
            if z != 0.0 {
                for e in self.u_start[k]..self.u_start[k + 1] {
                    c[self.u_index[e]] -= self.u_value[e] * z;
                }
            }
        }
        for k in (0..self.piv_row.len()).rev() {
            let mut s = 0.0;
            for e in self.l_start[k]..self.l_start[k + 1] {
                s += self.l_value[e] * out[self.l_index[e]];
            }
            if s != 0.0 {
                out[self.piv_row[k]] -= s;
            }
        }
    }

    /// Records that basis position `p` was replaced by a column whose
    /// FTRAN image is `alpha` (dense, indexed by position).
    pub fn push_eta(&mut self, p: usize, alpha: &[f64]) {
        self.eta_pos.push(p);
        self.eta_piv.push(alpha[p]);
        for (i, &a) in alpha.iter().enumerate() {
            if i != p && a.abs() > DROP_TOL {
                self.eta_index.push(i);
                self.eta_value.push(a);
            }
        }
        self.eta_start.push(self.eta_index.len());
    }
}

fn remove_item(v: &mut Vec<usize>, x: usize) {
    if let Some(i) = v.iter().position(|&y| y == x) {
        v.swap_remove(i);
    }
}

fn column_max(col: &[(usize, f64)]) -> f64 {
    col.iter().fold(0.0, |m, e| m.max(e.1.abs()))
}

/// Markowitz search over the sparsest columns and rows, a few candidates at
/// a time. Returns `(row, position, pivot value)`.
fn choose_pivot(
    m: usize,
    cols: &[Vec<(usize, f64)>],
    rows: &[Vec<usize>],
    col_lists: &CountLists,
    row_lists: &CountLists,
) -> Option<(usize, usize, f64)> {
    const SEARCH_LIMIT: usize = 4;
    let mut best: Option<(usize, usize, f64)> = None;
    let mut best_cost = usize::MAX;
    let mut searched = 0;
    let better = |cost: usize, v: f64, best_cost: usize, best: &Option<(usize, usize, f64)>| {
        cost < best_cost || (cost == best_cost && best.map_or(true, |b| v.abs() > b.2.abs()))
    };
    for cnt in 1..=m {
        let mut c = col_lists.head[cnt];
        while c != NONE {
            let maxabs = column_max(&cols[c]);
            if maxabs > ZERO_TOL {
                for &(i, v) in &cols[c] {
                    if v.abs() >= PIVOT_THRESHOLD * maxabs {
                        let cost = (rows[i].len() - 1) * (cnt - 1);
                        if better(cost, v, best_cost, &best) {
                            best = Some((i, c, v));
                            best_cost = cost;
                        }
                    }
                }
                searched += 1;
            }
            if best.is_some() && (best_cost == 0 || searched >= SEARCH_LIMIT) {
                return best;
            }
            c = col_lists.next[c];
        }
        let mut r = row_lists.head[cnt];
        while r != NONE {
            for &j in &rows[r] {
                let col = &cols[j];
                let maxabs = column_max(col);
                if maxabs <= ZERO_TOL {
                    continue;
                }
                let v = col.iter().find(|e| e.0 == r).map(|e| e.1).unwrap_or(0.0);
                if v.abs() >= PIVOT_THRESHOLD * maxabs {
                    let cost = (cnt - 1) * (col.len() - 1);
                    if better(cost, v, best_cost, &best) {
                        best = Some((r, j, v));
                        best_cost = cost;
                    }
                }
            }
            searched += 1;
            if best.is_some() && (best_cost == 0 || searched >= SEARCH_LIMIT) {
                return best;
            }
            r = row_lists.next[r];
        }
        if best.is_some() && best_cost <= cnt * cnt {
            return best;
        }
    }
    best
}
