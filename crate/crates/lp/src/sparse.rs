/// Compressed sparse column storage. The same layout read row-major serves
/// as CSR for the transpose.
#[derive(Clone, Debug)]
pub(crate) struct CscMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub start: Vec<usize>,
    pub index: Vec<usize>,
    pub value: Vec<f64>,
}

impl CscMatrix {
    /// Builds column-major storage from sorted row-major entries.
    pub fn from_rows(nrows: usize, ncols: usize, row_start: &[usize], entries: &[(usize, f64)]) -> Self {
        let mut count = vec![0usize; ncols + 1];
        for &(c, _) in entries {
            count[c + 1] += 1;
        }
        for c in 0..ncols {
            count[c + 1] += count[c];
        }
        let start = count.clone();
        let mut next = count;
        let mut index = vec![0; entries.len()];
        let mut value = vec![0.0; entries.len()];
        for r in 0..nrows {
            for &(c, v) in &entries[row_start[r]..row_start[r + 1]] {
                let k = next[c];
                index[k] = r;
                value[k] = v;
                next[c] += 1;
            }
        }
        CscMatrix { nrows, ncols, start, index, value }
    }

    pub fn transpose(&self) -> CscMatrix {
        let mut count = vec![0usize; self.nrows + 1];
        for &r in &self.index {
            count[r + 1] += 1;
        }
        for r in 0..self.nrows {
            count[r + 1] += count[r];
        }
        let start = count.clone();
        let mut next = count;
        let mut index = vec![0; self.index.len()];
        let mut value = vec![0.0; self.index.len()];
        for c in 0..self.ncols {
            for k in self.start[c]..self.start[c + 1] {
                let r = self.index[k];
                let dst = next[r];
                index[dst] = c;
                value[dst] = self.value[k];
                next[r] += 1;
            }
        }
        CscMatrix { nrows: self.ncols, ncols: self.nrows, start, index, value }
    }

    #[inline]
    pub fn col(&self, c: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.start[c], self.start[c + 1]);
        (&self.index[s..e], &self.value[s..e])
    }
}
