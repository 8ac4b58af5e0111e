use crate::error::{Error, Result};
use crate::mat::dense::DenseMat;
use crate::mat::perm::Permutation;

/// Compressed sparse row matrix over `f64`.
///
/// Within each row the column indices are strictly increasing, which the
/// constructor enforces; duplicates are therefore impossible once a value of
/// this type exists. Explicitly stored zeros are allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseCsr {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseCsr {
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_ptr.len() != n_rows + 1 {
            return Err(Error::Structure(format!(
                "row_ptr has {} entries for {} rows",
                row_ptr.len(),
                n_rows
            )));
        }
        if row_ptr[0] != 0 || *row_ptr.last().unwrap() != col_idx.len() {
            return Err(Error::Structure(
                "row_ptr must start at 0 and end at nnz".into(),
            ));
        }
        if col_idx.len() != values.len() {
            return Err(Error::Structure(format!(
                "{} column indices but {} values",
                col_idx.len(),
                values.len()
            )));
        }
        for r in 0..n_rows {
            let (lo, hi) = (row_ptr[r], row_ptr[r + 1]);
            if lo > hi {
                return Err(Error::Structure(format!("row_ptr decreases at row {r}")));
            }
            let mut last: Option<usize> = None;
            for &c in &col_idx[lo..hi] {
                if c >= n_cols {
                    return Err(Error::Structure(format!(
                        "column index {c} out of range in row {r}"
                    )));
                }
                if let Some(prev) = last {
                    if c == prev {
                        return Err(Error::Structure(format!("duplicate column {c} in row {r}")));
                    }
                    if c < prev {
                        return Err(Error::Structure(format!(
                            "unsorted column indices in row {r}"
                        )));
                    }
                }
                last = Some(c);
            }
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn zero(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            row_ptr: vec![0; n_rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Build from unordered `(row, col, value)` triplets. Duplicate
    /// coordinates are rejected rather than summed: every producer in this
    /// crate emits each entry once, so a duplicate signals a bug upstream.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut counts = vec![0usize; n_rows + 1];
        for &(r, c, _) in triplets {
            if r >= n_rows || c >= n_cols {
                return Err(Error::Structure(format!(
                    "triplet ({r}, {c}) outside {n_rows}x{n_cols}"
                )));
            }
            counts[r + 1] += 1;
        }
        for r in 0..n_rows {
            counts[r + 1] += counts[r];
        }
        let row_ptr = counts.clone();
        let nnz = triplets.len();
        let mut col_idx = vec![0usize; nnz];
        let mut values = vec![0.0f64; nnz];
        let mut next = row_ptr.clone();
        for &(r, c, v) in triplets {
            let slot = next[r];
            col_idx[slot] = c;
            values[slot] = v;
            next[r] += 1;
        }
        // Sort each row by column; a repeat coordinate becomes adjacent and
        // is caught by the constructor's strict ordering check.
        for r in 0..n_rows {
            let (lo, hi) = (row_ptr[r], row_ptr[r + 1]);
            let mut order: Vec<usize> = (lo..hi).collect();
            order.sort_by_key(|&k| col_idx[k]);
            let cs: Vec<usize> = order.iter().map(|&k| col_idx[k]).collect();
            let vs: Vec<f64> = order.iter().map(|&k| values[k]).collect();
            col_idx[lo..hi].copy_from_slice(&cs);
            values[lo..hi].copy_from_slice(&vs);
        }
        Self::new(n_rows, n_cols, row_ptr, col_idx, values)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `r`.
    #[inline]
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    /// Stored value at `(r, c)`, or `None` when the entry is structurally absent.
    pub fn get(&self, r: usize, c: usize) -> Option<f64> {
        let (cols, vals) = self.row(r);
        cols.binary_search(&c).ok().map(|k| vals[k])
    }

    pub fn to_dense(&self) -> DenseMat {
        let mut d = DenseMat::zeros(self.n_rows, self.n_cols);
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                d.set(r, c, v);
            }
        }
        d
    }

    pub fn transpose(&self) -> SparseCsr {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for c in 0..self.n_cols {
            counts[c + 1] += counts[c];
        }
        let row_ptr = counts.clone();
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![0.0f64; self.nnz()];
        let mut next = row_ptr.clone();
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                let slot = next[c];
                col_idx[slot] = r;
                values[slot] = v;
                next[c] += 1;
            }
        }
        // Row-major traversal emits ascending row indices per column.
        SparseCsr {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// `y = A x` with `x` of length `n_cols`.
    pub fn spmv(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.n_cols || y.len() != self.n_rows {
            return Err(Error::Dimension(format!(
                "spmv of {}x{} with x of {} and y of {}",
                self.n_rows,
                self.n_cols,
                x.len(),
                y.len()
            )));
        }
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            let mut acc = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c];
            }
            y[r] = acc;
        }
        Ok(())
    }

    /// `y = Aᵀ x` with `x` of length `n_rows`, using row access only.
    pub fn spmv_transpose(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.n_rows || y.len() != self.n_cols {
            return Err(Error::Dimension(format!(
                "transposed spmv of {}x{} with x of {} and y of {}",
                self.n_rows,
                self.n_cols,
                x.len(),
                y.len()
            )));
        }
        y.fill(0.0);
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            let xr = x[r];
            for (&c, &v) in cols.iter().zip(vals) {
                y[c] += v * xr;
            }
        }
        Ok(())
    }

    /// Reorder columns: the entry at `(r, c)` moves to `(r, p.new_of(c))`.
    /// Rows and the entry count are untouched.
    pub fn permute_cols(&self, p: &Permutation) -> Result<SparseCsr> {
        if p.len() != self.n_cols {
            return Err(Error::Dimension(format!(
                "column permutation of length {} for {} columns",
                p.len(),
                self.n_cols
            )));
        }
        let mut col_idx = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            scratch.clear();
            scratch.extend(cols.iter().zip(vals).map(|(&c, &v)| (p.new_of(c), v)));
            scratch.sort_by_key(|&(c, _)| c);
            for &(c, v) in &scratch {
                col_idx.push(c);
                values.push(v);
            }
        }
        Ok(SparseCsr {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_ptr: self.row_ptr.clone(),
            col_idx,
            values,
        })
    }

    /// Reorder rows: output row `i` is input row `p.old_of(i)`.
    pub fn permute_rows(&self, p: &Permutation) -> Result<SparseCsr> {
        if p.len() != self.n_rows {
            return Err(Error::Dimension(format!(
                "row permutation of length {} for {} rows",
                p.len(),
                self.n_rows
            )));
        }
        let mut row_ptr = Vec::with_capacity(self.n_rows + 1);
        let mut col_idx = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        row_ptr.push(0);
        for new in 0..self.n_rows {
            let (cols, vals) = self.row(p.old_of(new));
            col_idx.extend_from_slice(cols);
            values.extend_from_slice(vals);
            row_ptr.push(col_idx.len());
        }
        Ok(SparseCsr {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Copy out the half-open window `rows x cols`, reindexed to start at
    /// `(0, 0)`. Entries outside the window are dropped.
    pub fn extract_sub_csr(
        &self,
        rows: std::ops::Range<usize>,
        cols: std::ops::Range<usize>,
    ) -> Result<SparseCsr> {
        if rows.end > self.n_rows || cols.end > self.n_cols {
            return Err(Error::Dimension(format!(
                "window {:?}x{:?} outside {}x{}",
                rows, cols, self.n_rows, self.n_cols
            )));
        }
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for r in rows.clone() {
            let (cs, vs) = self.row(r);
            let lo = cs.partition_point(|&c| c < cols.start);
            let hi = cs.partition_point(|&c| c < cols.end);
            for k in lo..hi {
                col_idx.push(cs[k] - cols.start);
                values.push(vs[k]);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(SparseCsr {
            n_rows: rows.len(),
            n_cols: cols.len(),
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Drop structurally empty rows. Returns the compacted matrix and the
    /// map from compacted row index back to the original row index.
    pub fn gather_nonempty_rows(&self) -> (SparseCsr, Vec<usize>) {
        let mut row_map = Vec::new();
        let mut row_ptr = vec![0usize];
        for r in 0..self.n_rows {
            if self.row_ptr[r + 1] > self.row_ptr[r] {
                row_map.push(r);
                row_ptr.push(row_ptr.last().unwrap() + (self.row_ptr[r + 1] - self.row_ptr[r]));
            }
        }
        let mut col_idx = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        for &r in &row_map {
            let (cs, vs) = self.row(r);
            col_idx.extend_from_slice(cs);
            values.extend_from_slice(vs);
        }
        (
            SparseCsr {
                n_rows: row_map.len(),
                n_cols: self.n_cols,
                row_ptr,
                col_idx,
                values,
            },
            row_map,
        )
    }

    /// Frobenius norm of the stored entries.
    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SparseCsr {
        // [ 1 0 2 ]
        // [ 0 0 0 ]
        // [ 3 4 0 ]
        SparseCsr::new(
            3,
            3,
            vec![0, 2, 2, 4],
            vec![0, 2, 0, 1],
            vec![1.0, 2.0, 3.0, 4.0],
        )
        .unwrap()
    }

    #[test]
    fn constructor_rejects_bad_structure() {
        assert!(SparseCsr::new(2, 2, vec![0, 1], vec![0], vec![1.0]).is_err());
        assert!(SparseCsr::new(1, 2, vec![0, 2], vec![1, 0], vec![1.0, 2.0]).is_err());
        assert!(SparseCsr::new(1, 2, vec![0, 2], vec![1, 1], vec![1.0, 2.0]).is_err());
        assert!(SparseCsr::new(1, 2, vec![0, 1], vec![5], vec![1.0]).is_err());
    }

    #[test]
    fn triplets_sort_and_reject_duplicates() {
        let a = SparseCsr::from_triplets(2, 3, &[(1, 2, 5.0), (0, 1, 1.0), (1, 0, 2.0)]).unwrap();
        assert_eq!(a.row(1), (&[0usize, 2][..], &[2.0, 5.0][..]));
        assert!(SparseCsr::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 2.0)]).is_err());
    }

    #[test]
    fn dense_conversion_matches_entries() {
        let d = sample().to_dense();
        assert_eq!(d.get(0, 2), 2.0);
        assert_eq!(d.get(1, 1), 0.0);
        assert_eq!(d.get(2, 1), 4.0);
    }

    #[test]
    fn column_permutation_moves_entries() {
        // Single row [a b c]; send old column j to new position q[j] = [2, 0, 1][j].
        let a = SparseCsr::new(1, 3, vec![0, 3], vec![0, 1, 2], vec![1.0, 2.0, 3.0]).unwrap();
        let p = Permutation::from_forward(vec![1, 2, 0]).unwrap();
        assert_eq!(p.inverse(), &[2, 0, 1]);
        let b = a.permute_cols(&p).unwrap();
        let d = b.to_dense();
        assert_eq!((d.get(0, 0), d.get(0, 1), d.get(0, 2)), (2.0, 3.0, 1.0));
    }

    #[test]
    fn row_permutation_reorders_rows() {
        let p = Permutation::from_forward(vec![2, 0, 1]).unwrap();
        let b = sample().permute_rows(&p).unwrap();
        assert_eq!(b.row(0), (&[0usize, 1][..], &[3.0, 4.0][..]));
        assert_eq!(b.row(1), (&[0usize, 2][..], &[1.0, 2.0][..]));
        assert_eq!(b.row(2).0.len(), 0);
    }

    #[test]
    fn window_extraction() {
        let a = sample();
        let w = a.extract_sub_csr(0..3, 0..3).unwrap();
        assert_eq!(w, a);
        let w = a.extract_sub_csr(2..3, 1..3).unwrap();
        assert_eq!(w.row(0), (&[0usize][..], &[4.0][..]));
        let w = a.extract_sub_csr(1..1, 0..0).unwrap();
        assert_eq!(w.nnz(), 0);
    }

    #[test]
    fn gather_drops_empty_rows() {
        let (g, map) = sample().gather_nonempty_rows();
        assert_eq!(map, vec![0, 2]);
        assert_eq!(g.n_rows(), 2);
        assert_eq!(g.row(1), (&[0usize, 1][..], &[3.0, 4.0][..]));
    }

    #[test]
    fn spmv_and_transpose_agree_with_dense() {
        let a = sample();
        let x = [1.0, -2.0, 0.5];
        let mut y = [0.0; 3];
        a.spmv(&x, &mut y).unwrap();
        assert_eq!(y, [2.0, 0.0, -5.0]);
        let mut z = [0.0; 3];
        a.spmv_transpose(&x, &mut z).unwrap();
        // Aᵀx: col0: 1*1 + 3*0.5 = 2.5; col1: 4*0.5 = 2; col2: 2*1 = 2.
        assert_eq!(z, [2.5, 2.0, 2.0]);
    }
}
