use crate::error::{Error, Result};
use std::ops::Range;

/// Row-major dense matrix with an explicit leading dimension.
///
/// Entry `(r, c)` lives at `values[r * ld + c]`, so a contiguous matrix has
/// `ld == n_cols` and a submatrix view keeps its parent's `ld`. Views carry
/// an offset instead of a pointer, which keeps them safe to hand around.
#[derive(Clone, Debug)]
pub struct DenseMat {
    n_rows: usize,
    n_cols: usize,
    ld: usize,
    values: Vec<f64>,
}

impl DenseMat {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            ld: n_cols,
            values: vec![0.0; n_rows * n_cols],
        }
    }

    /// Construct with padding columns: `ld >= n_cols`.
    pub fn zeros_with_ld(n_rows: usize, n_cols: usize, ld: usize) -> Result<Self> {
        if ld < n_cols {
            return Err(Error::Structure(format!(
                "leading dimension {ld} smaller than column count {n_cols}"
            )));
        }
        let len = if n_rows == 0 {
            0
        } else {
            (n_rows - 1) * ld + n_cols
        };
        Ok(Self {
            n_rows,
            n_cols,
            ld,
            values: vec![0.0; len],
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(n_rows, n_cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::Dimension(format!(
                    "row {r} has {} entries, expected {n_cols}",
                    row.len()
                )));
            }
            m.values[r * n_cols..r * n_cols + n_cols].copy_from_slice(row);
        }
        Ok(m)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn ld(&self) -> usize {
        self.ld
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        debug_assert!(r < self.n_rows && c < self.n_cols);
        self.values[r * self.ld + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(r < self.n_rows && c < self.n_cols);
        self.values[r * self.ld + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.ld..r * self.ld + self.n_cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.values[r * self.ld..r * self.ld + self.n_cols]
    }

    /// Two row slices at once; `r0 != r1` is required.
    #[inline]
    pub fn two_rows_mut(&mut self, r0: usize, r1: usize) -> (&mut [f64], &mut [f64]) {
        assert!(r0 != r1);
        let (lo, hi, swap) = if r0 < r1 {
            (r0, r1, false)
        } else {
            (r1, r0, true)
        };
        let (head, tail) = self.values.split_at_mut(hi * self.ld);
        let a = &mut head[lo * self.ld..lo * self.ld + self.n_cols];
        let b = &mut tail[..self.n_cols];
        if swap {
            (b, a)
        } else {
            (a, b)
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mutable access to the raw row-major storage (including any padding
    /// beyond `n_cols` when `ld > n_cols`), for kernels that index with
    /// leading-dimension arithmetic.
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Read-only window. Ranges are half-open and must lie inside the matrix.
    pub fn view(&self, rows: Range<usize>, cols: Range<usize>) -> DenseView<'_> {
        assert!(rows.end <= self.n_rows && cols.end <= self.n_cols);
        assert!(rows.start <= rows.end && cols.start <= cols.end);
        DenseView {
            values: &self.values,
            offset: rows.start * self.ld + cols.start,
            n_rows: rows.end - rows.start,
            n_cols: cols.end - cols.start,
            ld: self.ld,
        }
    }

    /// Mutable window with the same conventions as [`DenseMat::view`].
    pub fn view_mut(&mut self, rows: Range<usize>, cols: Range<usize>) -> DenseViewMut<'_> {
        assert!(rows.end <= self.n_rows && cols.end <= self.n_cols);
        assert!(rows.start <= rows.end && cols.start <= cols.end);
        DenseViewMut {
            offset: rows.start * self.ld + cols.start,
            n_rows: rows.end - rows.start,
            n_cols: cols.end - cols.start,
            ld: self.ld,
            values: &mut self.values,
        }
    }

    /// Frobenius norm of the logical (non-padding) content.
    pub fn frobenius_norm(&self) -> f64 {
        let mut acc = 0.0;
        for r in 0..self.n_rows {
            for &v in self.row(r) {
                acc += v * v;
            }
        }
        acc.sqrt()
    }

    /// Largest absolute entry-wise difference. Shapes must match.
    pub fn max_abs_diff(&self, other: &DenseMat) -> Result<f64> {
        if self.n_rows != other.n_rows || self.n_cols != other.n_cols {
            return Err(Error::Dimension(format!(
                "comparing {}x{} with {}x{}",
                self.n_rows, self.n_cols, other.n_rows, other.n_cols
            )));
        }
        let mut worst = 0.0f64;
        for r in 0..self.n_rows {
            for c in 0..self.n_cols {
                worst = worst.max((self.get(r, c) - other.get(r, c)).abs());
            }
        }
        Ok(worst)
    }

    /// `‖self − other‖_F / max(‖other‖_F, floor)` with a tiny floor so the
    /// all-zero case compares equal instead of dividing by zero.
    pub fn rel_frobenius_diff(&self, other: &DenseMat) -> Result<f64> {
        if self.n_rows != other.n_rows || self.n_cols != other.n_cols {
            return Err(Error::Dimension(format!(
                "comparing {}x{} with {}x{}",
                self.n_rows, self.n_cols, other.n_rows, other.n_cols
            )));
        }
        let mut num = 0.0;
        for r in 0..self.n_rows {
            for c in 0..self.n_cols {
                let d = self.get(r, c) - other.get(r, c);
                num += d * d;
            }
        }
        let den = other.frobenius_norm();
        Ok(num.sqrt() / den.max(f64::MIN_POSITIVE.sqrt()))
    }
}

/// Borrowed read-only window into a [`DenseMat`].
#[derive(Clone, Copy)]
pub struct DenseView<'a> {
    values: &'a [f64],
    offset: usize,
    n_rows: usize,
    n_cols: usize,
    ld: usize,
}

impl<'a> DenseView<'a> {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        debug_assert!(r < self.n_rows && c < self.n_cols);
        self.values[self.offset + r * self.ld + c]
    }

    #[inline]
    pub fn row(&self, r: usize) -> &'a [f64] {
        let start = self.offset + r * self.ld;
        &self.values[start..start + self.n_cols]
    }
}

/// Borrowed mutable window into a [`DenseMat`].
pub struct DenseViewMut<'a> {
    values: &'a mut [f64],
    offset: usize,
    n_rows: usize,
    n_cols: usize,
    ld: usize,
}

impl<'a> DenseViewMut<'a> {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        debug_assert!(r < self.n_rows && c < self.n_cols);
        self.values[self.offset + r * self.ld + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(r < self.n_rows && c < self.n_cols);
        self.values[self.offset + r * self.ld + c] = v;
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        let start = self.offset + r * self.ld;
        &mut self.values[start..start + self.n_cols]
    }
}

/// `dst[row_map[k], :] += src[k, :]` for every source row `k`.
///
/// `row_map` addresses rows of `dst`; widths must match and the map must stay
/// in range. Used to scatter a compacted GEMM product back into the rows it
/// was gathered from.
pub fn scatter_add_rows(
    src: &DenseMat,
    row_map: &[usize],
    mut dst: DenseViewMut<'_>,
) -> Result<()> {
    if src.n_rows() != row_map.len() {
        return Err(Error::Dimension(format!(
            "row map has {} entries for {} source rows",
            row_map.len(),
            src.n_rows()
        )));
    }
    if src.n_cols() != dst.n_cols() {
        return Err(Error::Dimension(format!(
            "scatter width {} into window of width {}",
            src.n_cols(),
            dst.n_cols()
        )));
    }
    for (k, &r) in row_map.iter().enumerate() {
        if r >= dst.n_rows() {
            return Err(Error::Dimension(format!(
                "row map entry {r} outside destination window of {} rows",
                dst.n_rows()
            )));
        }
        let drow = dst.row_mut(r);
        for (d, s) in drow.iter_mut().zip(src.row(k)) {
            *d += s;
        }
    }
    Ok(())
}
