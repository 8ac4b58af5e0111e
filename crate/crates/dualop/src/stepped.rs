//! Stepped-shape machinery for the right-hand-side matrix `B̃ᵀ`.
//!
//! A matrix is *stepped* when the first nonzero of each column (its pivot)
//! moves downward monotonically from left to right, and the last nonzero of
//! each row (its trail) moves rightward monotonically from top to bottom.
//! Triangular solves against such a matrix never touch the zero region above
//! the pivots, and `YᵀY` products never touch the zero region right of the
//! trails; the blocked kernels in [`crate::trsm`] and [`crate::syrk`] exploit
//! exactly that.
//!
//! Any matrix can be brought into stepped shape by reordering columns alone,
//! which is free for the assembled operator: a symmetric permutation of the
//! result undoes it. The rows, which are tied to the factor's fill-reducing
//! order, are never moved.

use crate::error::{Error, Result};
use crate::mat::{DenseMat, Permutation, SparseCsr};
use std::ops::Range;

/// Exact sparsity profile: per-column first-nonzero row and per-row
/// last-nonzero column. An entry counts as nonzero only when its value is
/// not exactly `0.0`; there is no tolerance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SteppedProfile {
    n_rows: usize,
    /// First nonzero row per column; empty columns hold the sentinel `n_rows`.
    pub col_pivots: Vec<usize>,
    /// Last nonzero column per row; `None` marks an empty row.
    pub row_trails: Vec<Option<usize>>,
}

impl SteppedProfile {
    pub fn of_dense(x: &DenseMat) -> Self {
        let (n, m) = (x.n_rows(), x.n_cols());
        let mut col_pivots = vec![n; m];
        let mut row_trails = vec![None; n];
        for r in 0..n {
            for (c, &v) in x.row(r).iter().enumerate() {
                if v != 0.0 {
                    if col_pivots[c] == n {
                        col_pivots[c] = r;
                    }
                    row_trails[r] = Some(c);
                }
            }
        }
        Self {
            n_rows: n,
            col_pivots,
            row_trails,
        }
    }

    pub fn of_sparse(a: &SparseCsr) -> Self {
        let (n, m) = (a.n_rows(), a.n_cols());
        let mut col_pivots = vec![n; m];
        let mut row_trails = vec![None; n];
        for r in 0..n {
            let (cols, vals) = a.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                if v != 0.0 {
                    if col_pivots[c] == n {
                        col_pivots[c] = r;
                    }
                    row_trails[r] = Some(c);
                }
            }
        }
        Self {
            n_rows: n,
            col_pivots,
            row_trails,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.col_pivots.len()
    }

    /// Pivots non-decreasing left to right and trails non-decreasing top to
    /// bottom. Empty columns (sentinel `n_rows`) sort last; empty rows
    /// (`None`) sort first.
    pub fn is_stepped(&self) -> bool {
        self.col_pivots.windows(2).all(|w| w[0] <= w[1])
            && self.row_trails.windows(2).all(|w| w[0] <= w[1])
    }

    /// Check that this profile describes `x` exactly.
    pub fn validate_dense(&self, x: &DenseMat) -> Result<()> {
        self.check_dims(x)?;
        let actual = SteppedProfile::of_dense(x);
        if actual != *self {
            return Err(Error::ProfileMismatch(
                "profile does not match the matrix contents".into(),
            ));
        }
        Ok(())
    }

    /// Check that every nonzero of `x` lies inside this profile: at or below
    /// its column pivot and at or left of its row trail. Weaker than
    /// [`validate_dense`](Self::validate_dense) — the profile may over-cover
    /// (claim structure that happens to hold zeros), which is what the
    /// blocked kernels need: a solve fills a column from the pivot downward,
    /// so the profile of the input matrix is a cover for every intermediate
    /// state as well.
    pub fn covers_dense(&self, x: &DenseMat) -> Result<()> {
        self.check_dims(x)?;
        for r in 0..self.n_rows {
            let trail = self.row_trails[r];
            for (c, &v) in x.row(r).iter().enumerate() {
                if v != 0.0 && (r < self.col_pivots[c] || trail.is_none_or(|t| c > t)) {
                    return Err(Error::ProfileMismatch(format!(
                        "nonzero at ({r},{c}) outside the claimed profile"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The staircase hull: keep the column pivots, replace each row trail by
    /// the right-most column whose pivot is at or above that row. For a
    /// matrix filled densely below its pivots the hull equals the exact
    /// profile; for one with isolated entries (like a signed boolean gluing
    /// matrix) the hull is the shape its triangular solve will fill, which
    /// the blocked kernels must budget for.
    pub fn hull(&self) -> SteppedProfile {
        let mut by_pivot: Vec<(usize, usize)> = self
            .col_pivots
            .iter()
            .copied()
            .zip(0..self.n_cols())
            .collect();
        by_pivot.sort_unstable();
        let mut row_trails = vec![None; self.n_rows];
        let mut next = 0;
        let mut best: Option<usize> = None;
        for (r, trail) in row_trails.iter_mut().enumerate() {
            while next < by_pivot.len() && by_pivot[next].0 <= r {
                let c = by_pivot[next].1;
                best = Some(best.map_or(c, |b: usize| b.max(c)));
                next += 1;
            }
            *trail = best;
        }
        SteppedProfile {
            n_rows: self.n_rows,
            col_pivots: self.col_pivots.clone(),
            row_trails,
        }
    }

    /// The combined precondition of every blocked kernel: the profile is
    /// stepped and covers `x`.
    pub fn validate_stepped_cover(&self, x: &DenseMat) -> Result<()> {
        if !self.is_stepped() {
            return Err(Error::Structure(
                "matrix is not in stepped shape; apply the stepped permutation first".into(),
            ));
        }
        self.covers_dense(x)
    }

    fn check_dims(&self, x: &DenseMat) -> Result<()> {
        if self.n_rows != x.n_rows() || self.n_cols() != x.n_cols() {
            return Err(Error::ProfileMismatch(format!(
                "profile for {}x{} used with {}x{} matrix",
                self.n_rows,
                self.n_cols(),
                x.n_rows(),
                x.n_cols()
            )));
        }
        Ok(())
    }
}

/// Column order that makes `a` stepped: columns sorted by first-nonzero row,
/// ties kept in original order. Empty columns land at the far right. Applying
/// the returned permutation via [`SparseCsr::permute_cols`] and asking again
/// yields the identity.
pub fn stepped_permutation(a: &SparseCsr) -> Permutation {
    let profile = SteppedProfile::of_sparse(a);
    let mut order: Vec<usize> = (0..a.n_cols()).collect();
    order.sort_by_key(|&c| profile.col_pivots[c]);
    // sort_by_key is stable, so equal pivots keep their original order.
    Permutation::from_forward(order).expect("sorted index list is a bijection")
}

/// Uniform partition policy along one dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockPolicy {
    /// Blocks of `s` indices; the final block absorbs the remainder (smaller).
    FixedSize(usize),
    /// `c` blocks of size `ceil(extent / c)`; the final block is smaller.
    FixedCount(usize),
}

/// Split `0..extent` into contiguous blocks.
pub fn block_boundaries(extent: usize, policy: BlockPolicy) -> Result<Vec<Range<usize>>> {
    let size = match policy {
        BlockPolicy::FixedSize(s) => {
            if s == 0 {
                return Err(Error::Parameter("block size must be positive".into()));
            }
            s
        }
        BlockPolicy::FixedCount(c) => {
            if c == 0 {
                return Err(Error::Parameter("block count must be positive".into()));
            }
            extent.div_ceil(c).max(1)
        }
    };
    let mut blocks = Vec::with_capacity(extent.div_ceil(size.max(1)));
    let mut start = 0;
    while start < extent {
        let end = (start + size).min(extent);
        blocks.push(start..end);
        start = end;
    }
    Ok(blocks)
}

/// How evenly the pivots cover the rows: largest pivot step divided by the
/// ideal step `n_rows / n_nonempty_cols`. Close to 1 means the staircase is
/// near-uniform and the blocked kernels approach their best case; this is a
/// diagnostic only, nothing enforces a threshold. `None` when the matrix has
/// no nonzero column.
pub fn uniformity_diagnostic(profile: &SteppedProfile) -> Option<f64> {
    let mut pivots: Vec<usize> = profile
        .col_pivots
        .iter()
        .copied()
        .filter(|&p| p < profile.n_rows)
        .collect();
    if pivots.is_empty() {
        return None;
    }
    pivots.sort_unstable();
    let mut max_gap = pivots[0];
    for w in pivots.windows(2) {
        max_gap = max_gap.max(w[1] - w[0]);
    }
    let ideal = profile.n_rows as f64 / pivots.len() as f64;
    Some(max_gap as f64 / ideal.max(f64::MIN_POSITIVE))
}
