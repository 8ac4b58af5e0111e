//! Triangular solves with many right-hand sides: `X ← L⁻¹X` in place.
//!
//! Four variants share one contract and differ only in how much of the zero
//! region of a stepped right-hand side they refuse to touch:
//!
//! * **baseline** (sparse or dense factor storage): plain forward
//!   substitution over all rows and columns. The dense path materializes the
//!   factor once and sweeps every subdiagonal position, which is the honest
//!   cost model for a dense BLAS TRSM.
//! * **rhs split**: the columns of `X` are cut into blocks; each block is
//!   solved against only the trailing subfactor below its first column
//!   pivot, skipping the all-zero top of the block entirely.
//! * **factor split**: the factor is cut into diagonal blocks; each block is
//!   solved against only the currently active columns, then a GEMM pushes
//!   its contribution down to the remaining rows. With pruning, rows of the
//!   subdiagonal panel that hold no nonzeros are gathered out and the GEMM
//!   runs compacted.
//!
//! Every variant counts the multiply-add and division operations it actually
//! performs, so FLOP columns in benchmark output are exact integers and
//! reproducible run to run.

use crate::error::{Error, Result};
use crate::mat::{DenseMat, FlopCounter, SparseCsr};
use crate::stepped::{block_boundaries, BlockPolicy, SteppedProfile};
use std::ops::Range;

/// Which solve strategy to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrsmVariant {
    BaselineDense,
    BaselineSparse,
    RhsSplit,
    FactorSplit,
}

/// How the factor (or its per-block pieces) is stored and iterated during
/// the solve: sparse rows skip structural zeros, dense blocks pay for every
/// position below the diagonal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactorStorage {
    Sparse,
    Dense,
}

/// Full configuration for [`trsm`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrsmConfig {
    pub variant: TrsmVariant,
    /// Block partition for the split variants; ignored by the baselines.
    pub partition: BlockPolicy,
    /// Storage for per-block factor pieces in the split variants.
    pub factor_block_storage: FactorStorage,
    /// Gather out empty panel rows before the factor-split GEMM. Only
    /// meaningful for [`TrsmVariant::FactorSplit`] with dense blocks; the
    /// sparse path skips empty rows inherently.
    pub pruning: bool,
}

impl Default for TrsmConfig {
    fn default() -> Self {
        TrsmConfig {
            variant: TrsmVariant::FactorSplit,
            partition: BlockPolicy::FixedSize(500),
            factor_block_storage: FactorStorage::Sparse,
            pruning: true,
        }
    }
}

/// Dispatch to the configured variant.
pub fn trsm(
    l: &SparseCsr,
    x: &mut DenseMat,
    profile: &SteppedProfile,
    cfg: &TrsmConfig,
) -> Result<FlopCounter> {
    match cfg.variant {
        TrsmVariant::BaselineDense => trsm_baseline(l, x, FactorStorage::Dense),
        TrsmVariant::BaselineSparse => trsm_baseline(l, x, FactorStorage::Sparse),
        TrsmVariant::RhsSplit => {
            trsm_rhs_split(l, x, profile, cfg.partition, cfg.factor_block_storage)
        }
        TrsmVariant::FactorSplit => trsm_factor_split(
            l,
            x,
            profile,
            cfg.partition,
            cfg.factor_block_storage,
            cfg.pruning,
        ),
    }
}

/// Forward substitution over all rows and all columns.
pub fn trsm_baseline(
    l: &SparseCsr,
    x: &mut DenseMat,
    storage: FactorStorage,
) -> Result<FlopCounter> {
    check_factor(l)?;
    check_rhs(l, x)?;
    let mut flops = FlopCounter::default();
    let m = x.n_cols();
    match storage {
        FactorStorage::Sparse => solve_sparse(l, x, 0, 0..m, &mut flops)?,
        FactorStorage::Dense => {
            let n = l.n_rows();
            let lf = densify_window(l, 0..n, 0..n);
            solve_dense(&lf, n, x, 0, 0..m, &mut flops)?;
        }
    }
    Ok(flops)
}

/// Solve each column block against only the subfactor below the block's
/// first column pivot. The pivots are sorted, so the first column of a block
/// carries its minimum, and everything above it is zero for the whole block.
pub fn trsm_rhs_split(
    l: &SparseCsr,
    x: &mut DenseMat,
    profile: &SteppedProfile,
    partition: BlockPolicy,
    storage: FactorStorage,
) -> Result<FlopCounter> {
    check_factor(l)?;
    check_rhs(l, x)?;
    check_stepped_cover(profile, x)?;
    let n = l.n_rows();
    let mut flops = FlopCounter::default();
    for b in block_boundaries(x.n_cols(), partition)? {
        let r = profile.col_pivots[b.start];
        if r >= n {
            // Empty column; every later column is empty too.
            break;
        }
        match storage {
            FactorStorage::Sparse => {
                let sub = l.extract_sub_csr(r..n, r..n)?;
                solve_sparse(&sub, x, r, b, &mut flops)?;
            }
            FactorStorage::Dense => {
                let lf = densify_window(l, r..n, r..n);
                solve_dense(&lf, n - r, x, r, b, &mut flops)?;
            }
        }
    }
    Ok(flops)
}

/// Blocked forward substitution: walk diagonal blocks top-left to
/// bottom-right; solve each against the active column range, then subtract
/// its contribution from the rows below through the subdiagonal panel.
pub fn trsm_factor_split(
    l: &SparseCsr,
    x: &mut DenseMat,
    profile: &SteppedProfile,
    partition: BlockPolicy,
    block_storage: FactorStorage,
    pruning: bool,
) -> Result<FlopCounter> {
    check_factor(l)?;
    check_rhs(l, x)?;
    check_stepped_cover(profile, x)?;
    let n = l.n_rows();
    let widths = trsm_width_schedule(profile, partition)?;
    let bounds = block_boundaries(n, partition)?;
    let mut flops = FlopCounter::default();
    for (b, &w) in bounds.iter().zip(&widths) {
        if w == 0 {
            continue;
        }
        let (r0, r1) = (b.start, b.end);
        match block_storage {
            FactorStorage::Sparse => {
                let db = l.extract_sub_csr(r0..r1, r0..r1)?;
                solve_sparse(&db, x, r0, 0..w, &mut flops)?;
            }
            FactorStorage::Dense => {
                let lf = densify_window(l, r0..r1, r0..r1);
                solve_dense(&lf, r1 - r0, x, r0, 0..w, &mut flops)?;
            }
        }
        if r1 == n {
            continue;
        }
        match block_storage {
            FactorStorage::Sparse => gemm_update_sparse(l, x, r0, r1, w, &mut flops),
            FactorStorage::Dense => {
                let panel = l.extract_sub_csr(r1..n, r0..r1)?;
                if pruning {
                    gemm_update_dense_pruned(&panel, x, r0, r1, w, &mut flops);
                } else {
                    gemm_update_dense_full(&panel, x, r0, r1, w, &mut flops);
                }
            }
        }
    }
    Ok(flops)
}

/// Active column count per factor block: the number of columns whose pivot
/// lies above the block's lower edge. Those are exactly the columns a solve
/// can have filled anywhere in or above the block; the count equals
/// `1 + max row trail over the block` once the solve has filled the shape
/// out, and unlike the literal trail of a sparse input it stays correct for
/// right-hand sides whose columns hold isolated entries. Non-decreasing from
/// block to block.
pub fn trsm_width_schedule(profile: &SteppedProfile, partition: BlockPolicy) -> Result<Vec<usize>> {
    if !profile.is_stepped() {
        return Err(Error::Structure(
            "width schedule requires a stepped profile; apply the stepped permutation first".into(),
        ));
    }
    let bounds = block_boundaries(profile.n_rows(), partition)?;
    Ok(bounds
        .iter()
        .map(|b| profile.col_pivots.partition_point(|&p| p < b.end))
        .collect())
}

fn check_factor(l: &SparseCsr) -> Result<()> {
    if l.n_rows() != l.n_cols() {
        return Err(Error::Dimension(format!(
            "triangular factor must be square, got {}x{}",
            l.n_rows(),
            l.n_cols()
        )));
    }
    for r in 0..l.n_rows() {
        let (cols, vals) = l.row(r);
        match cols.last() {
            Some(&c) if c == r => {
                if vals[vals.len() - 1] == 0.0 {
                    return Err(Error::SingularFactor { row: r });
                }
            }
            Some(&c) if c > r => {
                return Err(Error::Structure(format!(
                    "entry above the diagonal in factor row {r} (column {c})"
                )));
            }
            _ => return Err(Error::SingularFactor { row: r }),
        }
    }
    Ok(())
}

fn check_rhs(l: &SparseCsr, x: &DenseMat) -> Result<()> {
    if x.n_rows() != l.n_rows() {
        return Err(Error::Dimension(format!(
            "factor of size {} against right-hand side with {} rows",
            l.n_rows(),
            x.n_rows()
        )));
    }
    Ok(())
}

fn check_stepped_cover(profile: &SteppedProfile, x: &DenseMat) -> Result<()> {
    profile.validate_stepped_cover(x)
}

/// Forward substitution of a local factor `ls` (q×q, indices rebased to 0)
/// against rows `row0..row0+q` of `x`, restricted to `cols`.
fn solve_sparse(
    ls: &SparseCsr,
    x: &mut DenseMat,
    row0: usize,
    cols: Range<usize>,
    flops: &mut FlopCounter,
) -> Result<()> {
    let (c0, c1) = (cols.start, cols.end);
    let w = c1 - c0;
    if w == 0 {
        return Ok(());
    }
    let ld = x.ld();
    let vals = x.values_mut();
    for i in 0..ls.n_rows() {
        let (lcols, lvals) = ls.row(i);
        match lcols.last() {
            Some(&d) if d == i => {}
            _ => return Err(Error::SingularFactor { row: row0 + i }),
        }
        let nd = lcols.len() - 1;
        let (head, tail) = vals.split_at_mut((row0 + i) * ld);
        let xrow = &mut tail[c0..c1];
        for t in 0..nd {
            let base = (row0 + lcols[t]) * ld;
            let src = &head[base + c0..base + c1];
            let v = lvals[t];
            for (dst, s) in xrow.iter_mut().zip(src) {
                *dst -= v * *s;
            }
        }
        flops.add_muladds((nd * w) as u64);
        let d = lvals[nd];
        if d == 0.0 {
            return Err(Error::SingularFactor { row: row0 + i });
        }
        for dst in xrow.iter_mut() {
            *dst /= d;
        }
        flops.add_divisions(w as u64);
    }
    Ok(())
}

/// Forward substitution with a dense row-major factor block `lf` (q×q),
/// sweeping every subdiagonal position.
fn solve_dense(
    lf: &[f64],
    q: usize,
    x: &mut DenseMat,
    row0: usize,
    cols: Range<usize>,
    flops: &mut FlopCounter,
) -> Result<()> {
    let (c0, c1) = (cols.start, cols.end);
    let w = c1 - c0;
    if w == 0 {
        return Ok(());
    }
    let ld = x.ld();
    let vals = x.values_mut();
    for i in 0..q {
        let (head, tail) = vals.split_at_mut((row0 + i) * ld);
        let xrow = &mut tail[c0..c1];
        for k in 0..i {
            let v = lf[i * q + k];
            let base = (row0 + k) * ld;
            let src = &head[base + c0..base + c1];
            for (dst, s) in xrow.iter_mut().zip(src) {
                *dst -= v * *s;
            }
        }
        flops.add_muladds((i * w) as u64);
        let d = lf[i * q + i];
        if d == 0.0 {
            return Err(Error::SingularFactor { row: row0 + i });
        }
        for dst in xrow.iter_mut() {
            *dst /= d;
        }
        flops.add_divisions(w as u64);
    }
    Ok(())
}

/// `X[r1.., 0..w] -= L[r1.., r0..r1] · X[r0..r1, 0..w]` using the sparse
/// panel rows directly; empty rows cost nothing.
fn gemm_update_sparse(
    l: &SparseCsr,
    x: &mut DenseMat,
    r0: usize,
    r1: usize,
    w: usize,
    flops: &mut FlopCounter,
) {
    let ld = x.ld();
    let vals = x.values_mut();
    let mut mas = 0u64;
    for r in r1..l.n_rows() {
        let (cs, vs) = l.row(r);
        let lo = cs.partition_point(|&c| c < r0);
        let hi = cs.partition_point(|&c| c < r1);
        if lo == hi {
            continue;
        }
        let (head, tail) = vals.split_at_mut(r * ld);
        let xrow = &mut tail[..w];
        for t in lo..hi {
            let base = cs[t] * ld;
            let src = &head[base..base + w];
            let v = vs[t];
            for (dst, s) in xrow.iter_mut().zip(src) {
                *dst -= v * *s;
            }
        }
        mas += ((hi - lo) * w) as u64;
    }
    flops.add_muladds(mas);
}

/// Same update through a fully materialized dense panel: every position of
/// the panel participates, zeros included.
fn gemm_update_dense_full(
    panel: &SparseCsr,
    x: &mut DenseMat,
    r0: usize,
    r1: usize,
    w: usize,
    flops: &mut FlopCounter,
) {
    let nb = panel.n_cols();
    let rows_below = panel.n_rows();
    let pdense = densify_window(panel, 0..rows_below, 0..nb);
    let ld = x.ld();
    let vals = x.values_mut();
    for i in 0..rows_below {
        let (head, tail) = vals.split_at_mut((r1 + i) * ld);
        let xrow = &mut tail[..w];
        for k in 0..nb {
            let v = pdense[i * nb + k];
            let base = (r0 + k) * ld;
            let src = &head[base..base + w];
            for (dst, s) in xrow.iter_mut().zip(src) {
                *dst -= v * *s;
            }
        }
    }
    flops.add_muladds((rows_below * nb * w) as u64);
}

/// Pruned dense update: gather the panel's nonempty rows, run the GEMM
/// compacted into a scratch buffer, scatter the result back by subtraction.
fn gemm_update_dense_pruned(
    panel: &SparseCsr,
    x: &mut DenseMat,
    r0: usize,
    r1: usize,
    w: usize,
    flops: &mut FlopCounter,
) {
    let (compact, row_map) = panel.gather_nonempty_rows();
    let na = compact.n_rows();
    if na == 0 {
        return;
    }
    let nb = compact.n_cols();
    let cdense = densify_window(&compact, 0..na, 0..nb);
    let ld = x.ld();
    let mut scratch = vec![0.0; na * w];
    {
        let vals = x.values();
        for i in 0..na {
            let srow = &mut scratch[i * w..(i + 1) * w];
            for k in 0..nb {
                let v = cdense[i * nb + k];
                let base = (r0 + k) * ld;
                let src = &vals[base..base + w];
                for (dst, s) in srow.iter_mut().zip(src) {
                    *dst += v * *s;
                }
            }
        }
    }
    flops.add_muladds((na * nb * w) as u64);
    let vals = x.values_mut();
    for (i, &pr) in row_map.iter().enumerate() {
        let base = (r1 + pr) * ld;
        let dst = &mut vals[base..base + w];
        for (d, s) in dst.iter_mut().zip(&scratch[i * w..(i + 1) * w]) {
            *d -= *s;
        }
    }
}

/// Row-major densification of a window of `l`.
fn densify_window(l: &SparseCsr, rows: Range<usize>, cols: Range<usize>) -> Vec<f64> {
    let nc = cols.len();
    let mut out = vec![0.0; rows.len() * nc];
    for (i, r) in rows.enumerate() {
        let (cs, vs) = l.row(r);
        let lo = cs.partition_point(|&c| c < cols.start);
        let hi = cs.partition_point(|&c| c < cols.end);
        for t in lo..hi {
            out[i * nc + (cs[t] - cols.start)] = vs[t];
        }
    }
    out
}
