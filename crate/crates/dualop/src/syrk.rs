//! Symmetric rank-k update `F = YᵀY`, lower triangle only.
//!
//! The baseline sweeps every row of `Y` against the full lower triangle of
//! the output. The two blocked variants skip the zero region of a stepped
//! `Y`:
//!
//! * **input split** cuts the rows of `Y` into blocks; a block whose last
//!   row trails off at column `w-1` can only touch the top-left `w × w`
//!   corner of the output, so the inner update stops there.
//! * **output split** cuts the columns of `Y` (equivalently the rows of the
//!   output) into blocks; each output block row needs only the rows of `Y`
//!   below the block's first column pivot, shrinking the summation length.
//!
//! All variants count their multiply-adds exactly; there are no divisions.

use crate::error::Result;
use crate::mat::{DenseMat, FlopCounter};
use crate::stepped::{block_boundaries, BlockPolicy, SteppedProfile};

/// Which update strategy to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SyrkVariant {
    Baseline,
    InputSplit,
    OutputSplit,
}

/// Full configuration for [`syrk`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SyrkConfig {
    pub variant: SyrkVariant,
    /// Block partition for the split variants; ignored by the baseline.
    pub partition: BlockPolicy,
}

impl Default for SyrkConfig {
    fn default() -> Self {
        SyrkConfig {
            variant: SyrkVariant::InputSplit,
            partition: BlockPolicy::FixedSize(500),
        }
    }
}

/// Dispatch to the configured variant.
pub fn syrk(
    y: &DenseMat,
    profile: &SteppedProfile,
    cfg: &SyrkConfig,
) -> Result<(DenseMat, FlopCounter)> {
    match cfg.variant {
        SyrkVariant::Baseline => Ok(syrk_baseline(y)),
        SyrkVariant::InputSplit => syrk_input_split(y, profile, cfg.partition),
        SyrkVariant::OutputSplit => syrk_output_split(y, profile, cfg.partition),
    }
}

/// Plain `F[r][c] = Σ_k Y[k][r]·Y[k][c]` for `r ≥ c`; the strict upper
/// triangle of the result stays zero.
pub fn syrk_baseline(y: &DenseMat) -> (DenseMat, FlopCounter) {
    let (n, m) = (y.n_rows(), y.n_cols());
    let mut f = DenseMat::zeros(m, m);
    for k in 0..n {
        let yk = y.row(k);
        for r in 0..m {
            let yr = yk[r];
            let frow = f.row_mut(r);
            for c in 0..=r {
                frow[c] += yr * yk[c];
            }
        }
    }
    let mut flops = FlopCounter::default();
    flops.add_muladds((n * m * (m + 1) / 2) as u64);
    (f, flops)
}

/// Row blocks of `Y`: block `[r0, r1)` is zero right of its last row's
/// trail, so its contribution lands entirely in the top-left `w × w` corner
/// of the output, `w = 1 + trail(r1 - 1)`. Blocks accumulate top to bottom,
/// which keeps the summation order deterministic.
pub fn syrk_input_split(
    y: &DenseMat,
    profile: &SteppedProfile,
    partition: BlockPolicy,
) -> Result<(DenseMat, FlopCounter)> {
    profile.validate_stepped_cover(y)?;
    let m = y.n_cols();
    let mut f = DenseMat::zeros(m, m);
    let mut mas = 0u64;
    for b in block_boundaries(y.n_rows(), partition)? {
        let w = match profile.row_trails[b.end - 1] {
            None => continue,
            Some(t) => t + 1,
        };
        for k in b.clone() {
            let yk = y.row(k);
            for r in 0..w {
                let yr = yk[r];
                let frow = f.row_mut(r);
                for c in 0..=r {
                    frow[c] += yr * yk[c];
                }
            }
        }
        mas += (b.len() * (w * (w + 1) / 2)) as u64;
    }
    let mut flops = FlopCounter::default();
    flops.add_muladds(mas);
    Ok((f, flops))
}

/// Column blocks of `Y`, i.e. row blocks of the output: for block
/// `[c0, c1)` every involved column is zero above the block's first pivot,
/// so both the diagonal-block update and the GEMM against the earlier
/// columns sum only over the rows below it.
pub fn syrk_output_split(
    y: &DenseMat,
    profile: &SteppedProfile,
    partition: BlockPolicy,
) -> Result<(DenseMat, FlopCounter)> {
    profile.validate_stepped_cover(y)?;
    let (n, m) = (y.n_rows(), y.n_cols());
    let mut f = DenseMat::zeros(m, m);
    let mut mas = 0u64;
    for b in block_boundaries(m, partition)? {
        let (c0, c1) = (b.start, b.end);
        let p = profile.col_pivots[c0];
        if p >= n {
            // Empty column; all later columns are empty too.
            break;
        }
        let wb = c1 - c0;
        // Diagonal block, lower triangle.
        for k in p..n {
            let yk = y.row(k);
            for r in c0..c1 {
                let yr = yk[r];
                let frow = f.row_mut(r);
                for c in c0..=r {
                    frow[c] += yr * yk[c];
                }
            }
        }
        mas += ((n - p) * (wb * (wb + 1) / 2)) as u64;
        // Left part: this block column against all earlier columns.
        if c0 > 0 {
            for k in p..n {
                let yk = y.row(k);
                for r in c0..c1 {
                    let yr = yk[r];
                    let frow = f.row_mut(r);
                    for c in 0..c0 {
                        frow[c] += yr * yk[c];
                    }
                }
            }
            mas += ((n - p) * wb * c0) as u64;
        }
    }
    let mut flops = FlopCounter::default();
    flops.add_muladds(mas);
    Ok((f, flops))
}
