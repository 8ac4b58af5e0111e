//! The four triangular-solve strategies on one stepped system: identical
//! answers, very different operation counts, and bit-exact zeros above the
//! column pivots throughout.

use dualop::cholesky::FactorBundle;
use dualop::error::Result;
use dualop::problem::{generate, DecompositionSpec};
use dualop::stepped::{stepped_permutation, BlockPolicy, SteppedProfile};
use dualop::trsm::{trsm, FactorStorage, TrsmConfig, TrsmVariant};

fn main() -> Result<()> {
    let d = generate(&DecompositionSpec {
        dim: 3,
        elements_per_edge: 3,
        subdomains_per_edge: 2,
        regularization_rho: 1.0,
    })?;
    let p = &d.subdomains[0];
    let fb = FactorBundle::factorize_auto(&p.k_reg)?;
    let bperm = p.bt.permute_rows(&fb.perm)?;
    let sp = stepped_permutation(&bperm);
    let bstepped = bperm.permute_cols(&sp)?;
    let profile = SteppedProfile::of_sparse(&bstepped).hull();
    let y0 = bstepped.to_dense();
    println!(
        "solving L Y = B for {} right-hand sides against a {} x {} factor with {} nonzeros\n",
        y0.n_cols(),
        fb.n(),
        fb.n(),
        fb.l.nnz()
    );

    let configs: [(&str, TrsmConfig); 6] = [
        (
            "baseline dense   ",
            TrsmConfig {
                variant: TrsmVariant::BaselineDense,
                partition: BlockPolicy::FixedSize(16),
                factor_block_storage: FactorStorage::Dense,
                pruning: false,
            },
        ),
        (
            "baseline sparse  ",
            TrsmConfig {
                variant: TrsmVariant::BaselineSparse,
                partition: BlockPolicy::FixedSize(16),
                factor_block_storage: FactorStorage::Sparse,
                pruning: false,
            },
        ),
        (
            "rhs split        ",
            TrsmConfig {
                variant: TrsmVariant::RhsSplit,
                partition: BlockPolicy::FixedSize(16),
                factor_block_storage: FactorStorage::Sparse,
                pruning: false,
            },
        ),
        (
            "factor split     ",
            TrsmConfig {
                variant: TrsmVariant::FactorSplit,
                partition: BlockPolicy::FixedSize(16),
                factor_block_storage: FactorStorage::Sparse,
                pruning: false,
            },
        ),
        (
            "factor split+prune",
            TrsmConfig {
                variant: TrsmVariant::FactorSplit,
                partition: BlockPolicy::FixedSize(16),
                factor_block_storage: FactorStorage::Sparse,
                pruning: true,
            },
        ),
        (
            "factor split dense",
            TrsmConfig {
                variant: TrsmVariant::FactorSplit,
                partition: BlockPolicy::FixedSize(16),
                factor_block_storage: FactorStorage::Dense,
                pruning: true,
            },
        ),
    ];

    let mut reference = None;
    for (name, cfg) in &configs {
        let mut y = y0.clone();
        let flops = trsm(&fb.l, &mut y, &profile, cfg)?;

        let diff = match &reference {
            None => {
                reference = Some(y.clone());
                0.0
            }
            Some(r) => y.rel_frobenius_diff(r)?,
        };

        let mut preserved = 0usize;
        for (c, &piv) in profile.col_pivots.iter().enumerate() {
            for r in 0..piv {
                assert_eq!(y.get(r, c).to_bits(), 0, "zero above pivot must stay +0.0");
                preserved += 1;
            }
        }
        println!(
            "{name}: {:>8} multiply-adds, {:>5} divisions, vs baseline {diff:.1e}, {preserved} exact zeros kept",
            flops.multiply_adds, flops.divisions
        );
    }
    Ok(())
}
