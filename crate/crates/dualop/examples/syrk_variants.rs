//! The three symmetric-product strategies computing F = Y^T Y on a
//! stepped Y: identical lower triangles, different operation counts.

use dualop::cholesky::FactorBundle;
use dualop::error::Result;
use dualop::problem::{generate, DecompositionSpec};
use dualop::stepped::{stepped_permutation, BlockPolicy, SteppedProfile};
use dualop::syrk::{syrk, SyrkConfig, SyrkVariant};
use dualop::trsm::{trsm, TrsmConfig};

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

    // The product consumes the solved right-hand sides.
    let mut y = bstepped.to_dense();
    trsm(&fb.l, &mut y, &profile, &TrsmConfig::default())?;
    println!(
        "Y is {} x {}; F = Y^T Y is {1} x {1}\n",
        y.n_rows(),
        y.n_cols()
    );

    let mut reference = None;
    for (name, variant) in [
        ("baseline    ", SyrkVariant::Baseline),
        ("input split ", SyrkVariant::InputSplit),
        ("output split", SyrkVariant::OutputSplit),
    ] {
        let cfg = SyrkConfig {
            variant,
            partition: BlockPolicy::FixedSize(16),
        };
        let (f, flops) = syrk(&y, &profile, &cfg)?;
        let diff = match &reference {
            None => {
                reference = Some(f.clone());
                0.0
            }
            Some(r) => f.rel_frobenius_diff(r)?,
        };
        println!(
            "{name}: {:>9} multiply-adds, vs baseline {diff:.1e}",
            flops.multiply_adds
        );
    }

    // F is a Gram matrix: its diagonal is strictly positive here because no
    // multiplier column of the solved system is zero.
    let f = reference.unwrap();
    let min_diag = (0..f.n_rows())
        .map(|i| f.get(i, i))
        .fold(f64::INFINITY, f64::min);
    println!("\nsmallest diagonal entry of F: {min_diag:.3e} (positive, as a Gram matrix must be)");
    Ok(())
}
