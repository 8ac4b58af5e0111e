//! The theoretical work reduction of the split kernels on the exact
//! triangular shape: as blocks shrink, dense-counting baseline FLOPs over
//! split-kernel FLOPs approach 3 for both the solve and the product.

use dualop::error::Result;
use dualop::mat::{DenseMat, SparseCsr};
use dualop::stepped::{BlockPolicy, SteppedProfile};
use dualop::syrk::{syrk_baseline, syrk_input_split};
use dualop::trsm::{trsm_baseline, trsm_rhs_split, FactorStorage};

/// Unit lower-triangular factor and a fully populated lower-triangular
/// right-hand-side block: column c first becomes nonzero at row c.
fn triangular_instance(n: usize) -> (SparseCsr, DenseMat, SteppedProfile) {
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, 1.0));
    }
    let l = SparseCsr::from_triplets(n, n, &t).unwrap();
    let mut y = DenseMat::zeros(n, n);
    for r in 0..n {
        for c in 0..=r {
            y.set(r, c, 1.0 + ((r + 2 * c) % 5) as f64);
        }
    }
    let profile = SteppedProfile::of_dense(&y);
    (l, y, profile)
}

fn main() -> Result<()> {
    let n = 1024;
    let (l, y0, profile) = triangular_instance(n);

    let mut yb = y0.clone();
    let trsm_base = trsm_baseline(&l, &mut yb, FactorStorage::Dense)?;
    println!(
        "triangular solve, n = m = {n}, dense-counting baseline: {} ops",
        trsm_base.total()
    );
    println!("{:>10} | {:>14} | ratio", "block", "split ops");
    for s in [256usize, 64, 16, 4] {
        let mut y = y0.clone();
        let f = trsm_rhs_split(
            &l,
            &mut y,
            &profile,
            BlockPolicy::FixedSize(s),
            FactorStorage::Dense,
        )?;
        println!(
            "{s:>10} | {:>14} | {:.4}",
            f.total(),
            trsm_base.total() as f64 / f.total() as f64
        );
    }
    println!("limit for vanishing blocks: 3 (the solve touches only the filled third)\n");

    let (_, syrk_base) = syrk_baseline(&y0);
    println!(
        "symmetric product, n = m = {n}, baseline: {} ops",
        syrk_base.total()
    );
    println!("{:>10} | {:>14} | ratio", "block", "split ops");
    for s in [256usize, 64, 16, 4] {
        let (_, f) = syrk_input_split(&y0, &profile, BlockPolicy::FixedSize(s))?;
        println!(
            "{s:>10} | {:>14} | {:.4}",
            f.total(),
            syrk_base.total() as f64 / f.total() as f64
        );
    }
    println!("limit for vanishing blocks: 3 (triangle-of-triangle counting)");

    // The exact closed forms for block size 1, printed for comparison:
    // baseline solve counts n(n-1)/2 * n positions; the split solve fills
    // sum over columns of the trailing triangle, n(n+1)(n+2)/6.
    let nn = n as u64;
    println!("\nclosed forms at block size 1:");
    println!(
        "  solve:   baseline n^2(n-1)/2 = {}",
        nn * nn * (nn - 1) / 2
    );
    println!(
        "  solve:   split n(n+1)(n+2)/6 = {}",
        nn * (nn + 1) * (nn + 2) / 6
    );
    println!(
        "  product: baseline n * n(n+1)/2 = {}",
        nn * nn * (nn + 1) / 2
    );
    println!(
        "  product: split n(n+1)(n+2)/6   = {}",
        nn * (nn + 1) * (nn + 2) / 6
    );
    Ok(())
}
