//! Sparse Cholesky of a regularized subdomain stiffness under the three
//! available orderings: fill-in, reconstruction accuracy, and a solve.

use dualop::cholesky::{reconstruction_error, FactorBundle};
use dualop::error::Result;
use dualop::ordering::{order_matrix, OrderingMethod};
use dualop::problem::{generate, DecompositionSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<()> {
    let d = generate(&DecompositionSpec {
        dim: 2,
        elements_per_edge: 8,
        subdomains_per_edge: 2,
        regularization_rho: 1.0,
    })?;
    let k = &d.subdomains[0].k_reg;
    println!(
        "stiffness: {} x {}, nnz {}\n",
        k.n_rows(),
        k.n_cols(),
        k.nnz()
    );

    for method in [
        OrderingMethod::MinimumDegree,
        OrderingMethod::ReverseCuthillMcKee,
        OrderingMethod::Natural,
    ] {
        let perm = order_matrix(k, method)?;
        let fb = FactorBundle::factorize(k, perm)?;
        println!(
            "{method:?}: factor nnz {} ({:.2}x the input), reconstruction error {:.2e}",
            fb.l.nnz(),
            fb.l.nnz() as f64 / k.nnz() as f64,
            reconstruction_error(k, &fb)?
        );
    }

    // Solve K x = b and verify the residual directly.
    let fb = FactorBundle::factorize_auto(k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let b: Vec<f64> = (0..k.n_rows()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let (x, flops) = fb.solve(&b)?;
    let mut kx = vec![0.0; k.n_rows()];
    k.spmv(&x, &mut kx)?;
    let r = kx
        .iter()
        .zip(&b)
        .map(|(a, c)| (a - c) * (a - c))
        .sum::<f64>()
        .sqrt();
    let bn = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    println!(
        "\nsolve: relative residual {:.2e}, {} multiply-adds + {} divisions",
        r / bn,
        flops.multiply_adds,
        flops.divisions
    );
    Ok(())
}
