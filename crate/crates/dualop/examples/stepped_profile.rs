//! The stepped shape: sort the gluing matrix's columns by first-nonzero
//! row and draw the staircase a triangular solve will fill.

use dualop::cholesky::FactorBundle;
use dualop::error::Result;
use dualop::problem::{generate, DecompositionSpec};
use dualop::stepped::{stepped_permutation, uniformity_diagnostic, SteppedProfile};

fn draw(a: &dualop::mat::SparseCsr, label: &str) {
    println!("{label} ({} x {}):", a.n_rows(), a.n_cols());
    for r in 0..a.n_rows() {
        let (cols, vals) = a.row(r);
        let mut line = vec!['.'; a.n_cols()];
        for (&c, &v) in cols.iter().zip(vals) {
            line[c] = if v > 0.0 { '+' } else { '-' };
        }
        println!("  {}", line.into_iter().collect::<String>());
    }
}

fn main() -> Result<()> {
    let d = generate(&DecompositionSpec {
        dim: 2,
        elements_per_edge: 2,
        subdomains_per_edge: 2,
        regularization_rho: 1.0,
    })?;
    let p = &d.subdomains[1];
    let fb = FactorBundle::factorize_auto(&p.k_reg)?;

    // Row order must match the factor before the column sort means anything.
    let bperm = p.bt.permute_rows(&fb.perm)?;
    draw(&bperm, "gluing matrix in factor row order");

    let sp = stepped_permutation(&bperm);
    let bstepped = bperm.permute_cols(&sp)?;
    draw(
        &bstepped,
        "\nsame matrix with columns sorted by first nonzero",
    );

    let exact = SteppedProfile::of_sparse(&bstepped);
    let hull = exact.hull();
    println!("\ncolumn pivots: {:?}", hull.col_pivots);
    println!("row trails (staircase hull): {:?}", hull.row_trails);
    println!("exact profile stepped: {}", exact.is_stepped());
    println!("hull profile stepped:  {}", hull.is_stepped());
    hull.validate_stepped_cover(&bstepped.to_dense())?;
    println!("hull covers every nonzero of the permuted matrix");

    if let Some(u) = uniformity_diagnostic(&hull) {
        println!("step uniformity diagnostic: {u:.3} (1 = perfectly even staircase)");
    }
    Ok(())
}
