//! Shared builders for the integration test targets.
#![allow(dead_code)] // each test target uses a different subset

use dualop::mat::{DenseMat, SparseCsr};
use dualop::stepped::SteppedProfile;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Lower-triangular factor with unit-or-larger diagonal: well conditioned
/// so solve comparisons hold to tight tolerances.
pub fn random_lower_factor(n: usize, density: f64, rng: &mut ChaCha8Rng) -> SparseCsr {
    let mut t = Vec::new();
    for i in 0..n {
        for j in 0..i {
            if rng.gen::<f64>() < density {
                t.push((i, j, rng.gen_range(-1.0..1.0)));
            }
        }
        t.push((i, i, 1.0 + rng.gen::<f64>()));
    }
    SparseCsr::from_triplets(n, n, &t).expect("triplets are in range")
}

/// Rectangular sparse matrix with roughly `density` fill and values
/// bounded away from zero so stored entries never alias structural zeros.
pub fn random_sparse(
    n_rows: usize,
    n_cols: usize,
    density: f64,
    rng: &mut ChaCha8Rng,
) -> SparseCsr {
    let mut t = Vec::new();
    for i in 0..n_rows {
        for j in 0..n_cols {
            if rng.gen::<f64>() < density {
                let v = (0.25 + rng.gen::<f64>()) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
                t.push((i, j, v));
            }
        }
    }
    SparseCsr::from_triplets(n_rows, n_cols, &t).expect("triplets are in range")
}

/// Random permutation of `0..n`.
pub fn random_permutation(n: usize, rng: &mut ChaCha8Rng) -> dualop::mat::Permutation {
    let mut forward: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        forward.swap(i, j);
    }
    dualop::mat::Permutation::from_forward(forward).expect("a shuffle is a bijection")
}

/// Random stepped right-hand sides with guaranteed-nonzero column pivots,
/// plus the staircase cover the kernels validate against.
pub fn random_stepped(n: usize, m: usize, rng: &mut ChaCha8Rng) -> (DenseMat, SteppedProfile) {
    let mut pivots: Vec<usize> = (0..m).map(|_| rng.gen_range(0..n)).collect();
    pivots.sort_unstable();
    let mut y = DenseMat::zeros(n, m);
    for (c, &p) in pivots.iter().enumerate() {
        for r in p..n {
            if r == p || rng.gen::<f64>() < 0.7 {
                let v = (0.5 + rng.gen::<f64>()) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
                y.set(r, c, v);
            }
        }
    }
    let profile = SteppedProfile::of_dense(&y).hull();
    (y, profile)
}

/// Fully populated lower-triangular RHS: the exact-triangular stepped
/// shape with column pivots 0, 1, ..., n-1.
pub fn triangular_stepped(n: usize) -> (DenseMat, SteppedProfile) {
    let mut y = DenseMat::zeros(n, n);
    for r in 0..n {
        for c in 0..=r {
            y.set(r, c, 1.0 + ((r * 31 + c * 7) % 13) as f64);
        }
    }
    let profile = SteppedProfile::of_dense(&y);
    (y, profile)
}

/// Unit diagonal factor: solves leave values intact, so operation counts
/// can be checked against closed forms without numerical concerns.
pub fn identity_factor(n: usize) -> SparseCsr {
    SparseCsr::identity(n)
}
