//! Shared random-instance builders for the kernel unit tests.

use crate::mat::{DenseMat, SparseCsr};
use crate::stepped::SteppedProfile;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random lower-triangular factor with unit-plus diagonal and the given
/// subdiagonal fill probability.
pub fn random_lower_factor(n: usize, density: f64, rng: &mut ChaCha8Rng) -> SparseCsr {
    let mut t = Vec::new();
    for r in 0..n {
        for c in 0..r {
            if rng.gen::<f64>() < density {
                t.push((r, c, rng.gen_range(-1.0..1.0)));
            }
        }
        t.push((r, r, 1.0 + rng.gen::<f64>()));
    }
    SparseCsr::from_triplets(n, n, &t).unwrap()
}

pub fn random_dense(n: usize, m: usize, rng: &mut ChaCha8Rng) -> DenseMat {
    let mut x = DenseMat::zeros(n, m);
    for r in 0..n {
        for c in 0..m {
            x.set(r, c, rng.gen_range(-1.0..1.0));
        }
    }
    x
}

/// `m` sorted pivot rows drawn from `0..n`.
pub fn sorted_random_pivots(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..m).map(|_| rng.gen_range(0..n)).collect();
    p.sort_unstable();
    p
}

/// Random stepped matrix with the requested (sorted) column pivots: the
/// pivot entry of each column is guaranteed nonzero, positions below it are
/// filled with probability 0.7, everything above is exactly zero. Returns
/// the matrix together with the staircase-hull profile the blocked kernels
/// consume.
pub fn random_stepped(
    n: usize,
    m: usize,
    pivots: &[usize],
    rng: &mut ChaCha8Rng,
) -> (DenseMat, SteppedProfile) {
    assert_eq!(pivots.len(), m);
    assert!(
        pivots.windows(2).all(|w| w[0] <= w[1]),
        "pivots must be sorted"
    );
    let mut x = DenseMat::zeros(n, m);
    for (c, &p) in pivots.iter().enumerate() {
        for r in p..n {
            if r == p || rng.gen::<f64>() < 0.7 {
                let mut v = rng.gen_range(-1.0..1.0);
                if v == 0.0 {
                    v = 0.5;
                }
                x.set(r, c, v);
            }
        }
    }
    let profile = SteppedProfile::of_dense(&x).hull();
    (x, profile)
}
