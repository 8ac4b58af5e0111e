//! Sparse Cholesky factorization `P K Pᵀ = L Lᵀ`.
//!
//! The factorization is split in two stages. [`symbolic_factor`] walks the
//! elimination tree to predict the row-wise nonzero pattern of `L` from the
//! sparsity of `K` alone; it never touches values. [`numeric_factor`] then
//! fills that pattern with an up-looking sweep, one row of `L` at a time. The
//! split pays off when the same structure is factorized repeatedly with new
//! values, which is exactly what refactorization in a time-stepping or
//! parameter-sweep loop does.
//!
//! `L` is stored row-wise (CSR, diagonal entry last in each row) because both
//! the up-looking sweep and the forward substitutions consume rows; the
//! backward (transposed) solve runs as a column sweep over the same rows, so
//! no transposed copy is kept.

use crate::error::{Error, Result};
use crate::mat::{DenseMat, FlopCounter, Permutation, SparseCsr};
use crate::ordering;

/// Row-wise nonzero pattern of `L` plus the elimination tree it came from.
/// Depends only on the sparsity of the matrix it was computed for, so it can
/// season any number of numeric refactorizations with matching structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicFactor {
    n: usize,
    parent: Vec<Option<usize>>,
    /// CSR layout of L: columns of row `i` ascending, diagonal last.
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl SymbolicFactor {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Entries in the predicted factor, diagonal included.
    pub fn pattern_nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn etree_parent(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn row_pattern(&self, i: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
    }
}

/// Predict the pattern of `L` for `P K Pᵀ` without computing values.
pub fn symbolic_factor(k: &SparseCsr, perm: &Permutation) -> Result<SymbolicFactor> {
    if k.n_rows() != k.n_cols() {
        return Err(Error::Dimension(format!(
            "factorization requires a square matrix, got {}x{}",
            k.n_rows(),
            k.n_cols()
        )));
    }
    if perm.len() != k.n_rows() {
        return Err(Error::Dimension(format!(
            "permutation of length {} for order-{} matrix",
            perm.len(),
            k.n_rows()
        )));
    }
    let n = k.n_rows();
    let a = k.permute_rows(perm)?.permute_cols(perm)?;

    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut mark = vec![usize::MAX; n];
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx: Vec<usize> = Vec::new();
    let mut scratch: Vec<usize> = Vec::new();
    row_ptr.push(0);

    for i in 0..n {
        mark[i] = i;
        scratch.clear();
        let (cols, _) = a.row(i);
        for &kcol in cols {
            if kcol >= i {
                continue;
            }
            // Walk from kcol toward the etree root, stopping at anything
            // already reached for this row.
            let mut j = kcol;
            while mark[j] != i {
                mark[j] = i;
                scratch.push(j);
                match parent[j] {
                    Some(p) => j = p,
                    None => {
                        parent[j] = Some(i);
                        break;
                    }
                }
            }
        }
        scratch.sort_unstable();
        col_idx.extend_from_slice(&scratch);
        col_idx.push(i);
        row_ptr.push(col_idx.len());
    }

    Ok(SymbolicFactor {
        n,
        parent,
        row_ptr,
        col_idx,
    })
}

/// Fill a symbolic pattern with values, producing lower-triangular `L` with
/// `L Lᵀ = P K Pᵀ`. Fails with [`Error::NotPositiveDefinite`] when a pivot
/// comes out non-positive; the reported column is in the permuted order.
pub fn numeric_factor(
    k: &SparseCsr,
    perm: &Permutation,
    symbolic: &SymbolicFactor,
) -> Result<SparseCsr> {
    if symbolic.n != k.n_rows() || k.n_rows() != k.n_cols() {
        return Err(Error::Dimension(format!(
            "symbolic pattern of order {} used with {}x{} matrix",
            symbolic.n,
            k.n_rows(),
            k.n_cols()
        )));
    }
    let n = symbolic.n;
    let a = k.permute_rows(perm)?.permute_cols(perm)?;
    let row_ptr = symbolic.row_ptr.clone();
    let col_idx = symbolic.col_idx.clone();
    let mut values = vec![0.0f64; col_idx.len()];
    // Dense workspace holding the current row of L; only pattern positions
    // are ever nonzero and they are cleared again after each row.
    let mut x = vec![0.0f64; n];

    for i in 0..n {
        let pattern = &col_idx[row_ptr[i]..row_ptr[i + 1]];
        let (acols, avals) = a.row(i);
        let mut aii = 0.0;
        for (&c, &v) in acols.iter().zip(avals) {
            if c < i {
                if pattern[..pattern.len() - 1].binary_search(&c).is_err() {
                    return Err(Error::Structure(format!(
                        "matrix entry ({i}, {c}) outside the symbolic pattern"
                    )));
                }
                x[c] = v;
            } else if c == i {
                aii = v;
            }
        }
        let mut sum_sq = 0.0;
        for (slot, &j) in pattern[..pattern.len() - 1].iter().enumerate() {
            // Finish l_ij using the already-final entries x[k] (k < j).
            let mut t = x[j];
            let (jcols, jvals) = (
                &col_idx[row_ptr[j]..row_ptr[j + 1]],
                &values[row_ptr[j]..row_ptr[j + 1]],
            );
            let dj = jvals[jcols.len() - 1];
            for (&kc, &lv) in jcols[..jcols.len() - 1].iter().zip(jvals) {
                t -= x[kc] * lv;
            }
            t /= dj;
            x[j] = t;
            sum_sq += t * t;
            values[row_ptr[i] + slot] = t;
        }
        let d = aii - sum_sq;
        if d <= 0.0 {
            for &j in &pattern[..pattern.len() - 1] {
                x[j] = 0.0;
            }
            return Err(Error::NotPositiveDefinite { col: i, value: d });
        }
        values[row_ptr[i + 1] - 1] = d.sqrt();
        for &j in &pattern[..pattern.len() - 1] {
            x[j] = 0.0;
        }
    }

    SparseCsr::new(n, n, row_ptr, col_idx, values)
}

/// Permutation, symbolic pattern, and numeric factor bundled for reuse.
#[derive(Clone, Debug)]
pub struct FactorBundle {
    pub perm: Permutation,
    pub symbolic: SymbolicFactor,
    pub l: SparseCsr,
}

impl FactorBundle {
    /// Factorize with a caller-chosen permutation.
    pub fn factorize(k: &SparseCsr, perm: Permutation) -> Result<Self> {
        let symbolic = symbolic_factor(k, &perm)?;
        let l = numeric_factor(k, &perm, &symbolic)?;
        Ok(Self { perm, symbolic, l })
    }

    /// Factorize with the default fill-reducing ordering.
    pub fn factorize_auto(k: &SparseCsr) -> Result<Self> {
        let perm = ordering::fill_reducing_order(k)?;
        Self::factorize(k, perm)
    }

    pub fn n(&self) -> usize {
        self.symbolic.n()
    }

    /// New values, same structure. The symbolic stage is skipped entirely.
    pub fn refactorize(&mut self, k: &SparseCsr) -> Result<()> {
        self.l = numeric_factor(k, &self.perm, &self.symbolic)?;
        Ok(())
    }

    /// Solve `K x = b` through both triangular sweeps, undoing the
    /// permutation at each end.
    pub fn solve(&self, b: &[f64]) -> Result<(Vec<f64>, FlopCounter)> {
        if b.len() != self.n() {
            return Err(Error::Dimension(format!(
                "solve with rhs of length {} for order {}",
                b.len(),
                self.n()
            )));
        }
        let mut flops = FlopCounter::new();
        let pb = self.perm.apply(b)?;
        let (y, f1) = trsv_lower(&self.l, &pb, false)?;
        let (z, f2) = trsv_lower(&self.l, &y, true)?;
        flops.merge(f1);
        flops.merge(f2);
        let mut out = vec![0.0; self.n()];
        for (new, &old) in self.perm.forward().iter().enumerate() {
            out[old] = z[new];
        }
        Ok((out, flops))
    }
}

/// Triangular solve with the factor's lower-triangular CSR storage:
/// `L x = b` when `transpose` is false, `Lᵀ x = b` when true. Each row must
/// carry its diagonal entry as its last stored column, and the diagonal must
/// be positive.
pub fn trsv_lower(l: &SparseCsr, b: &[f64], transpose: bool) -> Result<(Vec<f64>, FlopCounter)> {
    let n = l.n_rows();
    if l.n_cols() != n {
        return Err(Error::Dimension(format!(
            "triangular factor must be square, got {}x{}",
            n,
            l.n_cols()
        )));
    }
    if b.len() != n {
        return Err(Error::Dimension(format!(
            "rhs of length {} for order {}",
            b.len(),
            n
        )));
    }
    let mut flops = FlopCounter::new();
    let mut x = b.to_vec();
    if !transpose {
        for r in 0..n {
            let (cols, vals) = l.row(r);
            let (last_col, diag) = row_diagonal(cols, vals, r)?;
            let mut acc = x[r];
            for (&c, &v) in cols[..last_col].iter().zip(vals) {
                acc -= v * x[c];
            }
            x[r] = acc / diag;
            flops.add_muladds(last_col as u64);
            flops.add_divisions(1);
        }
    } else {
        // Column sweep: once x[r] is final, subtract its contribution from
        // every earlier unknown using row r of L (the r-th column of Lᵀ).
        for r in (0..n).rev() {
            let (cols, vals) = l.row(r);
            let (last_col, diag) = row_diagonal(cols, vals, r)?;
            let xr = x[r] / diag;
            x[r] = xr;
            for (&c, &v) in cols[..last_col].iter().zip(vals) {
                x[c] -= v * xr;
            }
            flops.add_muladds(last_col as u64);
            flops.add_divisions(1);
        }
    }
    Ok((x, flops))
}

#[inline]
fn row_diagonal(cols: &[usize], vals: &[f64], r: usize) -> Result<(usize, f64)> {
    match cols.last() {
        Some(&c) if c == r && *vals.last().unwrap() > 0.0 => {
            Ok((cols.len() - 1, vals[cols.len() - 1]))
        }
        _ => Err(Error::SingularFactor { row: r }),
    }
}

/// Dense reconstruction residual `‖P K Pᵀ − L Lᵀ‖_F / ‖K‖_F`. Materializes an
/// order-n dense matrix, so keep it to verification-sized problems.
pub fn reconstruction_error(k: &SparseCsr, bundle: &FactorBundle) -> Result<f64> {
    let n = bundle.n();
    if k.n_rows() != n || k.n_cols() != n {
        return Err(Error::Dimension(format!(
            "factor of order {n} checked against {}x{} matrix",
            k.n_rows(),
            k.n_cols()
        )));
    }
    let mut resid = k
        .permute_rows(&bundle.perm)?
        .permute_cols(&bundle.perm)?
        .to_dense();
    // Subtract L Lᵀ one column outer product at a time; the transpose gives
    // column access to L.
    let lt = bundle.l.transpose();
    subtract_llt(&mut resid, &lt);
    Ok(resid.frobenius_norm() / k.frobenius_norm().max(f64::MIN_POSITIVE))
}

fn subtract_llt(resid: &mut DenseMat, lt: &SparseCsr) {
    for kcol in 0..lt.n_rows() {
        let (rows, vals) = lt.row(kcol);
        for (&i, &vi) in rows.iter().zip(vals) {
            let row = resid.row_mut(i);
            for (&j, &vj) in rows.iter().zip(vals) {
                row[j] -= vi * vj;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csr_from_dense_rows(rows: &[&[f64]]) -> SparseCsr {
        let mut t = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    t.push((r, c, v));
                }
            }
        }
        SparseCsr::from_triplets(rows.len(), rows[0].len(), &t).unwrap()
    }

    #[test]
    fn hand_two_by_two() {
        let k = csr_from_dense_rows(&[&[4.0, 2.0], &[2.0, 5.0]]);
        let fb = FactorBundle::factorize(&k, Permutation::identity(2)).unwrap();
        let d = fb.l.to_dense();
        assert_eq!(d.get(0, 0), 2.0);
        assert_eq!(d.get(1, 0), 1.0);
        assert_eq!(d.get(1, 1), 2.0);
        assert_eq!(d.get(0, 1), 0.0);
    }

    #[test]
    fn identity_factors_to_identity() {
        let k = SparseCsr::identity(4);
        let fb = FactorBundle::factorize(&k, Permutation::identity(4)).unwrap();
        assert_eq!(fb.l, SparseCsr::identity(4));
    }

    #[test]
    fn diagonal_pattern_stays_diagonal() {
        let k = csr_from_dense_rows(&[&[4.0, 0.0, 0.0], &[0.0, 9.0, 0.0], &[0.0, 0.0, 16.0]]);
        let sym = symbolic_factor(&k, &Permutation::identity(3)).unwrap();
        assert_eq!(sym.pattern_nnz(), 3);
        for i in 0..3 {
            assert_eq!(sym.row_pattern(i), &[i]);
        }
    }

    #[test]
    fn tridiagonal_gives_bidiagonal_factor() {
        let k = csr_from_dense_rows(&[
            &[4.0, -1.0, 0.0, 0.0],
            &[-1.0, 4.0, -1.0, 0.0],
            &[0.0, -1.0, 4.0, -1.0],
            &[0.0, 0.0, -1.0, 4.0],
        ]);
        let sym = symbolic_factor(&k, &Permutation::identity(4)).unwrap();
        assert_eq!(sym.row_pattern(0), &[0]);
        for i in 1..4 {
            assert_eq!(sym.row_pattern(i), &[i - 1, i]);
        }
    }

    /// Arrow matrix under the natural order: the dense last row fills the
    /// final factor row and nothing else. The expected pattern is mirrored in
    /// a dense Cholesky of the same matrix.
    #[test]
    fn arrow_pattern_matches_dense_factor() {
        let n = 6;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 10.0));
        }
        for i in 0..n - 1 {
            t.push((n - 1, i, 1.0));
            t.push((i, n - 1, 1.0));
        }
        let k = SparseCsr::from_triplets(n, n, &t).unwrap();
        let sym = symbolic_factor(&k, &Permutation::identity(n)).unwrap();
        for i in 0..n - 1 {
            assert_eq!(sym.row_pattern(i), &[i]);
        }
        let last: Vec<usize> = (0..n).collect();
        assert_eq!(sym.row_pattern(n - 1), &last[..]);

        // Dense oracle: factorize without any sparsity and compare patterns.
        let fb = FactorBundle::factorize(&k, Permutation::identity(n)).unwrap();
        let dense = k.to_dense();
        let mut dl = vec![vec![0.0f64; n]; n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = dense.get(i, j);
                for p in 0..j {
                    s -= dl[i][p] * dl[j][p];
                }
                if i == j {
                    dl[i][j] = s.sqrt();
                } else {
                    dl[i][j] = s / dl[j][j];
                }
            }
        }
        for i in 0..n {
            for j in 0..=i {
                let structural = fb.l.get(i, j).is_some();
                assert_eq!(
                    structural,
                    dl[i][j] != 0.0,
                    "pattern mismatch at ({i}, {j})"
                );
            }
        }
    }

    #[test]
    fn non_spd_matrix_reports_failing_column() {
        let k = csr_from_dense_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
        match FactorBundle::factorize(&k, Permutation::identity(2)) {
            Err(Error::NotPositiveDefinite { col, .. }) => assert_eq!(col, 1),
            other => panic!("expected pivot failure, got {other:?}"),
        }
        let z = csr_from_dense_rows(&[&[0.0]]);
        match FactorBundle::factorize(&z, Permutation::identity(1)) {
            Err(Error::NotPositiveDefinite { col, .. }) => assert_eq!(col, 0),
            other => panic!("expected pivot failure, got {other:?}"),
        }
    }

    #[test]
    fn trsv_forward_hand_case() {
        let l = csr_from_dense_rows(&[&[2.0, 0.0], &[1.0, 1.0]]);
        let (x, flops) = trsv_lower(&l, &[4.0, 3.0], false).unwrap();
        assert_eq!(x, vec![2.0, 1.0]);
        assert_eq!(
            flops,
            FlopCounter {
                multiply_adds: 1,
                divisions: 2
            }
        );
    }

    #[test]
    fn trsv_transpose_hand_case() {
        let l = csr_from_dense_rows(&[&[2.0, 0.0], &[1.0, 1.0]]);
        // Lᵀ x = b: x1 = 3, x0 = (4 - 1*3) / 2 = 0.5.
        let (x, _) = trsv_lower(&l, &[4.0, 3.0], true).unwrap();
        assert_eq!(x, vec![0.5, 3.0]);
    }

    #[test]
    fn trsv_identity_is_copy() {
        let l = SparseCsr::identity(3);
        let (x, flops) = trsv_lower(&l, &[1.0, -2.0, 3.0], false).unwrap();
        assert_eq!(x, vec![1.0, -2.0, 3.0]);
        assert_eq!(flops.multiply_adds, 0);
    }

    #[test]
    fn trsv_rejects_missing_diagonal() {
        let l = SparseCsr::new(2, 2, vec![0, 1, 2], vec![0, 0], vec![1.0, 1.0]).unwrap();
        match trsv_lower(&l, &[1.0, 1.0], false) {
            Err(Error::SingularFactor { row }) => assert_eq!(row, 1),
            other => panic!("expected singular factor, got {other:?}"),
        }
    }

    fn random_spd(n: usize, seed: u64) -> SparseCsr {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        // Sparse M with ~3 entries per row; K = MᵀM + n·I is SPD.
        let mut dense = vec![vec![0.0f64; n]; n];
        for _ in 0..3 * n {
            let r = rng.gen_range(0..n);
            let c = rng.gen_range(0..n);
            dense[r][c] += rng.gen_range(-1.0..1.0);
        }
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let mut v = 0.0;
                for r in 0..n {
                    v += dense[r][i] * dense[r][j];
                }
                if i == j {
                    v += n as f64;
                }
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        SparseCsr::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn reconstruction_under_fill_reducing_order() {
        let k = random_spd(40, 7);
        let fb = FactorBundle::factorize_auto(&k).unwrap();
        let err = reconstruction_error(&k, &fb).unwrap();
        assert!(err < 1e-12, "reconstruction error {err}");
    }

    #[test]
    fn solve_matches_dense_elimination() {
        let k = random_spd(25, 3);
        let fb = FactorBundle::factorize_auto(&k).unwrap();
        let b: Vec<f64> = (0..25).map(|i| (i as f64 * 0.37).sin()).collect();
        let (x, _) = fb.solve(&b).unwrap();

        // Dense Gaussian elimination oracle.
        let n = 25;
        let mut aug = vec![vec![0.0f64; n + 1]; n];
        let d = k.to_dense();
        for i in 0..n {
            for j in 0..n {
                aug[i][j] = d.get(i, j);
            }
            aug[i][n] = b[i];
        }
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&a, &b| aug[a][col].abs().total_cmp(&aug[b][col].abs()))
                .unwrap();
            aug.swap(col, piv);
            for r in col + 1..n {
                let f = aug[r][col] / aug[col][col];
                for c in col..=n {
                    aug[r][c] -= f * aug[col][c];
                }
            }
        }
        let mut y = vec![0.0f64; n];
        for i in (0..n).rev() {
            let mut s = aug[i][n];
            for j in i + 1..n {
                s -= aug[i][j] * y[j];
            }
            y[i] = s / aug[i][i];
        }
        for i in 0..n {
            assert!(
                (x[i] - y[i]).abs() < 1e-10,
                "solve mismatch at {i}: {} vs {}",
                x[i],
                y[i]
            );
        }
    }

    #[test]
    fn refactorize_reuses_pattern() {
        let k1 = random_spd(30, 11);
        // Same pattern, shifted values.
        let vals2: Vec<f64> = k1
            .values()
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                v + if k1.col_idx()[i] == row_of(&k1, i) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let k2 =
            SparseCsr::new(30, 30, k1.row_ptr().to_vec(), k1.col_idx().to_vec(), vals2).unwrap();

        let mut fb = FactorBundle::factorize_auto(&k1).unwrap();
        let pattern_before: Vec<usize> = fb.l.col_idx().to_vec();
        fb.refactorize(&k2).unwrap();
        assert_eq!(fb.l.col_idx(), &pattern_before[..]);
        assert!(reconstruction_error(&k2, &fb).unwrap() < 1e-12);
    }

    fn row_of(a: &SparseCsr, flat: usize) -> usize {
        a.row_ptr().partition_point(|&p| p <= flat) - 1
    }
}
