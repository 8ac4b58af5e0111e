//! Structured multi-subdomain test problems.
//!
//! The generator meshes the unit square or cube with first-order simplices
//! (two triangles per grid cell in 2D, six tetrahedra per cell in 3D), tears
//! it into `S × S (× S)` congruent subdomains with duplicated interface
//! nodes, and emits per subdomain the regularized Laplace stiffness together
//! with its signed boolean gluing matrix. Coincident nodes shared by more
//! than two subdomains are tied by a chain of pairwise constraints, so no
//! constraint is redundant and every Lagrange multiplier touches exactly two
//! subdomains with opposite signs.
//!
//! Pure Neumann subdomains have the constant vector in their stiffness
//! kernel; [`regularize`] grounds that kernel with a single diagonal shift so
//! the factorization downstream sees a strictly SPD matrix.

use crate::error::{Error, Result};
use crate::mat::SparseCsr;

/// Geometry and decomposition parameters for [`generate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecompositionSpec {
    /// Spatial dimension, 2 or 3.
    pub dim: usize,
    /// Grid cells along each edge of one subdomain.
    pub elements_per_edge: usize,
    /// Subdomains along each edge of the unit domain.
    pub subdomains_per_edge: usize,
    /// Relative strength of the kernel-grounding shift; must be positive.
    pub regularization_rho: f64,
}

/// One torn-off subdomain: regularized stiffness, gluing matrix in `B̃ᵀ`
/// layout (one row per local DOF, one column per local multiplier), and the
/// map from local multiplier column to global multiplier index.
#[derive(Clone, Debug, PartialEq)]
pub struct SubdomainProblem {
    pub k_reg: SparseCsr,
    pub bt: SparseCsr,
    pub n: usize,
    pub m: usize,
    pub lambda_map: Vec<usize>,
}

/// The full decomposition produced by [`generate`].
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub spec: DecompositionSpec,
    pub subdomains: Vec<SubdomainProblem>,
    /// Total number of global Lagrange multipliers.
    pub total_multipliers: usize,
}

/// Stiffness of a linear triangle given its vertex coordinates.
///
/// The entries are `(b_i b_j + c_i c_j) / (4 |T|)` with the usual shape
/// gradient coefficients, so the matrix is scale invariant in 2D and its
/// rows sum to zero.
pub fn element_stiffness_2d(coords: &[[f64; 2]; 3]) -> Result<[[f64; 3]; 3]> {
    let [p0, p1, p2] = *coords;
    let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
    let area = 0.5 * det.abs();
    let scale = (p1[0] - p0[0])
        .hypot(p1[1] - p0[1])
        .max((p2[0] - p0[0]).hypot(p2[1] - p0[1]));
    if area <= 1e-14 * scale * scale {
        return Err(Error::DegenerateElement(format!(
            "triangle with area {area:e} at {coords:?}"
        )));
    }
    let b = [p1[1] - p2[1], p2[1] - p0[1], p0[1] - p1[1]];
    let c = [p2[0] - p1[0], p0[0] - p2[0], p1[0] - p0[0]];
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
        }
    }
    Ok(k)
}

/// Stiffness of a linear tetrahedron: `|T| ∇φ_i · ∇φ_j` with the shape
/// gradients taken from the inverse edge matrix.
pub fn element_stiffness_3d(coords: &[[f64; 3]; 4]) -> Result<[[f64; 4]; 4]> {
    let [p0, p1, p2, p3] = *coords;
    let e = [
        [p1[0] - p0[0], p1[1] - p0[1], p1[2] - p0[2]],
        [p2[0] - p0[0], p2[1] - p0[1], p2[2] - p0[2]],
        [p3[0] - p0[0], p3[1] - p0[1], p3[2] - p0[2]],
    ];
    let det = e[0][0] * (e[1][1] * e[2][2] - e[1][2] * e[2][1])
        - e[0][1] * (e[1][0] * e[2][2] - e[1][2] * e[2][0])
        + e[0][2] * (e[1][0] * e[2][1] - e[1][1] * e[2][0]);
    let scale = e
        .iter()
        .map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt())
        .fold(0.0f64, f64::max);
    if det.abs() <= 1e-14 * scale * scale * scale {
        return Err(Error::DegenerateElement(format!(
            "tetrahedron with 6V = {det:e} at {coords:?}"
        )));
    }
    // With edge rows e_i = p_{i+1} - p0 we have x - p0 = Eᵀλ, so the
    // gradient of λ_{i+1} is column i of E⁻¹; vertex 0 carries minus the
    // sum of the others.
    let inv_det = 1.0 / det;
    let mut g = [[0.0f64; 3]; 4];
    let cof = |r: usize, c: usize| -> f64 {
        let (r1, r2) = ((r + 1) % 3, (r + 2) % 3);
        let (c1, c2) = ((c + 1) % 3, (c + 2) % 3);
        e[r1][c1] * e[r2][c2] - e[r1][c2] * e[r2][c1]
    };
    for i in 0..3 {
        for d in 0..3 {
            // (E⁻¹)_{d i} = cof(i, d) / det by the adjugate formula.
            g[i + 1][d] = cof(i, d) * inv_det;
        }
    }
    for d in 0..3 {
        g[0][d] = -(g[1][d] + g[2][d] + g[3][d]);
    }
    let vol = det.abs() / 6.0;
    let mut k = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            k[i][j] = vol * (g[i][0] * g[j][0] + g[i][1] * g[j][1] + g[i][2] * g[j][2]);
        }
    }
    Ok(k)
}

/// Ground a (possibly singular) symmetric PSD stiffness by adding
/// `rho · trace(k) / n` to the first diagonal entry. For the pure Neumann
/// Laplace case the kernel is the constant vector, and pinning one node
/// makes the matrix SPD; an already-SPD input just becomes a little stiffer
/// at node 0.
pub fn regularize(k: &SparseCsr, rho: f64) -> Result<SparseCsr> {
    if !rho.is_finite() || rho <= 0.0 {
        return Err(Error::Parameter(format!(
            "regularization rho must be a positive finite number, got {rho}"
        )));
    }
    if k.n_rows() != k.n_cols() || k.n_rows() == 0 {
        return Err(Error::Dimension(format!(
            "regularize requires a non-empty square matrix, got {}x{}",
            k.n_rows(),
            k.n_cols()
        )));
    }
    let n = k.n_rows();
    let trace: f64 = (0..n).filter_map(|i| k.get(i, i)).sum();
    let shift = rho * trace / n as f64;
    let mut triplets = Vec::with_capacity(k.nnz() + 1);
    let mut seen_00 = false;
    for r in 0..n {
        let (cols, vals) = k.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            if r == 0 && c == 0 {
                triplets.push((r, c, v + shift));
                seen_00 = true;
            } else {
                triplets.push((r, c, v));
            }
        }
    }
    if !seen_00 {
        triplets.push((0, 0, shift));
    }
    SparseCsr::from_triplets(n, n, &triplets)
}

/// Deterministically generate the full decomposition.
pub fn generate(spec: &DecompositionSpec) -> Result<Decomposition> {
    validate(spec)?;
    let (e, s) = (spec.elements_per_edge, spec.subdomains_per_edge);
    let nodes_per_edge = e + 1;
    let n = nodes_per_edge.pow(spec.dim as u32);
    let n_sub = s.pow(spec.dim as u32);
    let h = 1.0 / (s * e) as f64;

    let mut stiffnesses = Vec::with_capacity(n_sub);
    for sub in 0..n_sub {
        let origin = subdomain_origin(spec, sub);
        let k = match spec.dim {
            2 => assemble_2d(e, h, origin),
            _ => assemble_3d(e, h, origin),
        }?;
        stiffnesses.push(regularize(&k, spec.regularization_rho)?);
    }

    // Global coincidence: walk global lattice positions in lexicographic
    // order and chain the subdomain copies of each shared position.
    let ge = s * e;
    let mut links: Vec<Vec<(usize, usize)>> = Vec::new(); // multiplier -> [(sub, local dof); 2]
    let gdim: usize = if spec.dim == 2 { 2 } else { 3 };
    let gz_extent = if gdim == 2 { 1 } else { ge + 1 };
    for gz in 0..gz_extent {
        for gy in 0..ge + 1 {
            for gx in 0..ge + 1 {
                let copies = copies_of(spec, [gx, gy, gz]);
                for pair in copies.windows(2) {
                    links.push(vec![pair[0], pair[1]]);
                }
            }
        }
    }
    let total_multipliers = links.len();

    // Per subdomain, collect the multipliers that touch it in ascending
    // global order; the first endpoint of a link gets +1, the second -1.
    let mut lambda_maps: Vec<Vec<usize>> = vec![Vec::new(); n_sub];
    let mut bt_triplets: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); n_sub];
    for (g, link) in links.iter().enumerate() {
        for (side, &(sub, dof)) in link.iter().enumerate() {
            let col = lambda_maps[sub].len();
            lambda_maps[sub].push(g);
            bt_triplets[sub].push((dof, col, if side == 0 { 1.0 } else { -1.0 }));
        }
    }

    let mut subdomains = Vec::with_capacity(n_sub);
    for (sub, k_reg) in stiffnesses.into_iter().enumerate() {
        let m = lambda_maps[sub].len();
        let bt = SparseCsr::from_triplets(n, m, &bt_triplets[sub])?;
        subdomains.push(SubdomainProblem {
            k_reg,
            bt,
            n,
            m,
            lambda_map: std::mem::take(&mut lambda_maps[sub]),
        });
    }

    Ok(Decomposition {
        spec: *spec,
        subdomains,
        total_multipliers,
    })
}

fn validate(spec: &DecompositionSpec) -> Result<()> {
    if spec.dim != 2 && spec.dim != 3 {
        return Err(Error::Parameter(format!(
            "dim must be 2 or 3, got {}",
            spec.dim
        )));
    }
    if spec.elements_per_edge == 0 {
        return Err(Error::Parameter(
            "elements_per_edge must supply at least one cell".into(),
        ));
    }
    if spec.subdomains_per_edge == 0 {
        return Err(Error::Parameter(
            "subdomains_per_edge must be at least 1".into(),
        ));
    }
    if !spec.regularization_rho.is_finite() || spec.regularization_rho <= 0.0 {
        return Err(Error::Parameter(format!(
            "regularization rho must be positive, got {}",
            spec.regularization_rho
        )));
    }
    Ok(())
}

/// Grid position (in subdomain units) of subdomain `sub`, x fastest.
fn subdomain_origin(spec: &DecompositionSpec, sub: usize) -> [usize; 3] {
    let s = spec.subdomains_per_edge;
    if spec.dim == 2 {
        [sub % s, sub / s, 0]
    } else {
        [sub % s, (sub / s) % s, sub / (s * s)]
    }
}

/// All (subdomain, local DOF) copies of a global lattice position, ascending
/// by subdomain index.
fn copies_of(spec: &DecompositionSpec, g: [usize; 3]) -> Vec<(usize, usize)> {
    let (e, s) = (spec.elements_per_edge, spec.subdomains_per_edge);
    let nodes_per_edge = e + 1;
    // Coordinate gc lies in subdomain sx iff sx*e <= gc <= (sx+1)*e, so an
    // interior plane multiple of e has two owners.
    let owners = |gc: usize| -> Vec<usize> {
        if gc.is_multiple_of(e) && gc > 0 && gc / e < s {
            vec![gc / e - 1, gc / e]
        } else {
            vec![(gc / e).min(s - 1)]
        }
    };
    let xs = owners(g[0]);
    let ys = owners(g[1]);
    let zs = if spec.dim == 2 {
        vec![0usize]
    } else {
        owners(g[2])
    };
    let mut subs: Vec<(usize, usize)> = Vec::new();
    for &sz in &zs {
        for &sy in &ys {
            for &sx in &xs {
                let sub = if spec.dim == 2 {
                    sy * s + sx
                } else {
                    (sz * s + sy) * s + sx
                };
                let (li, lj) = (g[0] - sx * e, g[1] - sy * e);
                let lk = if spec.dim == 2 { 0 } else { g[2] - sz * e };
                let dof = (lk * nodes_per_edge + lj) * nodes_per_edge + li;
                subs.push((sub, dof));
            }
        }
    }
    subs.sort_unstable();
    subs
}

fn assemble_2d(e: usize, h: f64, origin: [usize; 3]) -> Result<SparseCsr> {
    let np = e + 1;
    let n = np * np;
    let node = |i: usize, j: usize| j * np + i;
    let coord = |i: usize, j: usize| -> [f64; 2] {
        [
            (origin[0] * e + i) as f64 * h,
            (origin[1] * e + j) as f64 * h,
        ]
    };
    let mut rows: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); n];
    for j in 0..e {
        for i in 0..e {
            let quad = [
                node(i, j),
                node(i + 1, j),
                node(i + 1, j + 1),
                node(i, j + 1),
            ];
            let qc = [
                coord(i, j),
                coord(i + 1, j),
                coord(i + 1, j + 1),
                coord(i, j + 1),
            ];
            for tri in [[0usize, 1, 2], [0, 2, 3]] {
                let ids = [quad[tri[0]], quad[tri[1]], quad[tri[2]]];
                let k = element_stiffness_2d(&[qc[tri[0]], qc[tri[1]], qc[tri[2]]])?;
                for a in 0..3 {
                    for b in 0..3 {
                        *rows[ids[a]].entry(ids[b]).or_insert(0.0) += k[a][b];
                    }
                }
            }
        }
    }
    rows_to_csr(n, rows)
}

fn assemble_3d(e: usize, h: f64, origin: [usize; 3]) -> Result<SparseCsr> {
    let np = e + 1;
    let n = np * np * np;
    let node = |i: usize, j: usize, k: usize| (k * np + j) * np + i;
    let coord = |i: usize, j: usize, k: usize| -> [f64; 3] {
        [
            (origin[0] * e + i) as f64 * h,
            (origin[1] * e + j) as f64 * h,
            (origin[2] * e + k) as f64 * h,
        ]
    };
    // Kuhn split: each axis-step permutation of the cube diagonal is one tet.
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut rows: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); n];
    for kz in 0..e {
        for j in 0..e {
            for i in 0..e {
                for perm in PERMS {
                    let mut steps = [[0usize; 3]; 4];
                    for v in 1..4 {
                        steps[v] = steps[v - 1];
                        steps[v][perm[v - 1]] += 1;
                    }
                    let ids: Vec<usize> = steps
                        .iter()
                        .map(|st| node(i + st[0], j + st[1], kz + st[2]))
                        .collect();
                    let cs: Vec<[f64; 3]> = steps
                        .iter()
                        .map(|st| coord(i + st[0], j + st[1], kz + st[2]))
                        .collect();
                    let k = element_stiffness_3d(&[cs[0], cs[1], cs[2], cs[3]])?;
                    for a in 0..4 {
                        for b in 0..4 {
                            *rows[ids[a]].entry(ids[b]).or_insert(0.0) += k[a][b];
                        }
                    }
                }
            }
        }
    }
    rows_to_csr(n, rows)
}

fn rows_to_csr(n: usize, rows: Vec<std::collections::BTreeMap<usize, f64>>) -> Result<SparseCsr> {
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::new();
    let mut values = Vec::new();
    row_ptr.push(0);
    for row in rows {
        for (c, v) in row {
            col_idx.push(c);
            values.push(v);
        }
        row_ptr.push(col_idx.len());
    }
    SparseCsr::new(n, n, row_ptr, col_idx, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_right_triangle_matches_reference() {
        let k = element_stiffness_2d(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let expect = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!(
                    (k[i][j] - expect[i][j]).abs() < 1e-15,
                    "({i},{j}): {}",
                    k[i][j]
                );
            }
        }
    }

    #[test]
    fn triangle_rows_sum_to_zero_and_scale_invariant() {
        let base = [[0.2, 0.1], [0.9, 0.3], [0.4, 0.8]];
        let k = element_stiffness_2d(&base).unwrap();
        for i in 0..3 {
            let s: f64 = k[i].iter().sum();
            assert!(s.abs() < 1e-13);
        }
        let scaled: [[f64; 2]; 3] = base.map(|p| [2.0 * p[0], 2.0 * p[1]]);
        let k2 = element_stiffness_2d(&scaled).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((k[i][j] - k2[i][j]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn degenerate_elements_are_rejected() {
        assert!(matches!(
            element_stiffness_2d(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]),
            Err(Error::DegenerateElement(_))
        ));
        assert!(matches!(
            element_stiffness_3d(&[
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [1.0, 1.0, 0.0]
            ]),
            Err(Error::DegenerateElement(_))
        ));
    }

    #[test]
    fn reference_tet_diagonal_entry() {
        let k = element_stiffness_3d(&[
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ])
        .unwrap();
        assert!((k[0][0] - 0.5).abs() < 1e-15);
        for i in 0..4 {
            let s: f64 = k[i].iter().sum();
            assert!(s.abs() < 1e-14, "row {i} sums to {s}");
        }
    }

    /// Independent quadrature-style oracle: recover each shape function's
    /// gradient by solving the 4x4 interpolation system, then form
    /// `|T| ∇φ_i · ∇φ_j` from scratch.
    #[test]
    fn tet_stiffness_matches_interpolation_oracle() {
        let coords = [
            [0.1, 0.2, 0.0],
            [1.1, 0.15, 0.1],
            [0.3, 0.9, 0.2],
            [0.25, 0.3, 1.2],
        ];
        let k = element_stiffness_3d(&coords).unwrap();

        // phi_i(x) = a + b x + c y + d z with phi_i(p_j) = delta_ij.
        let mut grads = [[0.0f64; 3]; 4];
        for i in 0..4 {
            let mut m = [[0.0f64; 5]; 4];
            for r in 0..4 {
                m[r][0] = 1.0;
                m[r][1] = coords[r][0];
                m[r][2] = coords[r][1];
                m[r][3] = coords[r][2];
                m[r][4] = if r == i { 1.0 } else { 0.0 };
            }
            for col in 0..4 {
                let piv = (col..4)
                    .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
                    .unwrap();
                m.swap(col, piv);
                for r in col + 1..4 {
                    let f = m[r][col] / m[col][col];
                    for c in col..5 {
                        m[r][c] -= f * m[col][c];
                    }
                }
            }
            let mut sol = [0.0f64; 4];
            for r in (0..4).rev() {
                let mut s = m[r][4];
                for c in r + 1..4 {
                    s -= m[r][c] * sol[c];
                }
                sol[r] = s / m[r][r];
            }
            grads[i] = [sol[1], sol[2], sol[3]];
        }
        let e = [
            [
                coords[1][0] - coords[0][0],
                coords[1][1] - coords[0][1],
                coords[1][2] - coords[0][2],
            ],
            [
                coords[2][0] - coords[0][0],
                coords[2][1] - coords[0][1],
                coords[2][2] - coords[0][2],
            ],
            [
                coords[3][0] - coords[0][0],
                coords[3][1] - coords[0][1],
                coords[3][2] - coords[0][2],
            ],
        ];
        let det = e[0][0] * (e[1][1] * e[2][2] - e[1][2] * e[2][1])
            - e[0][1] * (e[1][0] * e[2][2] - e[1][2] * e[2][0])
            + e[0][2] * (e[1][0] * e[2][1] - e[1][1] * e[2][0]);
        let vol = det.abs() / 6.0;
        for i in 0..4 {
            for j in 0..4 {
                let expect = vol
                    * (grads[i][0] * grads[j][0]
                        + grads[i][1] * grads[j][1]
                        + grads[i][2] * grads[j][2]);
                assert!(
                    (k[i][j] - expect).abs() < 1e-12,
                    "({i},{j}): {} vs {expect}",
                    k[i][j]
                );
            }
        }
    }

    #[test]
    fn regularize_requires_positive_rho() {
        let k = SparseCsr::identity(2);
        assert!(regularize(&k, 0.0).is_err());
        assert!(regularize(&k, -1.0).is_err());
        assert!(regularize(&k, f64::NAN).is_err());
    }

    #[test]
    fn regularize_shifts_only_first_diagonal() {
        let k = SparseCsr::from_triplets(2, 2, &[(0, 0, 2.0), (1, 1, 4.0)]).unwrap();
        let r = regularize(&k, 1.0).unwrap();
        // shift = 1.0 * (2+4)/2 = 3.
        assert_eq!(r.get(0, 0), Some(5.0));
        assert_eq!(r.get(1, 1), Some(4.0));
    }

    fn spec(dim: usize, e: usize, s: usize) -> DecompositionSpec {
        DecompositionSpec {
            dim,
            elements_per_edge: e,
            subdomains_per_edge: s,
            regularization_rho: 1.0,
        }
    }

    #[test]
    fn single_subdomain_has_no_multipliers() {
        let d = generate(&spec(2, 1, 1)).unwrap();
        assert_eq!(d.subdomains.len(), 1);
        let sd = &d.subdomains[0];
        assert_eq!((sd.n, sd.m), (4, 0));
        assert_eq!(sd.bt.n_cols(), 0);
        assert_eq!(d.total_multipliers, 0);
    }

    #[test]
    fn smallest_3d_subdomain_has_64_dofs() {
        let d = generate(&spec(3, 3, 1)).unwrap();
        assert_eq!(d.subdomains[0].n, 64);
    }

    #[test]
    fn multiplier_count_matches_independent_mesh_walk() {
        // Count coincident copies per global lattice position by brute force.
        for (dim, e, s) in [(2usize, 2usize, 2usize), (2, 3, 3), (3, 2, 2)] {
            let d = generate(&spec(dim, e, s)).unwrap();
            let mut counts: std::collections::HashMap<(usize, usize, usize), usize> =
                Default::default();
            let np = e + 1;
            let n_sub = s.pow(dim as u32);
            for sub in 0..n_sub {
                let o = subdomain_origin(&spec(dim, e, s), sub);
                let kz_extent = if dim == 2 { 1 } else { np };
                for kz in 0..kz_extent {
                    for j in 0..np {
                        for i in 0..np {
                            let g = (o[0] * e + i, o[1] * e + j, o[2] * e + kz);
                            *counts.entry(g).or_insert(0) += 1;
                        }
                    }
                }
            }
            let expect: usize = counts.values().map(|&t| t - 1).sum();
            assert_eq!(d.total_multipliers, expect, "dim {dim} e {e} s {s}");
        }
    }

    #[test]
    fn each_multiplier_has_balanced_signs() {
        let d = generate(&spec(3, 2, 2)).unwrap();
        let mut plus = vec![0usize; d.total_multipliers];
        let mut minus = vec![0usize; d.total_multipliers];
        for sd in &d.subdomains {
            for r in 0..sd.n {
                let (cols, vals) = sd.bt.row(r);
                for (&c, &v) in cols.iter().zip(vals) {
                    let g = sd.lambda_map[c];
                    if v == 1.0 {
                        plus[g] += 1;
                    } else if v == -1.0 {
                        minus[g] += 1;
                    } else {
                        panic!("non-unit gluing value {v}");
                    }
                }
            }
        }
        for g in 0..d.total_multipliers {
            assert_eq!((plus[g], minus[g]), (1, 1), "multiplier {g}");
        }
    }

    #[test]
    fn gluing_annihilates_continuous_fields() {
        for (dim, e, s) in [(2usize, 3usize, 2usize), (3, 2, 2)] {
            let d = generate(&spec(dim, e, s)).unwrap();
            let np = e + 1;
            let h = 1.0 / (s * e) as f64;
            // u(x) = 1 + 2x - 3y + 0.5z sampled on every subdomain copy.
            let mut residual = vec![0.0f64; d.total_multipliers];
            for (si, sd) in d.subdomains.iter().enumerate() {
                let o = subdomain_origin(&spec(dim, e, s), si);
                let mut u = vec![0.0f64; sd.n];
                for dof in 0..sd.n {
                    let (i, j, kz) = if dim == 2 {
                        (dof % np, dof / np, 0)
                    } else {
                        (dof % np, (dof / np) % np, dof / (np * np))
                    };
                    let x = (o[0] * e + i) as f64 * h;
                    let y = (o[1] * e + j) as f64 * h;
                    let z = (o[2] * e + kz) as f64 * h;
                    u[dof] = 1.0 + 2.0 * x - 3.0 * y + 0.5 * z;
                }
                let mut bu = vec![0.0f64; sd.m];
                sd.bt.spmv_transpose(&u, &mut bu).unwrap();
                for (c, &v) in bu.iter().enumerate() {
                    residual[sd.lambda_map[c]] += v;
                }
            }
            for (g, &r) in residual.iter().enumerate() {
                assert!(r.abs() < 1e-12, "multiplier {g} residual {r}");
            }
        }
    }

    #[test]
    fn stiffness_kernel_is_constants_before_regularization() {
        let e = 3;
        let k2 = assemble_2d(e, 0.25, [0, 0, 0]).unwrap();
        let ones = vec![1.0; k2.n_rows()];
        let mut y = vec![0.0; k2.n_rows()];
        k2.spmv(&ones, &mut y).unwrap();
        assert!(y.iter().all(|v| v.abs() < 1e-12));
        let k3 = assemble_3d(2, 0.25, [0, 0, 0]).unwrap();
        let ones = vec![1.0; k3.n_rows()];
        let mut y = vec![0.0; k3.n_rows()];
        k3.spmv(&ones, &mut y).unwrap();
        assert!(y.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn regularized_stiffness_factorizes() {
        for (dim, e, s) in [(2usize, 4usize, 2usize), (3, 2, 2)] {
            let d = generate(&spec(dim, e, s)).unwrap();
            for sd in &d.subdomains {
                crate::cholesky::FactorBundle::factorize_auto(&sd.k_reg).unwrap();
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate(&spec(3, 2, 2)).unwrap();
        let b = generate(&spec(3, 2, 2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn lambda_maps_are_sorted_and_columns_single_entry() {
        let d = generate(&spec(2, 2, 3)).unwrap();
        for sd in &d.subdomains {
            assert!(sd.lambda_map.windows(2).all(|w| w[0] < w[1]));
            let mut per_col = vec![0usize; sd.m];
            for r in 0..sd.n {
                let (cols, _) = sd.bt.row(r);
                for &c in cols {
                    per_col[c] += 1;
                }
            }
            assert!(per_col.iter().all(|&c| c == 1));
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(generate(&spec(4, 2, 2)).is_err());
        assert!(generate(&spec(2, 0, 2)).is_err());
        assert!(generate(&spec(2, 2, 0)).is_err());
        let mut s = spec(2, 2, 2);
        s.regularization_rho = 0.0;
        assert!(generate(&s).is_err());
    }
}
