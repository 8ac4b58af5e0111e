//! Per-subdomain explicit assembly of the dual operator
//! `F̃ = B̃ K⁻¹ B̃ᵀ`, plus the dense oracle, both application modes, and the
//! amortization model that decides when assembling explicitly pays off.
//!
//! The pipeline: bring the gluing matrix into the factor's row order, make
//! it stepped by a column permutation, densify, run the configured TRSM and
//! SYRK kernels, then mirror the lower-triangular product to full storage
//! and undo the column permutation symmetrically. The result is the local
//! dual operator in the original multiplier numbering, ready to be combined
//! additively across subdomains.

use crate::cholesky::FactorBundle;
use crate::error::{Error, Result};
use crate::mat::{DenseMat, FlopCounter, Permutation};
use crate::problem::SubdomainProblem;
use crate::stepped::{stepped_permutation, SteppedProfile};
use crate::syrk::{self, SyrkConfig};
use crate::trsm::{self, TrsmConfig};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

/// Configuration of the assembly pipeline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AssemblyConfig {
    pub trsm: TrsmConfig,
    pub syrk: SyrkConfig,
    /// Recompute the dense oracle after assembly and record the relative
    /// error in the report. Expensive; meant for correctness runs.
    pub compare_oracle: bool,
    /// Permute the columns into stepped shape before the kernels run. With
    /// the identity order only the baseline kernels apply, since the split
    /// kernels require the stepped precondition.
    pub use_stepped_permutation: bool,
}

impl Default for AssemblyConfig {
    fn default() -> Self {
        AssemblyConfig {
            trsm: TrsmConfig::default(),
            syrk: SyrkConfig::default(),
            compare_oracle: false,
            use_stepped_permutation: true,
        }
    }
}

/// The assembled local dual operator, in the subdomain's original
/// multiplier numbering, stored full (both triangles).
#[derive(Clone, Debug)]
pub struct ExplicitOperator {
    pub f: DenseMat,
    /// Local multiplier column to global multiplier index.
    pub lambda_map: Vec<usize>,
}

/// Instrumentation from one assembly.
#[derive(Clone, Copy, Debug)]
pub struct AssemblyReport {
    pub flops_trsm: FlopCounter,
    pub flops_syrk: FlopCounter,
    pub wall_trsm: Duration,
    pub wall_syrk: Duration,
    /// Whole pipeline including permutations and densification.
    pub wall_total: Duration,
    pub oracle_rel_err: Option<f64>,
}

/// Timings feeding [`amortization_point`]: the extra preprocessing cost of
/// the explicit approach and the per-iteration cost of each application
/// mode, all in seconds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmortizationInputs {
    pub t_assembly_extra: f64,
    pub t_apply_implicit: f64,
    pub t_apply_explicit: f64,
}

/// Run the full explicit assembly pipeline for one subdomain.
pub fn assemble_explicit(
    p: &SubdomainProblem,
    fb: &FactorBundle,
    cfg: &AssemblyConfig,
) -> Result<(ExplicitOperator, AssemblyReport)> {
    if fb.n() != p.n || p.bt.n_rows() != p.n {
        return Err(Error::Dimension(format!(
            "factor of size {} against subdomain with {} unknowns",
            fb.n(),
            p.n
        )));
    }
    let t0 = Instant::now();

    let bperm = p.bt.permute_rows(&fb.perm)?;
    let sp = if cfg.use_stepped_permutation {
        stepped_permutation(&bperm)
    } else {
        Permutation::identity(p.m)
    };
    let bstepped = bperm.permute_cols(&sp)?;
    let profile = SteppedProfile::of_sparse(&bstepped).hull();
    let mut y = bstepped.to_dense();

    let t_trsm = Instant::now();
    let flops_trsm = trsm::trsm(&fb.l, &mut y, &profile, &cfg.trsm)?;
    let wall_trsm = t_trsm.elapsed();

    // The solve fills each column from its pivot downward, so the staircase
    // hull of the input is still a valid cover of the solved matrix.
    let t_syrk = Instant::now();
    let (f_stepped, flops_syrk) = syrk::syrk(&y, &profile, &cfg.syrk)?;
    let wall_syrk = t_syrk.elapsed();

    // Mirror the lower triangle and undo the column permutation on both
    // sides at once: entry (i, j) of the final operator lives at the
    // permuted position pair.
    let m = p.m;
    let mut f = DenseMat::zeros(m, m);
    for i in 0..m {
        let a = sp.new_of(i);
        let frow = f.row_mut(i);
        for (j, slot) in frow.iter_mut().enumerate() {
            let b = sp.new_of(j);
            *slot = if a >= b {
                f_stepped.get(a, b)
            } else {
                f_stepped.get(b, a)
            };
        }
    }
    let wall_total = t0.elapsed();

    let oracle_rel_err = if cfg.compare_oracle {
        Some(f.rel_frobenius_diff(&oracle_sc(p)?)?)
    } else {
        None
    };

    Ok((
        ExplicitOperator {
            f,
            lambda_map: p.lambda_map.clone(),
        },
        AssemblyReport {
            flops_trsm,
            flops_syrk,
            wall_trsm,
            wall_syrk,
            wall_total,
            oracle_rel_err,
        },
    ))
}

/// Assemble every subdomain, fanning the work out over a bounded pool.
/// Results come back in subdomain order and match serial assembly exactly
/// (each pipeline is single-threaded internally).
pub fn assemble_all(
    problems: &[SubdomainProblem],
    factors: &[FactorBundle],
    cfg: &AssemblyConfig,
) -> Result<Vec<(ExplicitOperator, AssemblyReport)>> {
    if problems.len() != factors.len() {
        return Err(Error::Dimension(format!(
            "{} subdomains against {} factorizations",
            problems.len(),
            factors.len()
        )));
    }
    let jobs = problems.len();
    let workers = worker_count(jobs);
    let next = AtomicUsize::new(0);
    let mut gathered: Vec<(usize, Result<(ExplicitOperator, AssemblyReport)>)> =
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers)
                .map(|_| {
                    s.spawn(|| {
                        let mut out = Vec::new();
                        loop {
                            let i = next.fetch_add(1, Ordering::Relaxed);
                            if i >= jobs {
                                break;
                            }
                            out.push((i, assemble_explicit(&problems[i], &factors[i], cfg)));
                        }
                        out
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("assembly worker panicked"))
                .collect()
        });
    gathered.sort_by_key(|(i, _)| *i);
    gathered.into_iter().map(|(_, r)| r).collect()
}

/// Worker pool size: hardware parallelism, capped by the `SCHUR_THREADS`
/// environment variable and by the number of jobs.
pub fn worker_count(jobs: usize) -> usize {
    let hw = std::thread::available_parallelism()
        .map(|v| v.get())
        .unwrap_or(1);
    let cap = std::env::var("SCHUR_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&v| v >= 1)
        .unwrap_or(hw);
    cap.min(hw).max(1).min(jobs.max(1))
}

/// Reference Schur complement by a deliberately naive route: dense
/// unpivoted Cholesky of the full stiffness, a dense two-sweep solve per
/// multiplier column, and an explicit product with the gluing matrix. No
/// orderings, no stepped logic, no shared code with the optimized kernels.
pub fn oracle_sc(p: &SubdomainProblem) -> Result<DenseMat> {
    let n = p.n;
    let kd = p.k_reg.to_dense();
    let mut l = vec![0.0f64; n * n];
    for j in 0..n {
        let mut d = kd.get(j, j);
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d <= 0.0 {
            return Err(Error::NotPositiveDefinite { col: j, value: d });
        }
        let dj = d.sqrt();
        l[j * n + j] = dj;
        for i in j + 1..n {
            let mut s = kd.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / dj;
        }
    }

    let btd = p.bt.to_dense();
    let mut f = DenseMat::zeros(p.m, p.m);
    let mut rhs = vec![0.0f64; n];
    let mut g = vec![0.0f64; n];
    let mut fcol = vec![0.0f64; p.m];
    for j in 0..p.m {
        for r in 0..n {
            rhs[r] = btd.get(r, j);
        }
        for i in 0..n {
            let mut s = rhs[i];
            for k in 0..i {
                s -= l[i * n + k] * g[k];
            }
            g[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = g[i];
            for k in i + 1..n {
                s -= l[k * n + i] * g[k];
            }
            g[i] = s / l[i * n + i];
        }
        p.bt.spmv_transpose(&g, &mut fcol)?;
        for i in 0..p.m {
            f.set(i, j, fcol[i]);
        }
    }
    // Exact symmetry for the reference.
    for i in 0..p.m {
        for j in 0..i {
            let v = 0.5 * (f.get(i, j) + f.get(j, i));
            f.set(i, j, v);
            f.set(j, i, v);
        }
    }
    Ok(f)
}

/// Apply the dual operator without assembling it:
/// `q = B̃ (K⁻¹ (B̃ᵀ λ))` through the sparse factorization.
pub fn apply_implicit(
    p: &SubdomainProblem,
    fb: &FactorBundle,
    lambda: &[f64],
) -> Result<(Vec<f64>, FlopCounter)> {
    if lambda.len() != p.m {
        return Err(Error::Dimension(format!(
            "operator with {} multipliers applied to vector of {}",
            p.m,
            lambda.len()
        )));
    }
    let mut flops = FlopCounter::default();
    let mut y = vec![0.0; p.n];
    p.bt.spmv(lambda, &mut y)?;
    flops.add_muladds(p.bt.nnz() as u64);
    let (z, solve_flops) = fb.solve(&y)?;
    flops.merge(solve_flops);
    let mut q = vec![0.0; p.m];
    p.bt.spmv_transpose(&z, &mut q)?;
    flops.add_muladds(p.bt.nnz() as u64);
    Ok((q, flops))
}

/// Apply the assembled operator: one dense matrix-vector product, exactly
/// `m²` multiply-adds.
pub fn apply_explicit(op: &ExplicitOperator, lambda: &[f64]) -> Result<(Vec<f64>, FlopCounter)> {
    let m = op.f.n_rows();
    if lambda.len() != m {
        return Err(Error::Dimension(format!(
            "operator with {} multipliers applied to vector of {}",
            m,
            lambda.len()
        )));
    }
    let mut q = vec![0.0; m];
    for (r, out) in q.iter_mut().enumerate() {
        let mut s = 0.0;
        for (a, b) in op.f.row(r).iter().zip(lambda) {
            s += a * b;
        }
        *out = s;
    }
    let mut flops = FlopCounter::default();
    flops.add_muladds((m * m) as u64);
    Ok((q, flops))
}

/// First iteration count at which the explicit approach is strictly
/// cheaper in total: smallest `k` with
/// `t_assembly_extra + k·t_apply_explicit < k·t_apply_implicit`.
/// `None` means the point is never reached (no per-iteration savings).
pub fn amortization_point(a: &AmortizationInputs) -> Result<Option<u64>> {
    for (name, v) in [
        ("t_assembly_extra", a.t_assembly_extra),
        ("t_apply_implicit", a.t_apply_implicit),
        ("t_apply_explicit", a.t_apply_explicit),
    ] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::Parameter(format!(
                "{name} must be finite and non-negative, got {v}"
            )));
        }
    }
    let savings = a.t_apply_implicit - a.t_apply_explicit;
    if savings <= 0.0 {
        return Ok(None);
    }
    Ok(Some((a.t_assembly_extra / savings).floor() as u64 + 1))
}
