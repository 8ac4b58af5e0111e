//! Acceptance gate: one test per shipping criterion, each printing a
//! single PASS line with its measured evidence (visible with
//! `--nocapture`; the harness result line itself is the verdict).
//!
//! The tests share generated problems through a lazy cache and serialize
//! on a global lock so wall-clock-sensitive criteria never run while
//! another test is burning CPU.

mod common;

use dualop::assembler::{
    amortization_point, apply_explicit, apply_implicit, assemble_explicit, oracle_sc,
    AmortizationInputs, AssemblyConfig,
};
use dualop::bench::{
    full_variant_grid, parse_variant_pair, read_sweep_rows, run_amortization, run_sweep,
    AmortizeSpec, SweepSpec,
};
use dualop::cholesky::{reconstruction_error, FactorBundle};
use dualop::problem::{generate, DecompositionSpec, SubdomainProblem};
use dualop::stepped::BlockPolicy;
use dualop::syrk::{syrk_baseline, syrk_input_split};
use dualop::trsm::{self, trsm_baseline, trsm_rhs_split, FactorStorage};
use nalgebra::DMatrix;
use rand::Rng;
use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::Instant;

fn lock() -> MutexGuard<'static, ()> {
    static M: OnceLock<Mutex<()>> = OnceLock::new();
    M.get_or_init(|| Mutex::new(()))
        .lock()
        .unwrap_or_else(|poisoned| poisoned.into_inner())
}

struct Case {
    dim: usize,
    n: usize,
    subdomains: Vec<(SubdomainProblem, FactorBundle)>,
}

/// Two subdomains per edge at the resolutions every equivalence criterion
/// runs over: 2D n in {49, 81, 289, 1089}, 3D n in {64, 343, 1331}.
fn cases() -> &'static [Case] {
    static C: OnceLock<Vec<Case>> = OnceLock::new();
    C.get_or_init(|| {
        let mut out = Vec::new();
        for (dim, elements) in [(2usize, vec![6usize, 8, 16, 32]), (3, vec![3, 6, 10])] {
            for e in elements {
                let d = generate(&DecompositionSpec {
                    dim,
                    elements_per_edge: e,
                    subdomains_per_edge: 2,
                    regularization_rho: 1.0,
                })
                .expect("generation succeeds");
                let n = (e + 1).pow(dim as u32);
                let subdomains = d
                    .subdomains
                    .into_iter()
                    .map(|p| {
                        assert_eq!(p.n, n);
                        let fb = FactorBundle::factorize_auto(&p.k_reg).expect("SPD stiffness");
                        (p, fb)
                    })
                    .collect();
                out.push(Case { dim, n, subdomains });
            }
        }
        out
    })
}

#[test]
fn criterion_1_oracle_equivalence_of_every_variant() {
    let _g = lock();
    let t0 = Instant::now();
    let grid = full_variant_grid();
    let mut worst = 0.0f64;
    let mut runs = 0usize;
    for case in cases() {
        for (p, fb) in &case.subdomains {
            let oracle = oracle_sc(p).expect("oracle");
            for pair in &grid {
                let policy = BlockPolicy::FixedSize(64);
                let cfg = AssemblyConfig {
                    trsm: pair.trsm_config(policy),
                    syrk: pair.syrk_config(policy),
                    compare_oracle: false,
                    use_stepped_permutation: true,
                };
                let (op, _) = assemble_explicit(p, fb, &cfg).expect("assembly");
                let err = op.f.rel_frobenius_diff(&oracle).expect("same shape");
                assert!(
                    err < 1e-10,
                    "dim {} n {} variant {} err {err:.3e}",
                    case.dim,
                    case.n,
                    pair.name
                );
                worst = worst.max(err);
                runs += 1;
            }
        }
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 120.0, "budget exceeded: {dt:?}");
    println!(
        "criterion 1 PASS: {runs} assemblies across {} problem sets, worst relative error {worst:.3e} (< 1e-10), {dt:.1?} (< 2 min)",
        cases().len()
    );
}

#[test]
fn criterion_2_bit_exact_zero_preservation() {
    let _g = lock();
    let mut rng = common::rng(0xfe71);
    let configs: Vec<_> = full_variant_grid()
        .into_iter()
        .map(|p| p.trsm_config(BlockPolicy::FixedSize(13)))
        .collect();
    let mut positions = 0usize;
    for _ in 0..100 {
        let n = rng.gen_range(30..=150);
        let m = rng.gen_range(8..=60);
        let l = common::random_lower_factor(n, 0.3, &mut rng);
        let (y0, profile) = common::random_stepped(n, m, &mut rng);
        for cfg in &configs {
            let mut y = y0.clone();
            trsm::trsm(&l, &mut y, &profile, cfg).expect("solve");
            for (c, &p) in profile.col_pivots.iter().enumerate() {
                for r in 0..p {
                    assert_eq!(
                        y.get(r, c).to_bits(),
                        0,
                        "nonzero bits above pivot at ({r},{c}) under {cfg:?}"
                    );
                    positions += 1;
                }
            }
        }
    }
    println!(
        "criterion 2 PASS: 100 randomized stepped instances, {positions} above-pivot positions bit-exactly +0.0 under every solve variant"
    );
}

#[test]
fn criterion_3_work_reduction_ratios() {
    let _g = lock();
    let n = 2048usize;
    let l = common::identity_factor(n);
    let (y0, profile) = common::triangular_stepped(n);

    // Dense-counting baseline: every strictly-lower position once per
    // right-hand side.
    let mut yb = y0.clone();
    let base_trsm = trsm_baseline(&l, &mut yb, FactorStorage::Dense).expect("solve");
    let nn = n as u64;
    assert_eq!(base_trsm.multiply_adds, nn * (nn - 1) / 2 * nn);

    let expected_rhs_split = |s: usize| -> u64 {
        let mut mas = 0u64;
        let mut c0 = 0usize;
        while c0 < n {
            let w = s.min(n - c0) as u64;
            let sub = (n - c0) as u64;
            mas += w * sub * (sub - 1) / 2;
            c0 += s;
        }
        mas
    };
    let mut trsm_ratios = Vec::new();
    for s in [512usize, 128, 32] {
        let mut y = y0.clone();
        let f = trsm_rhs_split(
            &l,
            &mut y,
            &profile,
            BlockPolicy::FixedSize(s),
            FactorStorage::Dense,
        )
        .expect("solve");
        assert_eq!(
            f.multiply_adds,
            expected_rhs_split(s),
            "block {s} count mismatch"
        );
        trsm_ratios.push(base_trsm.multiply_adds as f64 / f.multiply_adds as f64);
    }
    assert!(trsm_ratios[0] < trsm_ratios[1] && trsm_ratios[1] < trsm_ratios[2]);
    assert!(
        trsm_ratios[2] >= 2.7,
        "solve ratio at block 32: {}",
        trsm_ratios[2]
    );

    let (_, base_syrk) = syrk_baseline(&y0);
    assert_eq!(base_syrk.multiply_adds, nn * nn * (nn + 1) / 2);
    let expected_input_split = |s: usize| -> u64 {
        let mut mas = 0u64;
        let mut r0 = 0usize;
        while r0 < n {
            let r1 = (r0 + s).min(n);
            let w = r1 as u64;
            mas += (r1 - r0) as u64 * w * (w + 1) / 2;
            r0 = r1;
        }
        mas
    };
    let mut syrk_ratios = Vec::new();
    for s in [512usize, 128, 32] {
        let (_, f) = syrk_input_split(&y0, &profile, BlockPolicy::FixedSize(s)).expect("product");
        assert_eq!(
            f.multiply_adds,
            expected_input_split(s),
            "block {s} count mismatch"
        );
        syrk_ratios.push(base_syrk.multiply_adds as f64 / f.multiply_adds as f64);
    }
    assert!(syrk_ratios[0] < syrk_ratios[1] && syrk_ratios[1] < syrk_ratios[2]);
    assert!(
        syrk_ratios[2] >= 2.7,
        "product ratio at block 32: {}",
        syrk_ratios[2]
    );

    println!(
        "criterion 3 PASS: n = m = 2048, exact counts match closed forms; ratios over blocks 512/128/32: solve {:.3}/{:.3}/{:.3}, product {:.3}/{:.3}/{:.3} (block-32 ratios >= 2.7, monotone)",
        trsm_ratios[0], trsm_ratios[1], trsm_ratios[2], syrk_ratios[0], syrk_ratios[1], syrk_ratios[2]
    );
}

#[test]
fn criterion_4_block_size_sweep_shape() {
    let _g = lock();
    let blocks = [10usize, 50, 200, 500, 2000, 10000];
    let spec = SweepSpec {
        dims: vec![3],
        subdomain_sizes: vec![2744],
        variants: vec![
            parse_variant_pair("rhs_split+input_split").unwrap(),
            parse_variant_pair("factor_split+input_split").unwrap(),
        ],
        block_sizes: blocks.to_vec(),
        block_counts: vec![],
        repetitions: 5,
        check_oracle: false,
        parallel: false,
    };
    let mut csv = Vec::new();
    run_sweep(&spec, &mut csv).expect("sweep");
    let rows = read_sweep_rows(csv.as_slice()).expect("csv parses");
    assert_eq!(rows.len(), 2 * blocks.len());

    for variant in ["rhs_split+input_split", "factor_split+input_split"] {
        let flops: Vec<u64> = rows
            .iter()
            .filter(|r| r.variant == variant)
            .map(|r| r.flops_trsm + r.flops_syrk)
            .collect();
        assert_eq!(flops.len(), blocks.len());
        for i in 1..flops.len() {
            assert!(
                flops[i - 1] <= flops[i],
                "{variant}: counts must not increase toward finer blocks: {flops:?}"
            );
        }
    }

    // The per-block factor re-traversal gives the column-split solve a
    // pronounced overhead at tiny blocks; its wall curve is the U.
    let walls: Vec<f64> = rows
        .iter()
        .filter(|r| r.variant == "rhs_split+input_split")
        .map(|r| r.wall_ms_total.unwrap())
        .collect();
    let argmin = walls
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap()
        .0;
    assert!(
        argmin != 0 && argmin != walls.len() - 1,
        "wall curve must dip at an interior block size, got {walls:?}"
    );
    println!(
        "criterion 4 PASS: n = 2744, wall medians over blocks {blocks:?} are {:?} ms with interior minimum at {}, operation counts non-increasing toward fine blocks for both variants",
        walls.iter().map(|w| (w * 10.0).round() / 10.0).collect::<Vec<_>>(),
        blocks[argmin]
    );
}

#[test]
fn criterion_5_local_operators_sum_to_the_global_one() {
    let _g = lock();
    let d = generate(&DecompositionSpec {
        dim: 2,
        elements_per_edge: 6,
        subdomains_per_edge: 2,
        regularization_rho: 1.0,
    })
    .expect("generation");
    let total_n: usize = d.subdomains.iter().map(|p| p.n).sum();
    let m = d.total_multipliers;

    // Independent global route: block-diagonal stiffness and the signed
    // global gluing matrix, solved densely by a third-party library.
    let mut kg = DMatrix::<f64>::zeros(total_n, total_n);
    let mut bg = DMatrix::<f64>::zeros(m, total_n);
    let mut offset = 0usize;
    for p in &d.subdomains {
        let kd = p.k_reg.to_dense();
        for r in 0..p.n {
            for c in 0..p.n {
                kg[(offset + r, offset + c)] = kd.get(r, c);
            }
            let (cols, vals) = p.bt.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                bg[(p.lambda_map[c], offset + r)] = v;
            }
        }
        offset += p.n;
    }
    let chol = kg.cholesky().expect("global stiffness is SPD");
    let fg = &bg * chol.solve(&bg.transpose());

    let mut fs = DMatrix::<f64>::zeros(m, m);
    for p in &d.subdomains {
        let fb = FactorBundle::factorize_auto(&p.k_reg).expect("SPD");
        let (op, _) = assemble_explicit(p, &fb, &AssemblyConfig::default()).expect("assembly");
        for i in 0..p.m {
            for j in 0..p.m {
                fs[(p.lambda_map[i], p.lambda_map[j])] += op.f.get(i, j);
            }
        }
    }
    let rel = (&fs - &fg).norm() / fg.norm();
    assert!(rel < 1e-10, "additivity error {rel:.3e}");
    println!(
        "criterion 5 PASS: 2x2-subdomain 2D instance, scattered sum of local operators matches the global dual operator to {rel:.3e} (< 1e-10)"
    );
}

#[test]
fn criterion_6_implicit_and_explicit_applications_agree() {
    let _g = lock();
    let mut rng = common::rng(0xab11);
    let mut worst = 0.0f64;
    let mut subdomains = 0usize;
    for case in cases() {
        for (p, fb) in &case.subdomains {
            let (op, _) = assemble_explicit(p, fb, &AssemblyConfig::default()).expect("assembly");
            for _ in 0..100 {
                let lambda: Vec<f64> = (0..p.m).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let (qi, _) = apply_implicit(p, fb, &lambda).expect("implicit");
                let (qe, _) = apply_explicit(&op, &lambda).expect("explicit");
                let scale = qi.iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(1e-300);
                let rel = qi
                    .iter()
                    .zip(&qe)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max)
                    / scale;
                assert!(rel < 1e-10, "dim {} n {} rel {rel:.3e}", case.dim, case.n);
                worst = worst.max(rel);
            }
            subdomains += 1;
        }
    }
    println!(
        "criterion 6 PASS: {subdomains} subdomains x 100 random vectors, worst relative disagreement {worst:.3e} (< 1e-10)"
    );
}

#[test]
fn criterion_7_amortization_model_and_measured_ordering() {
    let _g = lock();
    // Synthetic sanity: the worked example of the model.
    let point = amortization_point(&AmortizationInputs {
        t_assembly_extra: 10.0,
        t_apply_implicit: 2.0,
        t_apply_explicit: 1.0,
    })
    .expect("valid inputs");
    assert_eq!(point, Some(11));

    // Measured: cheaper assembly at identical apply cost must never push
    // the break-even point later.
    let spec = AmortizeSpec {
        dims: vec![3],
        subdomain_sizes: vec![1331],
        variants: vec![
            parse_variant_pair("baseline_dense+baseline").unwrap(),
            parse_variant_pair("baseline_sparse+baseline").unwrap(),
            parse_variant_pair("factor_split+input_split").unwrap(),
        ],
        apply_repetitions: 150,
        assembly_repetitions: 3,
    };
    let mut sink = Vec::new();
    let rows = run_amortization(&spec, &mut sink).expect("amortization");
    let by = |name: &str| -> f64 {
        rows.iter()
            .find(|r| r.variant == name)
            .and_then(|r| r.amortization_iters)
            .map(|k| k as f64)
            .unwrap_or(f64::INFINITY)
    };
    let base_dense = by("baseline_dense+baseline");
    let base_sparse = by("baseline_sparse+baseline");
    let optimized = by("factor_split+input_split");
    assert!(
        optimized <= base_dense && optimized <= base_sparse,
        "optimized assembly must not amortize later: dense {base_dense}, sparse {base_sparse}, optimized {optimized}"
    );
    println!(
        "criterion 7 PASS: model example returns 11; measured n = 1331 points (median of 3): dense baseline {base_dense}, sparse baseline {base_sparse}, optimized {optimized} (never later)"
    );
}

#[test]
fn criterion_8_factorization_reconstruction() {
    let _g = lock();
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for case in cases() {
        for (p, fb) in &case.subdomains {
            if p.n > 2000 {
                continue;
            }
            let err = reconstruction_error(&p.k_reg, fb).expect("reconstruction");
            assert!(
                err < 1e-12,
                "dim {} n {} reconstruction {err:.3e}",
                case.dim,
                case.n
            );
            worst = worst.max(err);
            checked += 1;
        }
    }
    assert!(checked > 0);
    println!(
        "criterion 8 PASS: {checked} generated subdomains (n <= 2000), worst factor reconstruction error {worst:.3e} (< 1e-12)"
    );
}
