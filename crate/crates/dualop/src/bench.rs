//! Drivers behind the `dualop` binary: hyperparameter sweeps with CSV
//! output, the seeded correctness suite, and amortization-point tables.
//!
//! Measurement policy, also stamped into every CSV as `#` comments:
//! operation counts are exact and deterministic for a given specification;
//! wall-clock numbers are medians over repetitions, cover one
//! representative subdomain, and are reported but never used as pass/fail
//! evidence. Sweep cells run sequentially by default so timings stay
//! stable; parallel mode runs cells concurrently and reports counts only.

use crate::assembler::{
    amortization_point, apply_explicit, apply_implicit, assemble_explicit, oracle_sc,
    AmortizationInputs, AssemblyConfig,
};
use crate::cholesky::FactorBundle;
use crate::error::{Error, Result};
use crate::mat::{DenseMat, SparseCsr};
use crate::problem::{generate, DecompositionSpec, SubdomainProblem};
use crate::stepped::{BlockPolicy, SteppedProfile};
use crate::syrk::{self, SyrkConfig, SyrkVariant};
use crate::trsm::{self, FactorStorage, TrsmConfig, TrsmVariant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

/// Decompositions measured by sweeps and amortization tables always use
/// two subdomains per edge; `n` selects the per-subdomain resolution.
const SUBDOMAINS_PER_EDGE: usize = 2;

const TRSM_TOKENS: [(&str, TrsmVariant, FactorStorage, bool); 8] = [
    (
        "baseline_dense",
        TrsmVariant::BaselineDense,
        FactorStorage::Dense,
        false,
    ),
    (
        "baseline_sparse",
        TrsmVariant::BaselineSparse,
        FactorStorage::Sparse,
        false,
    ),
    (
        "rhs_split",
        TrsmVariant::RhsSplit,
        FactorStorage::Sparse,
        false,
    ),
    (
        "rhs_split_dense",
        TrsmVariant::RhsSplit,
        FactorStorage::Dense,
        false,
    ),
    (
        "factor_split",
        TrsmVariant::FactorSplit,
        FactorStorage::Sparse,
        true,
    ),
    (
        "factor_split_noprune",
        TrsmVariant::FactorSplit,
        FactorStorage::Sparse,
        false,
    ),
    (
        "factor_split_dense",
        TrsmVariant::FactorSplit,
        FactorStorage::Dense,
        true,
    ),
    (
        "factor_split_dense_noprune",
        TrsmVariant::FactorSplit,
        FactorStorage::Dense,
        false,
    ),
];

const SYRK_TOKENS: [(&str, SyrkVariant); 3] = [
    ("baseline", SyrkVariant::Baseline),
    ("input_split", SyrkVariant::InputSplit),
    ("output_split", SyrkVariant::OutputSplit),
];

/// One named (solve kernel, product kernel) combination, the unit selected
/// by `--variants` and reported in the CSV `variant` column.
#[derive(Clone, Debug, PartialEq)]
pub struct VariantPair {
    pub name: String,
    pub trsm_variant: TrsmVariant,
    pub factor_block_storage: FactorStorage,
    pub pruning: bool,
    pub syrk_variant: SyrkVariant,
}

impl VariantPair {
    fn build(t: &(&str, TrsmVariant, FactorStorage, bool), s: &(&str, SyrkVariant)) -> Self {
        VariantPair {
            name: format!("{}+{}", t.0, s.0),
            trsm_variant: t.1,
            factor_block_storage: t.2,
            pruning: t.3,
            syrk_variant: s.1,
        }
    }

    /// Whether any selected kernel consumes the block partition.
    pub fn uses_partition(&self) -> bool {
        !matches!(
            self.trsm_variant,
            TrsmVariant::BaselineDense | TrsmVariant::BaselineSparse
        ) || !matches!(self.syrk_variant, SyrkVariant::Baseline)
    }

    pub fn trsm_config(&self, partition: BlockPolicy) -> TrsmConfig {
        TrsmConfig {
            variant: self.trsm_variant,
            partition,
            factor_block_storage: self.factor_block_storage,
            pruning: self.pruning,
        }
    }

    pub fn syrk_config(&self, partition: BlockPolicy) -> SyrkConfig {
        SyrkConfig {
            variant: self.syrk_variant,
            partition,
        }
    }
}

/// Parse `"<solve-kernel>+<product-kernel>"`, e.g.
/// `"factor_split+input_split"`.
pub fn parse_variant_pair(s: &str) -> Result<VariantPair> {
    let err = || {
        let trsm_names: Vec<&str> = TRSM_TOKENS.iter().map(|t| t.0).collect();
        let syrk_names: Vec<&str> = SYRK_TOKENS.iter().map(|t| t.0).collect();
        Error::Parameter(format!(
            "unknown variant pair '{s}'; expected <trsm>+<syrk> with trsm in {trsm_names:?} and syrk in {syrk_names:?}"
        ))
    };
    let (left, right) = s.split_once('+').ok_or_else(err)?;
    let t = TRSM_TOKENS.iter().find(|t| t.0 == left).ok_or_else(err)?;
    let sy = SYRK_TOKENS.iter().find(|t| t.0 == right).ok_or_else(err)?;
    Ok(VariantPair::build(t, sy))
}

/// Every solve-kernel configuration crossed with every product kernel:
/// the full grid exercised by correctness runs.
pub fn full_variant_grid() -> Vec<VariantPair> {
    let mut out = Vec::with_capacity(TRSM_TOKENS.len() * SYRK_TOKENS.len());
    for t in &TRSM_TOKENS {
        for s in &SYRK_TOKENS {
            out.push(VariantPair::build(t, s));
        }
    }
    out
}

/// The pairs a sweep measures by default: both baselines' representative
/// plus the three split strategies.
pub fn default_variants() -> Vec<VariantPair> {
    [
        "baseline_sparse+baseline",
        "rhs_split+input_split",
        "factor_split+input_split",
        "factor_split+output_split",
    ]
    .iter()
    .map(|s| parse_variant_pair(s).expect("builtin variant name"))
    .collect()
}

/// Number of elements per subdomain edge giving `n = (e+1)^dim` nodes, or
/// an error when `n` is not such a power.
pub fn edge_elements(dim: usize, n: usize) -> Result<usize> {
    if dim != 2 && dim != 3 {
        return Err(Error::Parameter(format!("dim must be 2 or 3, got {dim}")));
    }
    let mut e = 1usize;
    loop {
        let nodes = (e + 1).pow(dim as u32);
        if nodes == n {
            return Ok(e);
        }
        if nodes > n {
            return Err(Error::Parameter(format!(
                "subdomain size {n} is not (e+1)^{dim} for any integer e >= 1 (e.g. 49 = 7^2 in 2D, 2744 = 14^3 in 3D)"
            )));
        }
        e += 1;
    }
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

/// What a sweep measures: the cartesian product of dimensions, subdomain
/// sizes, kernel pairs, and partition values.
#[derive(Clone, Debug)]
pub struct SweepSpec {
    /// Subset of {2, 3}.
    pub dims: Vec<usize>,
    /// Per-subdomain node counts, each of the form `(e+1)^dim`.
    pub subdomain_sizes: Vec<usize>,
    pub variants: Vec<VariantPair>,
    /// Block sizes swept as fixed-size partitions.
    pub block_sizes: Vec<usize>,
    /// Block counts swept as fixed-count partitions.
    pub block_counts: Vec<usize>,
    /// Assemblies per timed cell; medians are reported.
    pub repetitions: usize,
    /// Compute the dense oracle per (dim, n) and report every cell's
    /// relative error.
    pub check_oracle: bool,
    /// Run cells concurrently; wall columns are left blank because
    /// contended timings would be meaningless.
    pub parallel: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.subdomain_sizes.is_empty() || self.variants.is_empty() {
            return Err(Error::Parameter(
                "sweep needs at least one dimension, one subdomain size, and one variant".into(),
            ));
        }
        for &d in &self.dims {
            if d != 2 && d != 3 {
                return Err(Error::Parameter(format!("dim must be 2 or 3, got {d}")));
            }
        }
        for &d in &self.dims {
            for &n in &self.subdomain_sizes {
                edge_elements(d, n)?;
            }
        }
        if self.repetitions == 0 {
            return Err(Error::Parameter("repetitions must be at least 1".into()));
        }
        if !self.parallel && self.repetitions < 3 {
            return Err(Error::Parameter(
                "timed sweeps need at least 3 repetitions for a meaningful median; use parallel mode for count-only runs".into(),
            ));
        }
        if self.variants.iter().any(|v| v.uses_partition())
            && self.block_sizes.is_empty()
            && self.block_counts.is_empty()
        {
            return Err(Error::Parameter(
                "split variants selected but no block sizes or block counts given".into(),
            ));
        }
        if self
            .block_sizes
            .iter()
            .chain(&self.block_counts)
            .any(|&v| v == 0)
        {
            return Err(Error::Parameter(
                "block sizes and counts must be positive".into(),
            ));
        }
        Ok(())
    }
}

pub const SWEEP_HEADER: [&str; 13] = [
    "dim",
    "n",
    "m",
    "variant",
    "partition_policy",
    "partition_value",
    "pruning",
    "flops_trsm",
    "flops_syrk",
    "wall_ms_trsm",
    "wall_ms_syrk",
    "wall_ms_total",
    "oracle_rel_err",
];

/// One sweep cell's results; `None` wall times mean the cell ran in
/// parallel (count-only) mode, `None` oracle error means checking was off.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub dim: usize,
    pub n: usize,
    pub m: usize,
    pub variant: String,
    /// "size", "count", or "none" for partition-free baselines.
    pub partition_policy: String,
    pub partition_value: usize,
    pub pruning: bool,
    pub flops_trsm: u64,
    pub flops_syrk: u64,
    pub wall_ms_trsm: Option<f64>,
    pub wall_ms_syrk: Option<f64>,
    pub wall_ms_total: Option<f64>,
    pub oracle_rel_err: Option<f64>,
}

impl SweepRow {
    fn to_record(&self) -> Vec<String> {
        vec![
            self.dim.to_string(),
            self.n.to_string(),
            self.m.to_string(),
            self.variant.clone(),
            self.partition_policy.clone(),
            self.partition_value.to_string(),
            self.pruning.to_string(),
            self.flops_trsm.to_string(),
            self.flops_syrk.to_string(),
            opt_ms(self.wall_ms_trsm),
            opt_ms(self.wall_ms_syrk),
            opt_ms(self.wall_ms_total),
            self.oracle_rel_err
                .map(|e| format!("{e:.3e}"))
                .unwrap_or_default(),
        ]
    }
}

fn opt_ms(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSummary {
    pub rows: usize,
    /// Largest oracle error over all rows, present when checking was on.
    pub worst_oracle_err: Option<f64>,
}

#[derive(Clone, Copy, Debug)]
enum Partition {
    None,
    Size(usize),
    Count(usize),
}

impl Partition {
    fn policy(self) -> BlockPolicy {
        match self {
            // Baselines ignore the partition; any valid policy will do.
            Partition::None => BlockPolicy::FixedSize(500),
            Partition::Size(v) => BlockPolicy::FixedSize(v),
            Partition::Count(v) => BlockPolicy::FixedCount(v),
        }
    }

    fn name_value(self) -> (&'static str, usize) {
        match self {
            Partition::None => ("none", 0),
            Partition::Size(v) => ("size", v),
            Partition::Count(v) => ("count", v),
        }
    }
}

struct CellBase {
    problem: SubdomainProblem,
    factor: FactorBundle,
    oracle: Option<DenseMat>,
}

fn build_bases(spec: &SweepSpec) -> Result<BTreeMap<(usize, usize), CellBase>> {
    let mut bases = BTreeMap::new();
    for &dim in &spec.dims {
        for &n in &spec.subdomain_sizes {
            if bases.contains_key(&(dim, n)) {
                continue;
            }
            let e = edge_elements(dim, n)?;
            let d = generate(&DecompositionSpec {
                dim,
                elements_per_edge: e,
                subdomains_per_edge: SUBDOMAINS_PER_EDGE,
                regularization_rho: 1.0,
            })?;
            let problem = d
                .subdomains
                .into_iter()
                .next()
                .expect("at least one subdomain");
            let factor = FactorBundle::factorize_auto(&problem.k_reg)?;
            let oracle = if spec.check_oracle {
                Some(oracle_sc(&problem)?)
            } else {
                None
            };
            bases.insert(
                (dim, n),
                CellBase {
                    problem,
                    factor,
                    oracle,
                },
            );
        }
    }
    Ok(bases)
}

fn cell_config(pair: &VariantPair, part: Partition) -> AssemblyConfig {
    let policy = part.policy();
    AssemblyConfig {
        trsm: pair.trsm_config(policy),
        syrk: pair.syrk_config(policy),
        compare_oracle: false,
        use_stepped_permutation: true,
    }
}

/// Timing samples for one cell, accumulated across interleaved passes.
struct CellAcc {
    wall_t: Vec<f64>,
    wall_s: Vec<f64>,
    wall_tot: Vec<f64>,
    flops_trsm: u64,
    flops_syrk: u64,
    oracle_rel_err: Option<f64>,
}

fn finish_row(
    base: &CellBase,
    pair: &VariantPair,
    part: Partition,
    mut acc: CellAcc,
    timed: bool,
) -> SweepRow {
    let (policy_name, value) = part.name_value();
    SweepRow {
        dim: 0, // filled by caller
        n: base.problem.n,
        m: base.problem.m,
        variant: pair.name.clone(),
        partition_policy: policy_name.to_string(),
        partition_value: value,
        pruning: pair.pruning,
        flops_trsm: acc.flops_trsm,
        flops_syrk: acc.flops_syrk,
        wall_ms_trsm: timed.then(|| median(&mut acc.wall_t)),
        wall_ms_syrk: timed.then(|| median(&mut acc.wall_s)),
        wall_ms_total: timed.then(|| median(&mut acc.wall_tot)),
        oracle_rel_err: acc.oracle_rel_err,
    }
}

fn measure_once(base: &CellBase, cfg: &AssemblyConfig, acc: &mut Option<CellAcc>) -> Result<()> {
    let (op, report) = assemble_explicit(&base.problem, &base.factor, cfg)?;
    match acc {
        None => {
            let oracle_rel_err = match &base.oracle {
                Some(o) => Some(op.f.rel_frobenius_diff(o)?),
                None => None,
            };
            *acc = Some(CellAcc {
                wall_t: vec![report.wall_trsm.as_secs_f64() * 1e3],
                wall_s: vec![report.wall_syrk.as_secs_f64() * 1e3],
                wall_tot: vec![report.wall_total.as_secs_f64() * 1e3],
                flops_trsm: report.flops_trsm.total(),
                flops_syrk: report.flops_syrk.total(),
                oracle_rel_err,
            });
        }
        Some(a) => {
            debug_assert_eq!(a.flops_trsm, report.flops_trsm.total());
            debug_assert_eq!(a.flops_syrk, report.flops_syrk.total());
            a.wall_t.push(report.wall_trsm.as_secs_f64() * 1e3);
            a.wall_s.push(report.wall_syrk.as_secs_f64() * 1e3);
            a.wall_tot.push(report.wall_total.as_secs_f64() * 1e3);
        }
    }
    Ok(())
}

/// Run the sweep and stream CSV (with explanatory `#` comments) into
/// `out`. Rows appear in deterministic specification order even in
/// parallel mode.
pub fn run_sweep(spec: &SweepSpec, out: &mut dyn Write) -> Result<SweepSummary> {
    spec.validate()?;
    let bases = build_bases(spec)?;

    struct Cell {
        key: (usize, usize),
        vi: usize,
        part: Partition,
    }
    let mut cells = Vec::new();
    for &dim in &spec.dims {
        for &n in &spec.subdomain_sizes {
            for (vi, v) in spec.variants.iter().enumerate() {
                if v.uses_partition() {
                    for &bs in &spec.block_sizes {
                        cells.push(Cell {
                            key: (dim, n),
                            vi,
                            part: Partition::Size(bs),
                        });
                    }
                    for &bc in &spec.block_counts {
                        cells.push(Cell {
                            key: (dim, n),
                            vi,
                            part: Partition::Count(bc),
                        });
                    }
                } else {
                    cells.push(Cell {
                        key: (dim, n),
                        vi,
                        part: Partition::None,
                    });
                }
            }
        }
    }

    writeln!(
        out,
        "# dualop sweep: explicit assembly of the dual operator F = B K^-1 B^T"
    )?;
    writeln!(
        out,
        "# each (dim, n) cell measures subdomain 0 of a structured Laplace decomposition with {SUBDOMAINS_PER_EDGE} subdomains per edge"
    )?;
    writeln!(
        out,
        "# wall_ms_* columns are per-subdomain medians over {} repetitions on this machine; cross-subdomain overlap and transfer effects are not modeled",
        spec.repetitions
    )?;
    writeln!(out, "# flops_* columns count exact multiply-adds plus divisions and are deterministic for a given specification")?;
    if spec.parallel {
        writeln!(
            out,
            "# parallel mode: cells ran concurrently, wall columns are blank (counts only)"
        )?;
    }
    if !spec.check_oracle {
        writeln!(
            out,
            "# oracle_rel_err is blank because oracle checking was off"
        )?;
    }

    let computed: Vec<Result<SweepRow>> = if spec.parallel {
        let next = AtomicUsize::new(0);
        let workers = crate::assembler::worker_count(cells.len());
        let run_one = |c: &Cell| -> Result<SweepRow> {
            let base = &bases[&c.key];
            let pair = &spec.variants[c.vi];
            let mut acc = None;
            measure_once(base, &cell_config(pair, c.part), &mut acc)?;
            Ok(finish_row(
                base,
                pair,
                c.part,
                acc.expect("one measurement"),
                false,
            ))
        };
        let mut gathered: Vec<(usize, Result<SweepRow>)> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers)
                .map(|_| {
                    s.spawn(|| {
                        let mut got = Vec::new();
                        loop {
                            let i = next.fetch_add(1, Ordering::Relaxed);
                            if i >= cells.len() {
                                break;
                            }
                            got.push((i, run_one(&cells[i])));
                        }
                        got
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("sweep worker panicked"))
                .collect()
        });
        gathered.sort_by_key(|(i, _)| *i);
        gathered.into_iter().map(|(_, r)| r).collect()
    } else {
        // Timed path: one untimed warmup pass, then repetitions interleaved
        // round-robin across cells so machine-wide drift lands on every
        // cell's samples instead of biasing whichever cell ran last.
        let mut accs: Vec<Option<CellAcc>> = Vec::new();
        for _ in &cells {
            accs.push(None);
        }
        let result: Result<()> = (|| {
            for c in &cells {
                let mut warmup = None;
                measure_once(
                    &bases[&c.key],
                    &cell_config(&spec.variants[c.vi], c.part),
                    &mut warmup,
                )?;
            }
            for _ in 0..spec.repetitions {
                for (i, c) in cells.iter().enumerate() {
                    measure_once(
                        &bases[&c.key],
                        &cell_config(&spec.variants[c.vi], c.part),
                        &mut accs[i],
                    )?;
                }
            }
            Ok(())
        })();
        match result {
            Err(e) => vec![Err(e)],
            Ok(()) => cells
                .iter()
                .zip(accs)
                .map(|(c, acc)| {
                    Ok(finish_row(
                        &bases[&c.key],
                        &spec.variants[c.vi],
                        c.part,
                        acc.expect("accumulated samples"),
                        true,
                    ))
                })
                .collect(),
        }
    };

    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER).map_err(csv_err)?;
    let mut worst: Option<f64> = None;
    let mut rows = 0usize;
    for (cell, row) in cells.iter().zip(computed) {
        let mut row = row?;
        row.dim = cell.key.0;
        if let Some(e) = row.oracle_rel_err {
            worst = Some(worst.map_or(e, |w| w.max(e)));
        }
        w.write_record(row.to_record()).map_err(csv_err)?;
        rows += 1;
    }
    w.flush()?;
    Ok(SweepSummary {
        rows,
        worst_oracle_err: worst,
    })
}

/// Parse a sweep CSV produced by [`run_sweep`] (comments tolerated).
pub fn read_sweep_rows<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    {
        let headers = rdr.headers().map_err(csv_err)?;
        if headers.iter().ne(SWEEP_HEADER.iter().copied()) {
            return Err(Error::Parse {
                line: 1,
                message: format!("unexpected sweep header {headers:?}"),
            });
        }
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        rows.push(SweepRow {
            dim: field(&rec, 0, line)?,
            n: field(&rec, 1, line)?,
            m: field(&rec, 2, line)?,
            variant: rec.get(3).unwrap_or_default().to_string(),
            partition_policy: rec.get(4).unwrap_or_default().to_string(),
            partition_value: field(&rec, 5, line)?,
            pruning: field(&rec, 6, line)?,
            flops_trsm: field(&rec, 7, line)?,
            flops_syrk: field(&rec, 8, line)?,
            wall_ms_trsm: opt_field(&rec, 9, line)?,
            wall_ms_syrk: opt_field(&rec, 10, line)?,
            wall_ms_total: opt_field(&rec, 11, line)?,
            oracle_rel_err: opt_field(&rec, 12, line)?,
        });
    }
    Ok(rows)
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

fn field<T: FromStr>(rec: &csv::StringRecord, i: usize, line: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let raw = rec.get(i).ok_or(Error::Parse {
        line,
        message: format!("missing column {i}"),
    })?;
    raw.parse().map_err(|e| Error::Parse {
        line,
        message: format!("column {i} ('{raw}'): {e}"),
    })
}

fn opt_field<T: FromStr>(rec: &csv::StringRecord, i: usize, line: usize) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    match rec.get(i) {
        None | Some("") => Ok(None),
        Some(_) => field(&rec.clone(), i, line).map(Some),
    }
}

fn median(xs: &mut [f64]) -> f64 {
    assert!(!xs.is_empty());
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite timings"));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

// ---------------------------------------------------------------------------
// Correctness suite
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct CheckEntry {
    pub name: String,
    pub cases: usize,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrectnessReport {
    pub seed: u64,
    pub entries: Vec<CheckEntry>,
    pub fault_injected: bool,
}

impl CorrectnessReport {
    /// A fault-injected run never passes: the injection exists to prove
    /// the suite can fail.
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.ok) && !self.fault_injected
    }

    pub fn write_text(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "correctness suite (seed {})", self.seed)?;
        for e in &self.entries {
            writeln!(
                out,
                "  {}  {} ({} cases)",
                if e.ok { "PASS" } else { "FAIL" },
                e.name,
                e.cases
            )?;
        }
        if self.fault_injected {
            writeln!(
                out,
                "  fault injection was active; the suite reports failure by design"
            )?;
        }
        writeln!(
            out,
            "result: {}",
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

/// A lower-triangular factor with unit-or-larger diagonal and random
/// subdiagonal fill, well conditioned enough for tight comparisons.
fn random_lower_factor(n: usize, density: f64, rng: &mut ChaCha8Rng) -> SparseCsr {
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

/// A random right-hand-side matrix in stepped shape together with its
/// staircase cover; every column pivot is guaranteed nonzero.
fn random_stepped(n: usize, m: usize, rng: &mut ChaCha8Rng) -> (DenseMat, SteppedProfile) {
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

/// A fully populated lower-triangular RHS: the exact stepped shape whose
/// closed-form operation counts characterize the split kernels.
fn triangular_stepped(n: usize) -> (DenseMat, SteppedProfile) {
    let mut y = DenseMat::zeros(n, n);
    for r in 0..n {
        for c in 0..=r {
            y.set(r, c, 1.0 + ((r * 31 + c * 7) % 13) as f64);
        }
    }
    let profile = SteppedProfile::of_dense(&y);
    (y, profile)
}

fn trsm_grid(partition: BlockPolicy) -> Vec<TrsmConfig> {
    TRSM_TOKENS
        .iter()
        .map(|&(_, variant, factor_block_storage, pruning)| TrsmConfig {
            variant,
            partition,
            factor_block_storage,
            pruning,
        })
        .collect()
}

/// Run the full seeded invariant suite. With `inject_fault`, a corrupted
/// triangular factor is fed to the solve kernel; the surfaced singularity
/// is recorded and the suite fails overall, demonstrating that failures
/// are detected rather than absorbed.
pub fn run_correctness(seed: u64, inject_fault: bool) -> Result<CorrectnessReport> {
    let mut entries = Vec::new();

    // 1. Every kernel pair reproduces the dense oracle on generated
    //    decompositions in both dimensions.
    {
        let mut cases = 0usize;
        let mut ok = true;
        for (dim, e) in [(2usize, 4usize), (3, 2)] {
            let d = generate(&DecompositionSpec {
                dim,
                elements_per_edge: e,
                subdomains_per_edge: 2,
                regularization_rho: 1.0,
            })?;
            for p in &d.subdomains {
                let fb = FactorBundle::factorize_auto(&p.k_reg)?;
                let oracle = oracle_sc(p)?;
                for pair in full_variant_grid() {
                    let policy = BlockPolicy::FixedSize(7);
                    let cfg = AssemblyConfig {
                        trsm: pair.trsm_config(policy),
                        syrk: pair.syrk_config(policy),
                        compare_oracle: false,
                        use_stepped_permutation: true,
                    };
                    let (op, _) = assemble_explicit(p, &fb, &cfg)?;
                    cases += 1;
                    if op.f.rel_frobenius_diff(&oracle)? >= 1e-10 {
                        ok = false;
                    }
                }
            }
        }
        entries.push(CheckEntry {
            name: "oracle equivalence of all kernel pairs on generated 2D and 3D decompositions"
                .into(),
            cases,
            ok,
        });
    }

    // 2. Bit-exact zeros above the column pivots after every solve variant.
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cases = 0usize;
        let mut ok = true;
        for _ in 0..25 {
            let n = rng.gen_range(20..=100);
            let m = rng.gen_range(5..=40);
            let l = random_lower_factor(n, 0.3, &mut rng);
            let (y0, profile) = random_stepped(n, m, &mut rng);
            for cfg in trsm_grid(BlockPolicy::FixedSize(9)) {
                let mut y = y0.clone();
                trsm::trsm(&l, &mut y, &profile, &cfg)?;
                cases += 1;
                for (c, &p) in profile.col_pivots.iter().enumerate() {
                    for r in 0..p {
                        if y.get(r, c).to_bits() != 0 {
                            ok = false;
                        }
                    }
                }
            }
        }
        entries.push(CheckEntry {
            name: "bit-exact zero preservation above pivots on randomized stepped instances".into(),
            cases,
            ok,
        });
    }

    // 3. All variants agree with the baselines on random stepped instances.
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let mut cases = 0usize;
        let mut ok = true;
        for _ in 0..10 {
            let n = rng.gen_range(30..=90);
            let m = rng.gen_range(8..=30);
            let l = random_lower_factor(n, 0.4, &mut rng);
            let (y0, profile) = random_stepped(n, m, &mut rng);
            let mut yref = y0.clone();
            trsm::trsm_baseline(&l, &mut yref, FactorStorage::Sparse)?;
            for cfg in trsm_grid(BlockPolicy::FixedCount(4)) {
                let mut y = y0.clone();
                trsm::trsm(&l, &mut y, &profile, &cfg)?;
                cases += 1;
                if y.rel_frobenius_diff(&yref)? >= 1e-12 {
                    ok = false;
                }
            }
            let (fref, _) = syrk::syrk_baseline(&yref);
            for variant in [SyrkVariant::InputSplit, SyrkVariant::OutputSplit] {
                let cfg = SyrkConfig {
                    variant,
                    partition: BlockPolicy::FixedSize(11),
                };
                let (f, _) = syrk::syrk(&yref, &profile, &cfg)?;
                cases += 1;
                if f.rel_frobenius_diff(&fref)? >= 1e-12 {
                    ok = false;
                }
            }
        }
        entries.push(CheckEntry {
            name: "split kernels agree with baselines on randomized stepped instances".into(),
            cases,
            ok,
        });
    }

    // 4. Work-reduction ratios on the exact-triangular shape approach 3
    //    and improve monotonically with finer blocks.
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xacc0);
        let n = 256;
        let l = random_lower_factor(n, 0.4, &mut rng);
        let (y0, profile) = triangular_stepped(n);
        let mut cases = 0usize;
        let mut ok = true;

        let mut base_y = y0.clone();
        let base = trsm::trsm_baseline(&l, &mut base_y, FactorStorage::Dense)?;
        let mut prev_ratio = 0.0;
        for s in [64usize, 16, 4] {
            let mut y = y0.clone();
            let f = trsm::trsm_rhs_split(
                &l,
                &mut y,
                &profile,
                BlockPolicy::FixedSize(s),
                FactorStorage::Dense,
            )?;
            let ratio = base.total() as f64 / f.total() as f64;
            cases += 1;
            if ratio <= prev_ratio {
                ok = false;
            }
            if s == 4 && !(2.7..3.0).contains(&ratio) {
                ok = false;
            }
            prev_ratio = ratio;
        }

        let mut solved = y0.clone();
        trsm::trsm_baseline(&l, &mut solved, FactorStorage::Sparse)?;
        let (_, fbase) = syrk::syrk_baseline(&solved);
        prev_ratio = 0.0;
        for s in [64usize, 16, 4] {
            let (_, f) = syrk::syrk_input_split(&solved, &profile, BlockPolicy::FixedSize(s))?;
            let ratio = fbase.total() as f64 / f.total() as f64;
            cases += 1;
            if ratio <= prev_ratio {
                ok = false;
            }
            if s == 4 && !(2.7..3.0).contains(&ratio) {
                ok = false;
            }
            prev_ratio = ratio;
        }
        entries.push(CheckEntry {
            name: "work-reduction ratios approach 3 and improve with finer blocks".into(),
            cases,
            ok,
        });
    }

    if inject_fault {
        // A factor missing a diagonal entry must surface as a singularity,
        // never as silent wrong numbers.
        let l_bad = SparseCsr::from_triplets(2, 2, &[(0, 0, 1.0), (1, 0, 0.5)])?;
        let mut y = DenseMat::zeros(2, 1);
        y.set(0, 0, 1.0);
        y.set(1, 0, 1.0);
        let surfaced = matches!(
            trsm::trsm_baseline(&l_bad, &mut y, FactorStorage::Sparse),
            Err(Error::SingularFactor { .. })
        );
        entries.push(CheckEntry {
            name: "fault injection: corrupted factor surfaced as a singular-factor error".into(),
            cases: 1,
            ok: surfaced,
        });
    }

    Ok(CorrectnessReport {
        seed,
        entries,
        fault_injected: inject_fault,
    })
}

// ---------------------------------------------------------------------------
// Amortization tables
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct AmortizeSpec {
    pub dims: Vec<usize>,
    pub subdomain_sizes: Vec<usize>,
    pub variants: Vec<VariantPair>,
    /// Individual operator applications timed per mode; median reported.
    pub apply_repetitions: usize,
    /// Factorizations/assemblies timed per cell; median reported.
    pub assembly_repetitions: usize,
}

impl AmortizeSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.subdomain_sizes.is_empty() || self.variants.is_empty() {
            return Err(Error::Parameter(
                "amortization needs at least one dimension, one subdomain size, and one variant"
                    .into(),
            ));
        }
        for &d in &self.dims {
            for &n in &self.subdomain_sizes {
                edge_elements(d, n)?;
            }
        }
        if self.apply_repetitions < 100 {
            return Err(Error::Parameter(
                "apply timings need at least 100 repetitions for a stable median".into(),
            ));
        }
        if self.assembly_repetitions == 0 {
            return Err(Error::Parameter(
                "assembly repetitions must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

pub const AMORTIZE_HEADER: [&str; 8] = [
    "dim",
    "n",
    "variant",
    "t_factor_ms",
    "t_assembly_ms",
    "t_apply_impl_us",
    "t_apply_expl_us",
    "amortization_iters",
];

#[derive(Clone, Debug, PartialEq)]
pub struct AmortizeRow {
    pub dim: usize,
    pub n: usize,
    pub variant: String,
    pub t_factor_ms: f64,
    pub t_assembly_ms: f64,
    pub t_apply_impl_us: f64,
    pub t_apply_expl_us: f64,
    /// `None` renders as "inf": the explicit path never wins.
    pub amortization_iters: Option<u64>,
}

/// Render the amortization point the way the CSV does.
pub fn format_amortization(v: Option<u64>) -> String {
    match v {
        Some(k) => k.to_string(),
        None => "inf".to_string(),
    }
}

fn parse_amortization(s: &str, line: usize) -> Result<Option<u64>> {
    if s == "inf" {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|e| Error::Parse {
        line,
        message: format!("amortization_iters '{s}': {e}"),
    })
}

/// Measure factorization, assembly, and both application modes per
/// (dim, n, variant), then evaluate the amortization model. Writes CSV to
/// `out` and returns the rows.
pub fn run_amortization(spec: &AmortizeSpec, out: &mut dyn Write) -> Result<Vec<AmortizeRow>> {
    spec.validate()?;
    writeln!(
        out,
        "# dualop amortization: when does explicit assembly pay off"
    )?;
    writeln!(
        out,
        "# t_factor_ms / t_assembly_ms: medians over {} runs; t_apply_*_us: medians over {} single applications; per-subdomain (subdomain 0), no overlap effects",
        spec.assembly_repetitions, spec.apply_repetitions
    )?;
    writeln!(out, "# amortization_iters: first iteration count where assembly plus explicit applies is strictly cheaper; inf when explicit apply is not faster")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(AMORTIZE_HEADER).map_err(csv_err)?;

    let mut rows = Vec::new();
    for &dim in &spec.dims {
        for &n in &spec.subdomain_sizes {
            let e = edge_elements(dim, n)?;
            let d = generate(&DecompositionSpec {
                dim,
                elements_per_edge: e,
                subdomains_per_edge: SUBDOMAINS_PER_EDGE,
                regularization_rho: 1.0,
            })?;
            let p = d
                .subdomains
                .into_iter()
                .next()
                .expect("at least one subdomain");

            let mut t_factor = Vec::new();
            let mut factor = None;
            for _ in 0..spec.assembly_repetitions {
                let t = Instant::now();
                factor = Some(FactorBundle::factorize_auto(&p.k_reg)?);
                t_factor.push(t.elapsed().as_secs_f64() * 1e3);
            }
            let fb = factor.expect("at least one factorization");
            let t_factor_ms = median(&mut t_factor);

            let mut rng = ChaCha8Rng::seed_from_u64(2026);
            let lambdas: Vec<Vec<f64>> = (0..spec.apply_repetitions)
                .map(|_| (0..p.m).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();

            let mut t_impl = Vec::with_capacity(lambdas.len());
            for l in &lambdas {
                let t = Instant::now();
                apply_implicit(&p, &fb, l)?;
                t_impl.push(t.elapsed().as_secs_f64() * 1e6);
            }
            let t_apply_impl_us = median(&mut t_impl);

            for pair in &spec.variants {
                let cfg = AssemblyConfig {
                    trsm: pair.trsm_config(BlockPolicy::FixedSize(500)),
                    syrk: pair.syrk_config(BlockPolicy::FixedSize(500)),
                    compare_oracle: false,
                    use_stepped_permutation: true,
                };
                let mut t_asm = Vec::new();
                let mut op = None;
                for _ in 0..spec.assembly_repetitions {
                    let t = Instant::now();
                    op = Some(assemble_explicit(&p, &fb, &cfg)?.0);
                    t_asm.push(t.elapsed().as_secs_f64() * 1e3);
                }
                let op = op.expect("at least one assembly");
                let t_assembly_ms = median(&mut t_asm);

                let mut t_expl = Vec::with_capacity(lambdas.len());
                for l in &lambdas {
                    let t = Instant::now();
                    apply_explicit(&op, l)?;
                    t_expl.push(t.elapsed().as_secs_f64() * 1e6);
                }
                let t_apply_expl_us = median(&mut t_expl);

                let point = amortization_point(&AmortizationInputs {
                    t_assembly_extra: t_assembly_ms * 1e-3,
                    t_apply_implicit: t_apply_impl_us * 1e-6,
                    t_apply_explicit: t_apply_expl_us * 1e-6,
                })?;
                let row = AmortizeRow {
                    dim,
                    n,
                    variant: pair.name.clone(),
                    t_factor_ms,
                    t_assembly_ms,
                    t_apply_impl_us,
                    t_apply_expl_us,
                    amortization_iters: point,
                };
                w.write_record([
                    row.dim.to_string(),
                    row.n.to_string(),
                    row.variant.clone(),
                    format!("{:.6}", row.t_factor_ms),
                    format!("{:.6}", row.t_assembly_ms),
                    format!("{:.6}", row.t_apply_impl_us),
                    format!("{:.6}", row.t_apply_expl_us),
                    format_amortization(row.amortization_iters),
                ])
                .map_err(csv_err)?;
                rows.push(row);
            }
        }
    }
    w.flush()?;
    Ok(rows)
}

/// Parse an amortization CSV produced by [`run_amortization`].
pub fn read_amortize_rows<R: Read>(input: R) -> Result<Vec<AmortizeRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    {
        let headers = rdr.headers().map_err(csv_err)?;
        if headers.iter().ne(AMORTIZE_HEADER.iter().copied()) {
            return Err(Error::Parse {
                line: 1,
                message: format!("unexpected amortization header {headers:?}"),
            });
        }
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        rows.push(AmortizeRow {
            dim: field(&rec, 0, line)?,
            n: field(&rec, 1, line)?,
            variant: rec.get(2).unwrap_or_default().to_string(),
            t_factor_ms: field(&rec, 3, line)?,
            t_assembly_ms: field(&rec, 4, line)?,
            t_apply_impl_us: field(&rec, 5, line)?,
            t_apply_expl_us: field(&rec, 6, line)?,
            amortization_iters: parse_amortization(rec.get(7).unwrap_or_default(), line)?,
        });
    }
    Ok(rows)
}
