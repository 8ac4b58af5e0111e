//! Command-line driver: generate decompositions, run the correctness
//! suite, sweep kernel/partition combinations, and tabulate amortization
//! points. All defaults reproduce the repository's acceptance settings.

use clap::{Parser, Subcommand};
use dualop::bench::{
    default_variants, format_amortization, parse_variant_pair, run_amortization, run_correctness,
    run_sweep, AmortizeSpec, SweepSpec, VariantPair,
};
use dualop::error::Result;
use dualop::mat::market;
use dualop::problem::{generate, DecompositionSpec};
use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "dualop",
    version,
    about = "Explicit assembly of FETI dual operators: problem generation, correctness suite, kernel sweeps, amortization tables"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a structured decomposition and dump every subdomain as
    /// Matrix Market files plus a plain-text multiplier map
    Gen {
        /// Spatial dimension (2 or 3)
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Elements per subdomain edge
        #[arg(long, default_value_t = 4)]
        elements: usize,
        /// Subdomains per edge of the global domain
        #[arg(long, default_value_t = 2)]
        subdomains: usize,
        /// Regularization strength (relative diagonal shift)
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        /// Output directory (created if missing)
        #[arg(long, default_value = "problem")]
        out_dir: PathBuf,
    },
    /// Run the seeded correctness suite; exits nonzero on any failure
    Check {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Feed a corrupted triangular factor to the solve kernel to prove
        /// that failures surface; forces a FAIL verdict
        #[arg(long)]
        inject_fault: bool,
    },
    /// Sweep kernel variants over block partitions, writing one CSV row
    /// per cell
    Sweep {
        /// Dimensions to sweep, comma separated
        #[arg(long = "dim", value_delimiter = ',', default_values_t = vec![3usize])]
        dims: Vec<usize>,
        /// Per-subdomain node counts of the form (e+1)^dim
        #[arg(long = "sizes", value_delimiter = ',', default_values_t = vec![2744usize])]
        sizes: Vec<usize>,
        /// Kernel pairs <trsm>+<syrk>, comma separated
        #[arg(long = "variants", value_delimiter = ',', default_values_t = vec![String::from("rhs_split+input_split"), String::from("factor_split+input_split")])]
        variants: Vec<String>,
        /// Block sizes for fixed-size partitions
        #[arg(long = "block-sizes", value_delimiter = ',', default_values_t = vec![10usize, 50, 200, 500, 2000, 10000])]
        block_sizes: Vec<usize>,
        /// Block counts for fixed-count partitions
        #[arg(long = "block-counts", value_delimiter = ',')]
        block_counts: Vec<usize>,
        /// Timed repetitions per cell (medians reported)
        #[arg(long, default_value_t = 3)]
        reps: usize,
        /// Verify every cell against the dense oracle; exits nonzero if
        /// any relative error reaches 1e-10
        #[arg(long)]
        check: bool,
        /// Run cells concurrently and report operation counts only
        #[arg(long)]
        parallel: bool,
        /// Output CSV path
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
    },
    /// Measure factorization, assembly, and apply times, then report the
    /// iteration count where explicit assembly pays off
    Amortize {
        #[arg(long = "dim", value_delimiter = ',', default_values_t = vec![3usize])]
        dims: Vec<usize>,
        #[arg(long = "sizes", value_delimiter = ',', default_values_t = vec![1331usize])]
        sizes: Vec<usize>,
        #[arg(
            long = "variants",
            value_delimiter = ',',
            default_values_t = vec![String::from("baseline_sparse+baseline"), String::from("factor_split+input_split")]
        )]
        variants: Vec<String>,
        /// Timed applications per mode (median reported)
        #[arg(long, default_value_t = 200)]
        apply_reps: usize,
        /// Timed factorizations/assemblies (median reported)
        #[arg(long, default_value_t = 3)]
        assembly_reps: usize,
        /// Output CSV path
        #[arg(long, default_value = "amortize.csv")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn create_with_context(path: &Path) -> Result<File> {
    File::create(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())).into())
}

fn parse_variants(names: &[String]) -> Result<Vec<VariantPair>> {
    if names.is_empty() {
        return Ok(default_variants());
    }
    names.iter().map(|s| parse_variant_pair(s)).collect()
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Gen {
            dim,
            elements,
            subdomains,
            rho,
            out_dir,
        } => {
            let d = generate(&DecompositionSpec {
                dim,
                elements_per_edge: elements,
                subdomains_per_edge: subdomains,
                regularization_rho: rho,
            })?;
            fs::create_dir_all(&out_dir).map_err(|e| {
                std::io::Error::new(e.kind(), format!("{}: {e}", out_dir.display()))
            })?;
            let mut summary = String::new();
            summary.push_str(&format!(
                "dim {dim}, {elements} elements per subdomain edge, {subdomains} subdomains per edge, rho {rho}\n"
            ));
            summary.push_str(&format!(
                "{} subdomains, {} global multipliers\n",
                d.subdomains.len(),
                d.total_multipliers
            ));
            for (i, p) in d.subdomains.iter().enumerate() {
                market::write_coordinate_file(
                    &p.k_reg,
                    true,
                    &out_dir.join(format!("k_reg_{i:03}.mtx")),
                )?;
                market::write_coordinate_file(
                    &p.bt,
                    false,
                    &out_dir.join(format!("bt_{i:03}.mtx")),
                )?;
                let map: String = p.lambda_map.iter().map(|g| format!("{g}\n")).collect();
                fs::write(out_dir.join(format!("lambda_map_{i:03}.txt")), map)?;
                summary.push_str(&format!("subdomain {i}: n={} m={}\n", p.n, p.m));
            }
            fs::write(out_dir.join("summary.txt"), &summary)?;
            print!("{summary}");
            println!("wrote {}", out_dir.display());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Check { seed, inject_fault } => {
            let report = run_correctness(seed, inject_fault)?;
            let mut stdout = std::io::stdout();
            report.write_text(&mut stdout)?;
            stdout.flush()?;
            Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Cmd::Sweep {
            dims,
            sizes,
            variants,
            block_sizes,
            block_counts,
            reps,
            check,
            parallel,
            out,
        } => {
            let spec = SweepSpec {
                dims,
                subdomain_sizes: sizes,
                variants: parse_variants(&variants)?,
                block_sizes,
                block_counts,
                repetitions: reps,
                check_oracle: check,
                parallel,
            };
            let mut file = create_with_context(&out)?;
            let summary = run_sweep(&spec, &mut file)?;
            println!("wrote {} rows to {}", summary.rows, out.display());
            if let Some(worst) = summary.worst_oracle_err {
                println!("worst oracle relative error: {worst:.3e}");
                if worst >= 1e-10 {
                    eprintln!("oracle check failed (threshold 1e-10)");
                    return Ok(ExitCode::FAILURE);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Amortize {
            dims,
            sizes,
            variants,
            apply_reps,
            assembly_reps,
            out,
        } => {
            let spec = AmortizeSpec {
                dims,
                subdomain_sizes: sizes,
                variants: parse_variants(&variants)?,
                apply_repetitions: apply_reps,
                assembly_repetitions: assembly_reps,
            };
            let mut file = create_with_context(&out)?;
            let rows = run_amortization(&spec, &mut file)?;
            for r in &rows {
                println!(
                    "dim {} n={} {}: assembly {:.3} ms, apply {:.3} us implicit vs {:.3} us explicit, amortizes at {} iterations",
                    r.dim,
                    r.n,
                    r.variant,
                    r.t_assembly_ms,
                    r.t_apply_impl_us,
                    r.t_apply_expl_us,
                    format_amortization(r.amortization_iters)
                );
            }
            println!("wrote {} rows to {}", rows.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}
