//! Explicit assembly of FETI dual operators (Schur complements) on the CPU.
//!
//! A FETI-style domain decomposition ties subdomains together with signed
//! boolean gluing matrices `B̃ᵢ`. Dual (interface) iterations repeatedly
//! apply the local operator
//!
//! ```text
//! F̃ᵢ = B̃ᵢ Kᵢ⁻¹ B̃ᵢᵀ
//! ```
//!
//! which can either stay implicit (two sparse triangular solves per
//! application) or be assembled once into a dense `m×m` matrix whose later
//! applications are a single GEMV. This crate implements the assembly path
//! and the sparsity-aware kernels that make it affordable:
//!
//! * sparse Cholesky factorization of the regularized stiffness `Kᵢ`
//!   ([`cholesky`]),
//! * a column permutation that rearranges `B̃ᵢᵀ` into a *stepped* shape whose
//!   leading zeros triangular solves never touch ([`stepped`]),
//! * blocked triangular solve (TRSM) and symmetric rank-k (SYRK) kernels
//!   that split their work into sub-blocks and skip the structural zeros,
//!   with exact operation counters ([`trsm`], [`syrk`]),
//! * the end-to-end assembly pipeline plus a dense oracle used to verify it
//!   ([`assembler`]),
//! * mesh-based multi-subdomain problem generation ([`problem`]) and the
//!   sweep/correctness/amortization drivers behind the `dualop` binary
//!   ([`bench`]).
//!
//! Every runnable capability has a corresponding program under `examples/`;
//! start with `examples/assemble_schur.rs` for the full pipeline.

// Kernels index rows and columns explicitly; iterator rewrites would hide
// the row/column symmetry the arithmetic is organized around.
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod mat;

pub mod assembler;
pub mod bench;
pub mod cholesky;
pub mod ordering;
pub mod problem;
pub mod stepped;
pub mod syrk;
#[cfg(test)]
pub(crate) mod test_support;
pub mod trsm;

pub use error::{Error, Result};
pub use mat::{DenseMat, FlopCounter, Permutation, SparseCsr};
