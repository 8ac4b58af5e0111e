//! Matrix containers shared by every kernel in the crate: CSR sparse
//! storage, row-major dense storage with leading-dimension views,
//! permutations, work counters, and Matrix Market I/O.

pub mod dense;
pub mod flops;
pub mod market;
pub mod perm;
pub mod sparse;

pub use dense::{scatter_add_rows, DenseMat, DenseView, DenseViewMut};
pub use flops::FlopCounter;
pub use perm::Permutation;
pub use sparse::SparseCsr;
