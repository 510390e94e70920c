//! Small self-contained linear algebra: dense Cholesky for neighbor
//! submatrices and short temporal processes, and a sparse LDLᵀ for the
//! joint coefficient/random-effect draws.

pub mod dense;
pub mod sparse;

pub use dense::{Cholesky, Matrix};
pub use sparse::{LdlFactor, SparseSymmetric, SymbolicLdl};
