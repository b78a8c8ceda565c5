//! Dependency-light linear-algebra kernels.
//!
//! Everything the projection pipeline needs to solve with:
//! dense LU for the per-cell saddle blocks, a sparse symmetric LDL^T
//! factorization for the condensed trace system, conjugate gradients as an
//! iterative fallback, and a primal active-set solver for box-constrained
//! quadratic programs.

mod dense;
mod qp;
mod sparse;

pub use dense::{lu_solve, DenseMatrix, LuFactor};
pub use qp::box_qp;
pub use sparse::{cg_solve, ldl_solve, LdltFactor, LdltSymbolic, SparseSym, SparseSymBuilder};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("matrix is singular (pivot {pivot:.3e} at index {index})")]
    Singular { index: usize, pivot: f64 },
    #[error("dimension mismatch: matrix is {rows}x{cols}, vector has length {len}")]
    Dimension { rows: usize, cols: usize, len: usize },
    #[error("iterative solver did not converge within {maxit} iterations (residual {residual:.3e})")]
    MaxIterations { maxit: usize, residual: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
