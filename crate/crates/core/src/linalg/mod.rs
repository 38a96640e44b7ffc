//! Sparse symmetric matrices, envelope LDLᵀ factorization with reverse
//! Cuthill–McKee ordering, and dense generalized eigensolves.

mod dense;
mod ldl;
mod sparse;

pub use dense::{dense_generalized_eigen, DenseEigen};
pub use ldl::Ldl;
pub use sparse::{rcm_ordering, CsrMatrix};
