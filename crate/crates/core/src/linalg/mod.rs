//! Sparse storage, saddle-point factorization and small dense kernels.

mod dense;
mod kkt;
mod lu;
mod ordering;
mod sparse;
pub mod vector;

pub use dense::{small_cosine, DenseMatrix, MAX_SMALL_DIM};
pub use kkt::{kkt_factorize, kkt_solve, SaddleFactorization};
pub use lu::SparseLu;
pub use sparse::{csr_from_triplets, spmv, SparseMatrix};
