use alloc::vec::Vec;

use super::{SparseLu, SparseMatrix};
use crate::error::{Error, Result};

/// Factorization of the saddle-point matrix
///
/// ```text
/// [ K  Bᵀ ]
/// [ B  0  ]
/// ```
///
/// backed by a sparse LU of the assembled `(n + m) x (n + m)` block matrix.
/// The factorization is immutable and can serve any number of solves.
#[derive(Debug, Clone)]
pub struct SaddleFactorization {
    n: usize,
    m: usize,
    lu: SparseLu,
}

/// Factorizes `[[K, Bᵀ], [B, 0]]`.
///
/// Fails with [`Error::SingularPivot`] if the block matrix is numerically
/// singular, which happens when `K` is not definite on `ker B` or `B` is rank
/// deficient.
pub fn kkt_factorize(k: &SparseMatrix, b: &SparseMatrix) -> Result<SaddleFactorization> {
    SaddleFactorization::new(k, b)
}

/// Solves `K x + Bᵀ μ = r1`, `B x = r2`.
pub fn kkt_solve(
    fact: &SaddleFactorization,
    r1: &[f64],
    r2: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    fact.solve(r1, r2)
}

impl SaddleFactorization {
    pub fn new(k: &SparseMatrix, b: &SparseMatrix) -> Result<Self> {
        let n = k.nrows();
        if k.ncols() != n {
            return Err(Error::DimensionMismatch {
                context: "KKT block K must be square",
                expected: n,
                found: k.ncols(),
            });
        }
        if b.ncols() != n {
            return Err(Error::DimensionMismatch {
                context: "KKT block B columns",
                expected: n,
                found: b.ncols(),
            });
        }
        let m = b.nrows();
        if m > n {
            return Err(Error::InvalidSystem(alloc::format!(
                "constraint count {m} exceeds primal dimension {n}"
            )));
        }
        let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(k.nnz() + 2 * b.nnz());
        triplets.extend(k.triplets());
        for (i, j, v) in b.triplets() {
            triplets.push((n + i, j, v));
            triplets.push((j, n + i, v));
        }
        let block = SparseMatrix::from_triplets(n + m, n + m, &triplets)?;
        let lu = SparseLu::factorize(&block)?;
        Ok(Self { n, m, lu })
    }

    /// Primal dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Multiplier dimension.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn solve(&self, r1: &[f64], r2: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        if r1.len() != self.n {
            return Err(Error::DimensionMismatch {
                context: "KKT primal right-hand side",
                expected: self.n,
                found: r1.len(),
            });
        }
        if r2.len() != self.m {
            return Err(Error::DimensionMismatch {
                context: "KKT constraint right-hand side",
                expected: self.m,
                found: r2.len(),
            });
        }
        let mut rhs = Vec::with_capacity(self.n + self.m);
        rhs.extend_from_slice(r1);
        rhs.extend_from_slice(r2);
        let mut sol = self.lu.solve(&rhs);
        let mult = sol.split_off(self.n);
        Ok((sol, mult))
    }

    /// Solve with a homogeneous constraint `B x = 0`.
    pub fn solve_kernel(&self, r1: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let zeros = alloc::vec![0.0; self.m];
        self.solve(r1, &zeros)
    }
}
