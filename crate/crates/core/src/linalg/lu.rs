//! Left-looking sparse LU with threshold partial pivoting.
//!
//! The column order comes from a minimum-degree ordering of `A + Aᵀ`. Each
//! column is computed by a sparse triangular solve against the columns of `L`
//! already built (Gilbert–Peierls), after which the pivot is chosen among the
//! rows not yet pivotal. The diagonal candidate is kept whenever its magnitude
//! is at least [`DIAGONAL_PREFERENCE`] times the column maximum, which keeps
//! the fill close to the symmetric prediction.

use alloc::vec;
use alloc::vec::Vec;

use super::ordering::minimum_degree;
use super::SparseMatrix;
use crate::error::{Error, Result};

/// Pivots smaller than this fraction of `max |a_ij|` are treated as zero.
pub const PIVOT_TOLERANCE: f64 = 1e-14;

const DIAGONAL_PREFERENCE: f64 = 0.1;
const NONE: usize = usize::MAX;

/// `P A Q = L U` for a square sparse matrix.
#[derive(Debug, Clone)]
pub struct SparseLu {
    n: usize,
    // column permutation: column k of the factor is column q[k] of A
    q: Vec<usize>,
    // pinv[i] = k when original row i is the k-th pivot row
    pinv: Vec<usize>,
    // unit lower triangle, column-compressed, diagonal stored first
    l_ptr: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    // upper triangle, column-compressed, diagonal stored last
    u_ptr: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<f64>,
}

impl SparseLu {
    pub fn factorize(a: &SparseMatrix) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch {
                context: "LU of non-square matrix",
                expected: n,
                found: a.ncols(),
            });
        }
        let q = minimum_degree(a);
        // column access to A through the CSR storage of Aᵀ
        let at = a.transpose();
        let tol = PIVOT_TOLERANCE * a.max_abs();

        let mut pinv = vec![NONE; n];
        let mut l_ptr = Vec::with_capacity(n + 1);
        let mut u_ptr = Vec::with_capacity(n + 1);
        let cap = 4 * a.nnz() + n;
        let mut l_idx = Vec::with_capacity(cap);
        let mut l_val = Vec::with_capacity(cap);
        let mut u_idx = Vec::with_capacity(cap);
        let mut u_val = Vec::with_capacity(cap);

        let mut x = vec![0.0; n];
        let mut xi = vec![0usize; n];
        let mut stack = vec![0usize; n];
        let mut resume = vec![0usize; n];
        let mut mark = vec![NONE; n];

        for k in 0..n {
            l_ptr.push(l_idx.len());
            u_ptr.push(u_idx.len());
            let col = q[k];
            let (rows, vals) = at.row(col);

            // reach of the column pattern in the graph of L
            let mut top = n;
            for &start in rows {
                if mark[start] == k {
                    continue;
                }
                let mut head = 0;
                stack[0] = start;
                while head != NONE {
                    let j = stack[head];
                    let jcol = pinv[j];
                    if mark[j] != k {
                        mark[j] = k;
                        resume[head] = if jcol == NONE { 0 } else { l_ptr[jcol] };
                    }
                    let end = if jcol == NONE { 0 } else { l_ptr[jcol + 1] };
                    let mut descended = false;
                    let mut p = resume[head];
                    while p < end {
                        let i = l_idx[p];
                        p += 1;
                        if mark[i] != k {
                            resume[head] = p;
                            head += 1;
                            stack[head] = i;
                            descended = true;
                            break;
                        }
                    }
                    if !descended {
                        head = head.wrapping_sub(1);
                        top -= 1;
                        xi[top] = j;
                    }
                }
            }

            // numeric triangular solve on the reach, in topological order
            for (&i, &v) in rows.iter().zip(vals) {
                x[i] = v;
            }
            for &j in &xi[top..n] {
                let jcol = pinv[j];
                if jcol == NONE {
                    continue;
                }
                let xj = x[j];
                for p in l_ptr[jcol] + 1..l_ptr[jcol + 1] {
                    x[l_idx[p]] -= l_val[p] * xj;
                }
            }

            // pivot selection
            let mut ipiv = NONE;
            let mut amax = -1.0f64;
            for &i in &xi[top..n] {
                if pinv[i] == NONE {
                    if x[i].abs() > amax {
                        amax = x[i].abs();
                        ipiv = i;
                    }
                } else {
                    u_idx.push(pinv[i]);
                    u_val.push(x[i]);
                }
            }
            if ipiv == NONE || !(amax > tol) {
                return Err(Error::SingularPivot {
                    index: k,
                    magnitude: amax.max(0.0),
                });
            }
            if pinv[col] == NONE && mark[col] == k && x[col].abs() >= DIAGONAL_PREFERENCE * amax {
                ipiv = col;
            }
            let pivot = x[ipiv];
            u_idx.push(k);
            u_val.push(pivot);
            pinv[ipiv] = k;
            l_idx.push(ipiv);
            l_val.push(1.0);
            for &i in &xi[top..n] {
                if pinv[i] == NONE {
                    l_idx.push(i);
                    l_val.push(x[i] / pivot);
                }
                x[i] = 0.0;
            }
        }
        l_ptr.push(l_idx.len());
        u_ptr.push(u_idx.len());
        for i in &mut l_idx {
            *i = pinv[*i];
        }
        Ok(Self {
            n,
            q,
            pinv,
            l_ptr,
            l_idx,
            l_val,
            u_ptr,
            u_idx,
            u_val,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored entries in `L` and `U`.
    pub fn factor_nnz(&self) -> usize {
        self.l_val.len() + self.u_val.len()
    }

    /// Solves `A x = b`; `b.len()` must equal the dimension.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        debug_assert_eq!(b.len(), self.n);
        let mut y = vec![0.0; self.n];
        for (i, &bi) in b.iter().enumerate() {
            y[self.pinv[i]] = bi;
        }
        for j in 0..self.n {
            let yj = y[j];
            if yj != 0.0 {
                for p in self.l_ptr[j] + 1..self.l_ptr[j + 1] {
                    y[self.l_idx[p]] -= self.l_val[p] * yj;
                }
            }
        }
        for j in (0..self.n).rev() {
            let last = self.u_ptr[j + 1] - 1;
            y[j] /= self.u_val[last];
            let yj = y[j];
            if yj != 0.0 {
                for p in self.u_ptr[j]..last {
                    y[self.u_idx[p]] -= self.u_val[p] * yj;
                }
            }
        }
        let mut x = vec![0.0; self.n];
        for (k, &col) in self.q.iter().enumerate() {
            x[col] = y[k];
        }
        x
    }
}
