use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Compressed sparse row matrix of `f64`.
///
/// Column indices are strictly increasing within each row, every stored value
/// is finite and nonzero. The structure cannot be modified after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Builds a CSR matrix from `(row, col, value)` triplets, summing duplicates
/// and dropping entries that end up exactly zero.
pub fn csr_from_triplets(
    triplets: &[(usize, usize, f64)],
    nrows: usize,
    ncols: usize,
) -> Result<SparseMatrix> {
    SparseMatrix::from_triplets(nrows, ncols, triplets)
}

/// `A v` with a dimension check.
pub fn spmv(a: &SparseMatrix, v: &[f64]) -> Result<Vec<f64>> {
    a.spmv(v)
}

impl SparseMatrix {
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        for &(row, col, value) in triplets {
            if row >= nrows || col >= ncols {
                return Err(Error::IndexOutOfRange {
                    row,
                    col,
                    nrows,
                    ncols,
                });
            }
            if !value.is_finite() {
                return Err(Error::NonFinite("triplet value"));
            }
        }

        // counting sort by row, then sort each row by column
        let mut counts = vec![0usize; nrows + 1];
        for &(row, _, _) in triplets {
            counts[row + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut entries = vec![(0usize, 0.0f64); triplets.len()];
        for &(row, col, value) in triplets {
            entries[next[row]] = (col, value);
            next[row] += 1;
        }

        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        for i in 0..nrows {
            let row = &mut entries[counts[i]..counts[i + 1]];
            row.sort_by_key(|&(c, _)| c);
            let mut k = 0;
            while k < row.len() {
                let col = row[k].0;
                let mut sum = 0.0;
                while k < row.len() && row[k].0 == col {
                    sum += row[k].1;
                    k += 1;
                }
                if sum != 0.0 {
                    col_idx.push(col);
                    values.push(sum);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        let triplets: Vec<_> = diag.iter().enumerate().map(|(i, &d)| (i, i, d)).collect();
        Self::from_triplets(n, n, &triplets)
    }

    /// Dense row-major input; exact zeros are not stored.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut triplets = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::DimensionMismatch {
                    context: "dense row length",
                    expected: ncols,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(nrows, ncols, &triplets)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[range.clone()], &self.values[range])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn spmv(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.ncols {
            return Err(Error::DimensionMismatch {
                context: "spmv",
                expected: self.ncols,
                found: v.len(),
            });
        }
        let mut out = vec![0.0; self.nrows];
        self.mul_vec_into(v, &mut out);
        Ok(out)
    }

    /// `out = A v`; lengths must already match.
    pub fn mul_vec_into(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.ncols);
        debug_assert_eq!(out.len(), self.nrows);
        for (i, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * v[self.col_idx[k]];
            }
            *o = s;
        }
    }

    /// `out += alpha * A v`
    pub fn mul_vec_add(&self, alpha: f64, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.ncols);
        debug_assert_eq!(out.len(), self.nrows);
        for (i, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * v[self.col_idx[k]];
            }
            *o += alpha * s;
        }
    }

    /// `Aᵀ v`
    pub fn transpose_mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.nrows {
            return Err(Error::DimensionMismatch {
                context: "transpose spmv",
                expected: self.nrows,
                found: v.len(),
            });
        }
        let mut out = vec![0.0; self.ncols];
        for (i, &vi) in v.iter().enumerate() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out[self.col_idx[k]] += self.values[k] * vi;
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.col_idx {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                col_idx[next[j]] = i;
                values[next[j]] = self.values[k];
                next[j] += 1;
            }
        }
        Self {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// `Σ cᵢ Aᵢ` over matrices of identical shape.
    pub fn linear_combination(terms: &[(f64, &SparseMatrix)]) -> Result<Self> {
        let (nrows, ncols) = match terms.first() {
            Some((_, m)) => (m.nrows, m.ncols),
            None => return Ok(Self::zeros(0, 0)),
        };
        let mut triplets = Vec::new();
        for (c, m) in terms {
            if m.nrows != nrows || m.ncols != ncols {
                return Err(Error::DimensionMismatch {
                    context: "linear combination",
                    expected: nrows * ncols,
                    found: m.nrows * m.ncols,
                });
            }
            if *c != 0.0 {
                triplets.extend(m.triplets().map(|(i, j, v)| (i, j, c * v)));
            }
        }
        Self::from_triplets(nrows, ncols, &triplets)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        if self.nrows != self.ncols {
            return false;
        }
        let tol = rel_tol * self.max_abs();
        let t = self.transpose();
        for i in 0..self.nrows {
            let (ca, va) = self.row(i);
            let (cb, vb) = t.row(i);
            // merge the two sorted rows
            let (mut p, mut q) = (0, 0);
            while p < ca.len() || q < cb.len() {
                let (a, b) = match (ca.get(p), cb.get(q)) {
                    (Some(&x), Some(&y)) if x == y => {
                        p += 1;
                        q += 1;
                        (va[p - 1], vb[q - 1])
                    }
                    (Some(&x), Some(&y)) if x < y => {
                        p += 1;
                        (va[p - 1], 0.0)
                    }
                    (Some(_), None) => {
                        p += 1;
                        (va[p - 1], 0.0)
                    }
                    _ => {
                        q += 1;
                        (0.0, vb[q - 1])
                    }
                };
                if (a - b).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// `xᵀ A x`
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for (i, &xi) in x.iter().enumerate().take(self.nrows) {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += xi * self.values[k] * x[self.col_idx[k]];
            }
        }
        s
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, j, v) in self.triplets() {
            out[i][j] = v;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn duplicates_are_summed() {
        let a = csr_from_triplets(&[(0, 0, 1.0), (0, 0, 2.0)], 1, 1).unwrap();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.get(0, 0), 3.0);
    }

    #[test]
    fn empty_input_gives_zero_matrix() {
        let a = csr_from_triplets(&[], 2, 2).unwrap();
        assert_eq!(a.nnz(), 0);
        assert_eq!(a.spmv(&[4.0, 5.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn off_diagonal_product() {
        let a = csr_from_triplets(&[(1, 0, 5.0), (0, 1, 7.0)], 2, 2).unwrap();
        assert_eq!(a.spmv(&[1.0, 1.0]).unwrap(), vec![7.0, 5.0]);
    }

    #[test]
    fn cancelling_duplicates_are_dropped() {
        let a = csr_from_triplets(&[(0, 1, 2.0), (0, 1, -2.0), (1, 1, 1.0)], 2, 2).unwrap();
        assert_eq!(a.nnz(), 1);
    }

    #[test]
    fn out_of_range_is_structural_error() {
        let err = csr_from_triplets(&[(2, 0, 1.0)], 2, 2).unwrap_err();
        assert!(matches!(err, Error::IndexOutOfRange { row: 2, .. }));
    }

    #[test]
    fn rejects_nan() {
        let err = csr_from_triplets(&[(0, 0, f64::NAN)], 1, 1).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)));
    }

    #[test]
    fn spmv_examples() {
        assert_eq!(
            SparseMatrix::identity(3).spmv(&[1.0, 2.0, 3.0]).unwrap(),
            vec![1.0, 2.0, 3.0]
        );
        let a = SparseMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert_eq!(a.spmv(&[1.0, -1.0]).unwrap(), vec![1.0, -1.0]);
        assert!(matches!(
            a.spmv(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn symmetry_check() {
        let a = SparseMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert!(a.is_symmetric(1e-12));
        let b = SparseMatrix::from_dense(&[vec![2.0, 1.0], vec![0.0, 2.0]]).unwrap();
        assert!(!b.is_symmetric(1e-12));
    }

    fn triplet_strategy() -> impl Strategy<Value = (usize, usize, Vec<(usize, usize, f64)>)> {
        (1usize..7, 1usize..7).prop_flat_map(|(r, c)| {
            let t = proptest::collection::vec((0..r, 0..c, -5.0f64..5.0), 0..30);
            (Just(r), Just(c), t)
        })
    }

    proptest! {
        #[test]
        fn csr_matches_dense_accumulation((r, c, t) in triplet_strategy(),
                                          v in proptest::collection::vec(-3.0f64..3.0, 7)) {
            let a = SparseMatrix::from_triplets(r, c, &t).unwrap();
            let mut dense = vec![vec![0.0; c]; r];
            for &(i, j, x) in &t {
                dense[i][j] += x;
            }
            for i in 0..r {
                let (cols, _) = a.row(i);
                prop_assert!(cols.windows(2).all(|w| w[0] < w[1]));
            }
            let y = a.spmv(&v[..c]).unwrap();
            for i in 0..r {
                let expect: f64 = (0..c).map(|j| dense[i][j] * v[j]).sum();
                prop_assert!((y[i] - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
            }
            let at = a.transpose();
            let yt = at.spmv(&v[..r.min(7)].iter().copied().chain(core::iter::repeat(0.0)).take(r).collect::<Vec<_>>()).unwrap();
            let yt2 = a.transpose_mul_vec(&v[..r.min(7)].iter().copied().chain(core::iter::repeat(0.0)).take(r).collect::<Vec<_>>()).unwrap();
            for (p, q) in yt.iter().zip(&yt2) {
                prop_assert!((p - q).abs() <= 1e-12 * (1.0 + p.abs()));
            }
        }
    }
}
