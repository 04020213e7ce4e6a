use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Small row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            data: vec![0.0; nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            if r.len() != ncols {
                return Err(Error::DimensionMismatch {
                    context: "dense row length",
                    expected: ncols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self { nrows, ncols, data })
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(nrows * ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                data.push(f(i, j));
            }
        }
        Self { nrows, ncols, data }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.nrows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.ncols, self.nrows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows, "matmul shape mismatch");
        let mut out = Self::zeros(self.nrows, other.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = &other.data[k * other.ncols..(k + 1) * other.ncols];
                let dst = &mut out.data[i * other.ncols..(i + 1) * other.ncols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.ncols, v.len(), "mul_vec shape mismatch");
        (0..self.nrows)
            .map(|i| {
                self.data[i * self.ncols..(i + 1) * self.ncols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `alpha * self + beta * other`
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        Self {
            nrows: self.nrows,
            ncols: self.ncols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| alpha * a + beta * b)
                .collect(),
        }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            nrows: self.nrows,
            ncols: self.ncols,
            data: self.data.iter().map(|a| alpha * a).collect(),
        }
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.ncols)
            .map(|j| (0..self.nrows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn has_non_finite(&self) -> bool {
        self.data.iter().any(|x| !x.is_finite())
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.ncols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.ncols + j]
    }
}

/// Largest Krylov dimension the cosine kernel accepts.
pub const MAX_SMALL_DIM: usize = 64;
const SERIES_DEGREE: usize = 10;

/// `Σₖ (−τ²H)ᵏ / (2k)!`: the cosine of `τ√H` without forming the square root.
///
/// `τ` is halved until `τ²‖H‖₁ ≤ 1`, the even series is summed to degree 10
/// in Horner form and the scaling is undone by double-angle steps
/// `C ← 2C² − I`.
pub fn small_cosine(h: &DenseMatrix, tau: f64) -> Result<DenseMatrix> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch {
            context: "small_cosine needs a square matrix",
            expected: h.nrows(),
            found: h.ncols(),
        });
    }
    if h.nrows() > MAX_SMALL_DIM {
        return Err(Error::DimensionMismatch {
            context: "small_cosine dimension limit",
            expected: MAX_SMALL_DIM,
            found: h.nrows(),
        });
    }
    if h.has_non_finite() || !tau.is_finite() {
        return Err(Error::NonFinite("small_cosine input"));
    }
    if tau < 0.0 {
        return Err(Error::InvalidConfig(alloc::format!(
            "negative step {tau} in small_cosine"
        )));
    }
    let r = h.nrows();
    let id = DenseMatrix::identity(r);

    let mut theta = tau * tau * h.norm1();
    let mut squarings = 0u32;
    while theta > 1.0 {
        theta *= 0.25;
        squarings += 1;
    }
    let scale = tau * tau / libm::ldexp(1.0, 2 * squarings as i32);
    let x = h.scaled(-scale);

    // Horner: I + X/(1·2) (I + X/(3·4) (I + ...))
    let mut c = id.clone();
    for k in (1..=SERIES_DEGREE).rev() {
        let denom = ((2 * k - 1) * (2 * k)) as f64;
        c = id.combine(1.0, &x.matmul(&c), 1.0 / denom);
    }
    for _ in 0..squarings {
        c = c.matmul(&c).combine(2.0, &id, -1.0);
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    /// Degree-`deg` direct sum of the even series, no scaling.
    fn series_oracle(h: &DenseMatrix, tau: f64, deg: usize) -> DenseMatrix {
        let r = h.nrows();
        let x = h.scaled(-tau * tau);
        let mut term = DenseMatrix::identity(r);
        let mut sum = term.clone();
        for k in 1..=deg {
            term = x.matmul(&term).scaled(1.0 / ((2 * k - 1) * (2 * k)) as f64);
            sum = sum.combine(1.0, &term, 1.0);
        }
        sum
    }

    #[test]
    fn zero_matrix_gives_identity() {
        for r in [1, 3, 7] {
            let c = small_cosine(&DenseMatrix::zeros(r, r), 2.5).unwrap();
            assert_eq!(c, DenseMatrix::identity(r));
        }
    }

    #[test]
    fn diagonal_collapses_to_scalar_cosines() {
        let h = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 4.0]]).unwrap();
        let c = small_cosine(&h, PI).unwrap();
        assert!((c[(0, 0)] + 1.0).abs() < 1e-12);
        assert!((c[(1, 1)] - 1.0).abs() < 1e-12);
        assert!(c[(0, 1)].abs() < 1e-15 && c[(1, 0)].abs() < 1e-15);
    }

    #[test]
    fn rotation_generator_matches_long_series() {
        // H² = −I, so the series is Σ (−H)ᵏ/(2k)! with cosh-type growth
        let h = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
        let c = small_cosine(&h, 1.0).unwrap();
        let oracle = series_oracle(&h, 1.0, 40);
        assert!(c.max_abs_diff(&oracle) <= 1e-12, "{c:?} vs {oracle:?}");
    }

    #[test]
    fn rejects_nan() {
        let mut h = DenseMatrix::identity(2);
        h[(0, 1)] = f64::NAN;
        assert!(matches!(small_cosine(&h, 1.0), Err(Error::NonFinite(_))));
    }

    fn symmetric(seed: Vec<f64>, r: usize, scale: f64) -> DenseMatrix {
        let mut h = DenseMatrix::zeros(r, r);
        let mut k = 0;
        for i in 0..r {
            for j in i..r {
                h[(i, j)] = seed[k];
                h[(j, i)] = seed[k];
                k += 1;
            }
        }
        let n = h.norm1();
        if n > 0.0 {
            h = h.scaled(scale / n);
        }
        h
    }

    proptest! {
        #[test]
        fn double_angle_identity(seed in proptest::collection::vec(-1.0f64..1.0, 21),
                                 r in 1usize..6, norm in 0.0f64..10.0, tau in 0.0f64..1.5) {
            let h = symmetric(seed, r, norm);
            let c1 = small_cosine(&h, tau).unwrap();
            let c2 = small_cosine(&h, 2.0 * tau).unwrap();
            let id = DenseMatrix::identity(r);
            let rhs = c1.matmul(&c1).combine(2.0, &id, -1.0);
            prop_assert!(c2.max_abs_diff(&rhs) <= 1e-12);
        }

        #[test]
        fn agrees_with_eigendecomposition(seed in proptest::collection::vec(-1.0f64..1.0, 21),
                                          r in 1usize..6, norm in 0.0f64..20.0, tau in 0.0f64..2.0) {
            // PSD H = GᵀG scaled
            let g = symmetric(seed, r, 1.0);
            let h0 = g.transpose().matmul(&g);
            let n = h0.norm1();
            let h = if n > 0.0 { h0.scaled(norm / n) } else { h0 };
            let hn = DMatrix::from_fn(r, r, |i, j| h[(i, j)]);
            let eig = hn.symmetric_eigen();
            let mut oracle = DenseMatrix::zeros(r, r);
            for k in 0..r {
                let lam = eig.eigenvalues[k].max(0.0);
                let ck = (tau * lam.sqrt()).cos();
                for i in 0..r {
                    for j in 0..r {
                        oracle[(i, j)] += eig.eigenvectors[(i, k)] * ck * eig.eigenvectors[(j, k)];
                    }
                }
            }
            let c = small_cosine(&h, tau).unwrap();
            prop_assert!(c.max_abs_diff(&oracle) <= 1e-12, "diff {}", c.max_abs_diff(&oracle));
        }
    }
}
