//! Arnoldi approximation of `cos(τ Ω_ker) x₀`, with `Ω_ker² = A_ker`.

use alloc::vec;
use alloc::vec::Vec;

use crate::dae::OperatorToolkit;
use crate::error::{Error, Result};
use crate::linalg::MAX_SMALL_DIM;
use crate::linalg::vector::{all_finite, axpy, dot, norm2, scale};
use crate::linalg::{small_cosine, DenseMatrix};

/// Relative size of `h_{j+1,j}` below which the Krylov space is treated as
/// invariant.
pub const BREAKDOWN_TOLERANCE: f64 = 1e-12;

/// Orthonormal Krylov basis `V` of `span{x₀, A_ker x₀, …}` and the projected
/// Hessenberg matrix `H = Vᵀ A_ker V`.
#[derive(Debug, Clone)]
pub struct KrylovCosineWorkspace {
    basis: Vec<Vec<f64>>,
    hessenberg: DenseMatrix,
    beta: f64,
}

impl KrylovCosineWorkspace {
    /// Runs at most `r` Arnoldi steps from `x0 ∈ ker B`, using Euclidean
    /// modified Gram–Schmidt with one reorthogonalization pass.
    pub fn build(tk: &OperatorToolkit<'_>, x0: &[f64], r: usize) -> Result<Self> {
        if r == 0 || r > MAX_SMALL_DIM {
            return Err(Error::InvalidConfig(alloc::format!(
                "Krylov dimension {r} outside 1..={MAX_SMALL_DIM}"
            )));
        }
        if !all_finite(x0) {
            return Err(Error::NonFinite("Krylov start vector"));
        }
        tk.check_in_kernel(x0)?;
        let beta = norm2(x0);
        if beta == 0.0 {
            return Ok(Self {
                basis: Vec::new(),
                hessenberg: DenseMatrix::zeros(0, 0),
                beta,
            });
        }

        let mut v1 = x0.to_vec();
        scale(1.0 / beta, &mut v1);
        let mut basis = vec![v1];
        let mut h = DenseMatrix::zeros(r + 1, r);
        let mut dim = r;
        for j in 0..r {
            let mut w = tk.aker_apply_unchecked(&basis[j])?;
            if !all_finite(&w) {
                return Err(Error::NonFinite("Krylov operator application"));
            }
            for _pass in 0..2 {
                for (i, vi) in basis.iter().enumerate() {
                    let hij = dot(vi, &w);
                    h[(i, j)] += hij;
                    axpy(-hij, vi, &mut w);
                }
            }
            if j + 1 == r {
                break;
            }
            let next = norm2(&w);
            let leading = DenseMatrix::from_fn(j + 1, j + 1, |a, b| h[(a, b)]);
            if next <= BREAKDOWN_TOLERANCE * leading.norm1() {
                dim = j + 1;
                break;
            }
            h[(j + 1, j)] = next;
            scale(1.0 / next, &mut w);
            basis.push(w);
        }
        basis.truncate(dim);
        let hessenberg = DenseMatrix::from_fn(dim, dim, |a, b| h[(a, b)]);
        Ok(Self {
            basis,
            hessenberg,
            beta,
        })
    }

    /// Dimension actually built (smaller than requested after breakdown).
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn hessenberg(&self) -> &DenseMatrix {
        &self.hessenberg
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `‖x₀‖ V cos(τ√H) e₁`
    pub fn cos_apply(&self, tau: f64) -> Result<Vec<f64>> {
        let n = self.basis.first().map_or(0, |v| v.len());
        if self.beta == 0.0 {
            return Ok(Vec::new());
        }
        let c = small_cosine(&self.hessenberg, tau)?;
        let mut out = vec![0.0; n];
        for (i, vi) in self.basis.iter().enumerate() {
            axpy(self.beta * c[(i, 0)], vi, &mut out);
        }
        Ok(out)
    }
}

/// Krylov approximation of `cos(τ Ω_ker) x₀` with an `r`-dimensional space.
pub fn krylov_cos_apply(
    tk: &OperatorToolkit<'_>,
    x0: &[f64],
    tau: f64,
    r: usize,
) -> Result<Vec<f64>> {
    if tau == 0.0 {
        tk.check_in_kernel(x0)?;
        return Ok(x0.to_vec());
    }
    let ws = KrylovCosineWorkspace::build(tk, x0, r)?;
    if ws.beta == 0.0 {
        return Ok(vec![0.0; x0.len()]);
    }
    ws.cos_apply(tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{SemiDiscreteDae, SparseMatrix};
    use core::f64::consts::PI;

    fn small() -> SemiDiscreteDae {
        let a = SparseMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let b = SparseMatrix::from_dense(&[vec![1.0, 0.0]]).unwrap();
        SemiDiscreteDae::builder(SparseMatrix::identity(2), a)
            .homogeneous_constraint(b)
            .build()
            .unwrap()
    }

    #[test]
    fn zero_step_is_identity() {
        let sys = small();
        let tk = OperatorToolkit::new(&sys).unwrap();
        assert_eq!(krylov_cos_apply(&tk, &[0.0, 0.7], 0.0, 1).unwrap(), vec![0.0, 0.7]);
    }

    #[test]
    fn one_dimensional_kernel() {
        let sys = small();
        let tk = OperatorToolkit::new(&sys).unwrap();
        let y = krylov_cos_apply(&tk, &[0.0, 1.0], PI, 1).unwrap();
        let expect = (PI * 2f64.sqrt()).cos();
        assert!((expect + 0.26625).abs() < 1e-5);
        assert!(y[0].abs() < 1e-15);
        assert!((y[1] - expect).abs() < 1e-13);
    }

    #[test]
    fn zero_start_vector() {
        let sys = small();
        let tk = OperatorToolkit::new(&sys).unwrap();
        assert_eq!(krylov_cos_apply(&tk, &[0.0, 0.0], 0.3, 1).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn rejects_vector_outside_kernel() {
        let sys = small();
        let tk = OperatorToolkit::new(&sys).unwrap();
        assert!(matches!(
            krylov_cos_apply(&tk, &[1.0, 0.0], 0.3, 1),
            Err(Error::NotInKernel { .. })
        ));
        assert!(matches!(
            krylov_cos_apply(&tk, &[0.0, f64::NAN], 0.3, 1),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn breakdown_on_invariant_subspace() {
        // x0 is an eigenvector of A = diag(1, 4, 9): the space stops at dimension 1
        let a = SparseMatrix::diagonal(&[1.0, 4.0, 9.0]).unwrap();
        let sys = SemiDiscreteDae::builder(SparseMatrix::identity(3), a).build().unwrap();
        let tk = OperatorToolkit::new(&sys).unwrap();
        let ws = KrylovCosineWorkspace::build(&tk, &[0.0, 2.0, 0.0], 3).unwrap();
        assert_eq!(ws.dim(), 1);
        let y = ws.cos_apply(0.4).unwrap();
        assert!((y[1] - 2.0 * (0.8f64).cos()).abs() < 1e-14);
    }

    #[test]
    fn basis_is_orthonormal_and_in_kernel() {
        let n = 8;
        let mut t = vec![];
        for i in 0..n {
            t.push((i, i, 2.0 + i as f64));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = SparseMatrix::from_triplets(n, n, &t).unwrap();
        let b = SparseMatrix::from_triplets(2, n, &[(0, 0, 1.0), (0, 3, 1.0), (1, 7, 1.0)]).unwrap();
        let mass = SparseMatrix::diagonal(&[1.0, 2.0, 1.0, 3.0, 1.0, 1.0, 2.0, 1.0]).unwrap();
        let sys = SemiDiscreteDae::builder(mass, a)
            .homogeneous_constraint(b.clone())
            .build()
            .unwrap();
        let tk = OperatorToolkit::new(&sys).unwrap();
        let x0 = [1.0, 0.5, -0.2, -1.0, 0.3, 0.1, 0.9, 0.0];
        let ws = KrylovCosineWorkspace::build(&tk, &x0, 5).unwrap();
        for (i, vi) in ws.basis().iter().enumerate() {
            assert!(norm2(&b.spmv(vi).unwrap()) < 1e-10);
            for (j, vj) in ws.basis().iter().enumerate() {
                let d = dot(vi, vj);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((d - expect).abs() < 1e-10);
            }
        }
        let h = ws.hessenberg();
        for i in 0..h.nrows() {
            for j in 0..h.ncols() {
                if i > j + 1 {
                    assert_eq!(h[(i, j)], 0.0);
                }
            }
        }
    }
}
