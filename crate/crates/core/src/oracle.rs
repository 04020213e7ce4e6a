//! Dense reference implementations used to cross-check the sparse,
//! saddle-point based operators. Only meant for small systems.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::dae::SemiDiscreteDae;
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, SparseMatrix};

/// Largest primal dimension the dense oracle accepts.
pub const MAX_ORACLE_DIM: usize = 200;

const JACOBI_SWEEPS: usize = 100;

/// Full orthogonal factor `Q` of the Householder QR of the `n × m` matrix `a`.
fn householder_q(a: &DenseMatrix) -> DenseMatrix {
    let (n, m) = (a.nrows(), a.ncols());
    let mut r = a.clone();
    let mut q = DenseMatrix::identity(n);
    for k in 0..m.min(n) {
        let norm = libm::sqrt((k..n).map(|i| r[(i, k)] * r[(i, k)]).sum());
        if norm == 0.0 {
            continue;
        }
        let alpha = if r[(k, k)] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (0..n).map(|i| if i < k { 0.0 } else { r[(i, k)] }).collect();
        v[k] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // r ← (I − 2vvᵀ/vᵀv) r,  q ← q (I − 2vvᵀ/vᵀv)
        for j in 0..m {
            let s: f64 = (k..n).map(|i| v[i] * r[(i, j)]).sum::<f64>() * 2.0 / vnorm2;
            for i in k..n {
                r[(i, j)] -= s * v[i];
            }
        }
        for i in 0..n {
            let s: f64 = (k..n).map(|j| q[(i, j)] * v[j]).sum::<f64>() * 2.0 / vnorm2;
            for j in k..n {
                q[(i, j)] -= s * v[j];
            }
        }
    }
    q
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
fn cholesky(a: &DenseMatrix) -> Result<DenseMatrix> {
    let n = a.nrows();
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let d = a[(j, j)] - (0..j).map(|k| l[(j, k)] * l[(j, k)]).sum::<f64>();
        if !(d > 0.0) {
            return Err(Error::InvalidSystem(format!(
                "kernel mass matrix is not positive definite (pivot {j}: {d:e})"
            )));
        }
        let djj = libm::sqrt(d);
        l[(j, j)] = djj;
        for i in j + 1..n {
            let s = a[(i, j)] - (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum::<f64>();
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Inverse of a lower triangular matrix.
fn lower_inverse(l: &DenseMatrix) -> DenseMatrix {
    let n = l.nrows();
    let mut inv = DenseMatrix::zeros(n, n);
    for col in 0..n {
        for i in col..n {
            let rhs = if i == col { 1.0 } else { 0.0 };
            let s: f64 = (col..i).map(|k| l[(i, k)] * inv[(k, col)]).sum();
            inv[(i, col)] = (rhs - s) / l[(i, i)];
        }
    }
    inv
}

/// Cyclic Jacobi eigen-decomposition `S = Q diag(λ) Qᵀ` of a symmetric matrix.
fn jacobi_eigen(s: &DenseMatrix) -> (Vec<f64>, DenseMatrix) {
    let n = s.nrows();
    let mut a = s.clone();
    let mut q = DenseMatrix::identity(n);
    let scale = a.norm1().max(f64::MIN_POSITIVE);
    for _ in 0..JACOBI_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if libm::sqrt(off) <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for r in p + 1..n {
                let apr = a[(p, r)];
                if apr.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[(r, r)] - a[(p, p)]) / (2.0 * apr);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let sn = t * c;
                for k in 0..n {
                    let (akp, akr) = (a[(k, p)], a[(k, r)]);
                    a[(k, p)] = c * akp - sn * akr;
                    a[(k, r)] = sn * akp + c * akr;
                }
                for k in 0..n {
                    let (apk, ark) = (a[(p, k)], a[(r, k)]);
                    a[(p, k)] = c * apk - sn * ark;
                    a[(r, k)] = sn * apk + c * ark;
                }
                for k in 0..n {
                    let (qkp, qkr) = (q[(k, p)], q[(k, r)]);
                    q[(k, p)] = c * qkp - sn * qkr;
                    q[(k, r)] = sn * qkp + c * qkr;
                }
            }
        }
    }
    ((0..n).map(|i| a[(i, i)]).collect(), q)
}

fn dense(s: &SparseMatrix) -> DenseMatrix {
    DenseMatrix::from_fn(s.nrows(), s.ncols(), |i, j| s.get(i, j))
}

/// Spectral data of the pencil `(ZᵀAZ, ZᵀMZ)` on an orthonormal basis `Z` of
/// `ker B`.
#[derive(Debug, Clone)]
pub struct KernelSpectrum {
    basis: DenseMatrix,
    eigenvalues: Vec<f64>,
    /// `L⁻ᵀ Q`: columns are `ZᵀMZ`-orthonormal eigenvectors.
    to_coords: DenseMatrix,
    /// `Qᵀ Lᵀ Mz⁻¹ Zᵀ M = Qᵀ L⁻¹ Zᵀ M`: maps a state to eigen-coordinates.
    from_state: DenseMatrix,
}

impl KernelSpectrum {
    pub fn new(sys: &SemiDiscreteDae) -> Result<Self> {
        let (n, m) = (sys.n(), sys.m());
        if n > MAX_ORACLE_DIM {
            return Err(Error::InvalidConfig(format!(
                "dense oracle limited to n <= {MAX_ORACLE_DIM}, got {n}"
            )));
        }
        let bt = dense(sys.constraint_matrix()).transpose();
        let q = householder_q(&if m == 0 { DenseMatrix::zeros(n, 0) } else { bt });
        let z = DenseMatrix::from_fn(n, n - m, |i, j| q[(i, j + m)]);
        let (mass, stiff) = (dense(sys.mass()), dense(sys.stiffness()));
        let zt = z.transpose();
        let mz = zt.matmul(&mass).matmul(&z);
        let kz = zt.matmul(&stiff).matmul(&z);
        let l = cholesky(&mz)?;
        let li = lower_inverse(&l);
        let s = li.matmul(&kz).matmul(&li.transpose());
        let s = s.combine(0.5, &s.transpose(), 0.5);
        let (eigenvalues, qs) = jacobi_eigen(&s);
        let to_coords = li.transpose().matmul(&qs);
        let from_state = qs.transpose().matmul(&li).matmul(&zt).matmul(&mass);
        Ok(Self {
            basis: z,
            eigenvalues,
            to_coords,
            from_state,
        })
    }

    /// Orthonormal basis of `ker B`, one column per kernel direction.
    pub fn kernel_basis(&self) -> &DenseMatrix {
        &self.basis
    }

    /// Eigenvalues of `A_ker`, i.e. the squared kernel frequencies.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `Z W φ(Λ) W⁻¹ (ZᵀMZ)⁻¹ ZᵀM` for a spectral function `φ`.
    pub fn apply_function(&self, phi: impl Fn(f64) -> f64) -> DenseMatrix {
        let d = self.eigenvalues.len();
        let mut scaled = self.from_state.clone();
        for i in 0..d {
            let f = phi(self.eigenvalues[i]);
            for j in 0..scaled.ncols() {
                scaled[(i, j)] *= f;
            }
        }
        self.basis.matmul(&self.to_coords).matmul(&scaled)
    }

    /// `cos(τ Ω_ker)` on `ker B`, zero on the `M`-orthogonal complement.
    pub fn cos(&self, tau: f64) -> DenseMatrix {
        self.apply_function(|lam| libm::cos(tau * libm::sqrt(lam.max(0.0))))
    }

    /// `M`-orthogonal projector onto `ker B`.
    pub fn projector(&self) -> DenseMatrix {
        self.apply_function(|_| 1.0)
    }
}

/// Dense `cos(τ Ω_ker)` as an `n × n` operator.
pub fn dense_cos_ker(sys: &SemiDiscreteDae, tau: f64) -> Result<DenseMatrix> {
    Ok(KernelSpectrum::new(sys)?.cos(tau))
}

/// `X_k` of the recursion `X₀ = P`, `X₁ = 2C`, `X_k = 2C X_{k−1} − X_{k−2}`
/// with `C = cos(τ Ω_ker)` and `P` the kernel projector.
pub fn chebyshev_recursion(spec: &KernelSpectrum, tau: f64, k_max: usize) -> Vec<DenseMatrix> {
    let c = spec.cos(tau);
    let mut xs = vec![spec.projector(), c.scaled(2.0)];
    for k in 2..=k_max {
        let next = c.matmul(&xs[k - 1]).combine(2.0, &xs[k - 2], -1.0);
        xs.push(next);
    }
    xs.truncate(k_max + 1);
    xs
}

/// Closed form of `X_k`: `P + 2 Σ_{j=1}^{k/2} cos(2jτΩ)` for even `k`,
/// `2 Σ_{j=1}^{(k+1)/2} cos((2j−1)τΩ)` for odd `k`.
pub fn chebyshev_closed_form(spec: &KernelSpectrum, tau: f64, k: usize) -> DenseMatrix {
    spec.apply_function(|lam| {
        let w = libm::sqrt(lam.max(0.0));
        if k % 2 == 0 {
            1.0 + (1..=k / 2).map(|j| 2.0 * libm::cos(2.0 * j as f64 * tau * w)).sum::<f64>()
        } else {
            (1..=(k + 1) / 2)
                .map(|j| 2.0 * libm::cos((2 * j - 1) as f64 * tau * w))
                .sum::<f64>()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn diagonal_unconstrained() {
        let sys = SemiDiscreteDae::builder(
            SparseMatrix::identity(2),
            SparseMatrix::diagonal(&[1.0, 4.0]).unwrap(),
        )
        .build()
        .unwrap();
        let c = dense_cos_ker(&sys, PI).unwrap();
        let expect = DenseMatrix::from_rows(&[vec![-1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(c.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn zero_step_is_kernel_projector() {
        let b = SparseMatrix::from_triplets(1, 3, &[(0, 0, 1.0), (0, 2, 1.0)]).unwrap();
        let sys = SemiDiscreteDae::builder(
            SparseMatrix::diagonal(&[1.0, 2.0, 3.0]).unwrap(),
            SparseMatrix::diagonal(&[2.0, 1.0, 5.0]).unwrap(),
        )
        .homogeneous_constraint(b)
        .build()
        .unwrap();
        let spec = KernelSpectrum::new(&sys).unwrap();
        let p = spec.cos(0.0);
        assert!(p.max_abs_diff(&p.matmul(&p)) < 1e-13);
        let v = [1.0, 0.3, -1.0];
        let pv = p.mul_vec(&v);
        assert!(pv.iter().zip(&v).all(|(a, b)| (a - b).abs() < 1e-13));
    }
}
