//! The semi-discrete constrained system and the operators acting on `ker B`.
//!
//! All kernel operators are realized by saddle-point solves, so no basis of
//! `ker B` is ever formed:
//!
//! | operator         | saddle problem                           |
//! |------------------|------------------------------------------|
//! | `B⁻ g`           | `A x + Bᵀμ = 0`,      `B x = g`          |
//! | `A_ker v`        | `M x + Bᵀμ = A v`,    `B x = 0`          |
//! | `A_ker⁻¹ r`      | `A b + Bᵀμ = r`,      `B b = 0`          |

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::linalg::vector::{norm2, sub};
use crate::linalg::{SaddleFactorization, SparseMatrix};

/// Load `f(t, x)`, returned in the dual pairing (i.e. already tested against
/// the basis, like `M ẍ`).
pub type LoadFn = Box<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;
/// Constraint data `t ↦ g(t)` or one of its derivatives.
pub type ConstraintFn = Box<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// Rank check of `B` is done on a dense copy up to this primal dimension.
pub const DENSE_RANK_CHECK_LIMIT: usize = 500;
const PROBE_COUNT: usize = 10;
const PROBE_SEED: u64 = 0x5eed_da3e;

/// `M x'' + D x' + A x + Bᵀλ = f(t, x)`, `B x = g(t)`.
pub struct SemiDiscreteDae {
    mass: SparseMatrix,
    damping: SparseMatrix,
    stiffness: SparseMatrix,
    constraint: SparseMatrix,
    load: LoadFn,
    g: ConstraintFn,
    gdot: ConstraintFn,
    gddot: ConstraintFn,
    horizon: f64,
}

impl core::fmt::Debug for SemiDiscreteDae {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("SemiDiscreteDae")
            .field("n", &self.n())
            .field("m", &self.m())
            .field("damped", &!self.is_damping_free())
            .field("horizon", &self.horizon)
            .finish_non_exhaustive()
    }
}

pub struct SemiDiscreteDaeBuilder {
    mass: SparseMatrix,
    stiffness: SparseMatrix,
    damping: Option<SparseMatrix>,
    constraint: Option<(SparseMatrix, ConstraintFn, ConstraintFn, ConstraintFn)>,
    load: Option<LoadFn>,
    horizon: f64,
}

impl SemiDiscreteDaeBuilder {
    pub fn damping(mut self, d: SparseMatrix) -> Self {
        self.damping = Some(d);
        self
    }

    /// Linear constraint `B x = g(t)` with the first two derivatives of `g`.
    pub fn constraint(
        mut self,
        b: SparseMatrix,
        g: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static,
        gdot: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static,
        gddot: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.constraint = Some((b, Box::new(g), Box::new(gdot), Box::new(gddot)));
        self
    }

    /// `B x = 0`.
    pub fn homogeneous_constraint(self, b: SparseMatrix) -> Self {
        let m = b.nrows();
        self.constraint(b, move |_| vec![0.0; m], move |_| vec![0.0; m], move |_| vec![0.0; m])
    }

    pub fn load(mut self, f: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.load = Some(Box::new(f));
        self
    }

    /// Largest time at which `g` and its derivatives may be evaluated.
    /// Defaults to unbounded.
    pub fn horizon(mut self, t_max: f64) -> Self {
        self.horizon = t_max;
        self
    }

    pub fn build(self) -> Result<SemiDiscreteDae> {
        let n = self.mass.nrows();
        let square = |mat: &SparseMatrix, what: &'static str| {
            if mat.nrows() != n || mat.ncols() != n {
                Err(Error::DimensionMismatch {
                    context: what,
                    expected: n,
                    found: if mat.nrows() != n { mat.nrows() } else { mat.ncols() },
                })
            } else {
                Ok(())
            }
        };
        square(&self.mass, "mass matrix")?;
        square(&self.stiffness, "stiffness matrix")?;
        let damping = self.damping.unwrap_or_else(|| SparseMatrix::zeros(n, n));
        square(&damping, "damping matrix")?;

        let (constraint, g, gdot, gddot) = match self.constraint {
            Some(c) => c,
            None => (
                SparseMatrix::zeros(0, n),
                Box::new(|_| Vec::new()) as ConstraintFn,
                Box::new(|_| Vec::new()) as ConstraintFn,
                Box::new(|_| Vec::new()) as ConstraintFn,
            ),
        };
        if constraint.ncols() != n {
            return Err(Error::DimensionMismatch {
                context: "constraint matrix columns",
                expected: n,
                found: constraint.ncols(),
            });
        }
        let load = self
            .load
            .unwrap_or_else(|| Box::new(move |_, _| vec![0.0; n]));

        let sys = SemiDiscreteDae {
            mass: self.mass,
            damping,
            stiffness: self.stiffness,
            constraint,
            load,
            g,
            gdot,
            gddot,
            horizon: self.horizon,
        };
        sys.validate()?;
        Ok(sys)
    }
}

impl SemiDiscreteDae {
    pub fn builder(mass: SparseMatrix, stiffness: SparseMatrix) -> SemiDiscreteDaeBuilder {
        SemiDiscreteDaeBuilder {
            mass,
            stiffness,
            damping: None,
            constraint: None,
            load: None,
            horizon: f64::INFINITY,
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.n();
        let m = self.m();
        if m > n {
            return Err(Error::InvalidSystem(format!(
                "{m} constraints for {n} unknowns"
            )));
        }
        if !self.mass.is_symmetric(1e-12) {
            return Err(Error::InvalidSystem("mass matrix is not symmetric".into()));
        }
        if n <= DENSE_RANK_CHECK_LIMIT && m > 0 {
            let rank = dense_rank(&self.constraint);
            if rank < m {
                return Err(Error::InvalidSystem(format!(
                    "constraint matrix has rank {rank} < {m}"
                )));
            }
        }

        let mut rng = SmallRng::seed_from_u64(PROBE_SEED);
        let mass_scale = self.mass.max_abs();
        for _ in 0..PROBE_COUNT {
            let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            let q = self.mass.quadratic_form(&x);
            if !(q > 1e-14 * mass_scale * crate::linalg::vector::dot(&x, &x)) {
                return Err(Error::InvalidSystem("mass matrix is not positive definite".into()));
            }
        }

        // ellipticity of A on ker B, probed with projected random vectors
        let projector = if m > 0 {
            Some(
                SaddleFactorization::new(&SparseMatrix::identity(n), &self.constraint).map_err(
                    |_| Error::InvalidSystem("constraint matrix is rank deficient".into()),
                )?,
            )
        } else {
            None
        };
        let stiff_scale = self.stiffness.max_abs();
        for _ in 0..PROBE_COUNT {
            let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            let z = match &projector {
                Some(p) => p.solve_kernel(&x)?.0,
                None => x,
            };
            let zz = crate::linalg::vector::dot(&z, &z);
            if zz == 0.0 {
                continue;
            }
            let q = self.stiffness.quadratic_form(&z);
            if !(q > 1e-14 * stiff_scale * zz) {
                return Err(Error::InvalidSystem(
                    "stiffness matrix is not positive on ker B".into(),
                ));
            }
        }
        Ok(())
    }

    /// Primal dimension.
    pub fn n(&self) -> usize {
        self.mass.nrows()
    }

    /// Number of constraints.
    pub fn m(&self) -> usize {
        self.constraint.nrows()
    }

    pub fn mass(&self) -> &SparseMatrix {
        &self.mass
    }

    pub fn damping(&self) -> &SparseMatrix {
        &self.damping
    }

    pub fn stiffness(&self) -> &SparseMatrix {
        &self.stiffness
    }

    pub fn constraint_matrix(&self) -> &SparseMatrix {
        &self.constraint
    }

    pub fn is_damping_free(&self) -> bool {
        self.damping.nnz() == 0
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn load(&self, t: f64, x: &[f64]) -> Vec<f64> {
        (self.load)(t, x)
    }

    pub fn g(&self, t: f64) -> Vec<f64> {
        (self.g)(t)
    }

    pub fn gdot(&self, t: f64) -> Vec<f64> {
        (self.gdot)(t)
    }

    pub fn gddot(&self, t: f64) -> Vec<f64> {
        (self.gddot)(t)
    }

    /// `‖B x − g(t)‖₂`
    pub fn constraint_residual(&self, x: &[f64], t: f64) -> Result<f64> {
        if self.m() == 0 {
            return Ok(0.0);
        }
        let bx = self.constraint.spmv(x)?;
        Ok(norm2(&sub(&bx, &self.g(t))))
    }

    pub fn check_consistency(&self, x0: &[f64], y0: &[f64], tol: f64) -> Result<ConsistencyReport> {
        for v in [x0, y0] {
            if v.len() != self.n() {
                return Err(Error::DimensionMismatch {
                    context: "initial value",
                    expected: self.n(),
                    found: v.len(),
                });
            }
        }
        let position = self.constraint_residual(x0, 0.0)?;
        let velocity = if self.m() == 0 {
            0.0
        } else {
            norm2(&sub(&self.constraint.spmv(y0)?, &self.gdot(0.0)))
        };
        Ok(ConsistencyReport {
            position_residual: position,
            velocity_residual: velocity,
            passed: position <= tol && velocity <= tol,
        })
    }
}

/// Free-function form of [`SemiDiscreteDae::check_consistency`].
pub fn check_consistency(
    sys: &SemiDiscreteDae,
    x0: &[f64],
    y0: &[f64],
    tol: f64,
) -> Result<ConsistencyReport> {
    sys.check_consistency(x0, y0, tol)
}

/// Free-function form of [`SemiDiscreteDae::constraint_residual`].
pub fn constraint_residual(sys: &SemiDiscreteDae, x: &[f64], t: f64) -> Result<f64> {
    sys.constraint_residual(x, t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyReport {
    /// `‖B x₀ − g(0)‖₂`
    pub position_residual: f64,
    /// `‖B y₀ − ġ(0)‖₂`
    pub velocity_residual: f64,
    pub passed: bool,
}

/// Gaussian elimination with partial pivoting on a dense copy.
fn dense_rank(b: &SparseMatrix) -> usize {
    let mut rows = b.to_dense();
    let (m, n) = (b.nrows(), b.ncols());
    let tol = 1e-12 * b.max_abs().max(f64::MIN_POSITIVE);
    let mut rank = 0;
    for col in 0..n {
        if rank == m {
            break;
        }
        let (piv, val) = (rank..m)
            .map(|i| (i, rows[i][col].abs()))
            .fold((rank, -1.0), |a, c| if c.1 > a.1 { c } else { a });
        if val <= tol {
            continue;
        }
        rows.swap(rank, piv);
        for i in rank + 1..m {
            let factor = rows[i][col] / rows[rank][col];
            if factor != 0.0 {
                for j in col..n {
                    rows[i][j] -= factor * rows[rank][j];
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Cached saddle-point factorizations for `K = A` and `K = M`.
#[derive(Debug)]
pub struct OperatorToolkit<'a> {
    sys: &'a SemiDiscreteDae,
    stiffness_saddle: SaddleFactorization,
    mass_saddle: SaddleFactorization,
}

impl<'a> OperatorToolkit<'a> {
    pub fn new(sys: &'a SemiDiscreteDae) -> Result<Self> {
        let b = sys.constraint_matrix();
        Ok(Self {
            sys,
            stiffness_saddle: SaddleFactorization::new(sys.stiffness(), b)?,
            mass_saddle: SaddleFactorization::new(sys.mass(), b)?,
        })
    }

    pub fn system(&self) -> &'a SemiDiscreteDae {
        self.sys
    }

    /// Factorization of `[[M, Bᵀ], [B, 0]]`.
    pub fn mass_saddle(&self) -> &SaddleFactorization {
        &self.mass_saddle
    }

    /// Factorization of `[[A, Bᵀ], [B, 0]]`.
    pub fn stiffness_saddle(&self) -> &SaddleFactorization {
        &self.stiffness_saddle
    }

    /// `B⁻ g`: the state with `B x = g` that is `A`-orthogonal to `ker B`.
    pub fn binv_apply(&self, gval: &[f64]) -> Result<Vec<f64>> {
        let zeros = vec![0.0; self.sys.n()];
        Ok(self.stiffness_saddle.solve(&zeros, gval)?.0)
    }

    /// `A_ker v` for `v ∈ ker B`.
    pub fn aker_apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_in_kernel(v)?;
        self.aker_apply_unchecked(v)
    }

    pub(crate) fn aker_apply_unchecked(&self, v: &[f64]) -> Result<Vec<f64>> {
        let av = self.sys.stiffness().spmv(v)?;
        Ok(self.mass_saddle.solve_kernel(&av)?.0)
    }

    /// `A_ker⁻¹ π_ker rhs` for a right-hand side in the dual pairing.
    pub fn aker_inv_apply(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        Ok(self.stiffness_saddle.solve_kernel(rhs)?.0)
    }

    /// `M a + Bᵀμ = rhs`, `B a = 0`.
    pub fn kernel_mass_solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        Ok(self.mass_saddle.solve_kernel(rhs)?.0)
    }

    pub(crate) fn check_in_kernel(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.sys.n() {
            return Err(Error::DimensionMismatch {
                context: "kernel vector",
                expected: self.sys.n(),
                found: v.len(),
            });
        }
        if self.sys.m() == 0 {
            return Ok(());
        }
        let residual = norm2(&self.sys.constraint_matrix().spmv(v)?);
        if residual > 1e-10 * norm2(v) {
            return Err(Error::NotInKernel { residual });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector::dot;
    use proptest::prelude::*;
    use rand::Rng;

    fn mat(rows: &[&[f64]]) -> SparseMatrix {
        SparseMatrix::from_dense(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn small_system() -> SemiDiscreteDae {
        SemiDiscreteDae::builder(SparseMatrix::identity(2), mat(&[&[2.0, 1.0], &[1.0, 2.0]]))
            .constraint(mat(&[&[1.0, 0.0]]), |_| vec![1.0], |_| vec![0.0], |_| vec![0.0])
            .build()
            .unwrap()
    }

    #[test]
    fn consistency_rest_state() {
        let sys = SemiDiscreteDae::builder(SparseMatrix::identity(2), SparseMatrix::identity(2))
            .homogeneous_constraint(mat(&[&[1.0, 0.0]]))
            .build()
            .unwrap();
        let r = sys.check_consistency(&[0.0, 0.0], &[0.0, 0.0], 0.0).unwrap();
        assert_eq!((r.position_residual, r.velocity_residual), (0.0, 0.0));
        assert!(r.passed);
    }

    #[test]
    fn consistency_examples() {
        let sys = small_system();
        let r = sys.check_consistency(&[1.0, 3.0], &[0.0, 0.0], 1e-8).unwrap();
        assert_eq!(r.position_residual, 0.0);
        let r = sys.check_consistency(&[0.0, 0.0], &[0.0, 0.0], 1e-8).unwrap();
        assert_eq!(r.position_residual, 1.0);
        assert!(!r.passed);
    }

    #[test]
    fn residual_unconstrained_is_zero() {
        let sys = SemiDiscreteDae::builder(SparseMatrix::identity(2), SparseMatrix::identity(2))
            .build()
            .unwrap();
        assert_eq!(sys.constraint_residual(&[5.0, -1.0], 0.3).unwrap(), 0.0);
    }

    #[test]
    fn residual_grows_linearly_along_range_of_bt() {
        let sys = small_system();
        let x = [1.0, 7.0];
        assert!(sys.constraint_residual(&x, 0.0).unwrap() < 1e-12);
        // direction Bᵀ e₁ = [1, 0]
        let r1 = sys.constraint_residual(&[1.0 + 1e-3, 7.0], 0.0).unwrap();
        let r2 = sys.constraint_residual(&[1.0 + 2e-3, 7.0], 0.0).unwrap();
        assert!((r1 - 1e-3).abs() < 1e-12);
        assert!((r2 / r1 - 2.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_rank_deficient_constraint() {
        let err = SemiDiscreteDae::builder(SparseMatrix::identity(2), SparseMatrix::identity(2))
            .homogeneous_constraint(mat(&[&[1.0, 1.0], &[2.0, 2.0]]))
            .build()
            .unwrap_err();
        assert!(matches!(err, Error::InvalidSystem(_)));
    }

    #[test]
    fn rejects_stiffness_singular_on_kernel() {
        // A = diag(1, 0) vanishes on ker B = span{e₂}
        let err = SemiDiscreteDae::builder(SparseMatrix::identity(2), mat(&[&[1.0, 0.0], &[0.0, 0.0]]))
            .homogeneous_constraint(mat(&[&[1.0, 0.0]]))
            .build()
            .unwrap_err();
        assert!(matches!(err, Error::InvalidSystem(_)));
        // stiffness singular off the kernel is fine
        SemiDiscreteDae::builder(SparseMatrix::identity(2), mat(&[&[0.0, 0.0], &[0.0, 1.0]]))
            .homogeneous_constraint(mat(&[&[1.0, 0.0]]))
            .build()
            .unwrap();
    }

    #[test]
    fn rejects_indefinite_mass() {
        let err = SemiDiscreteDae::builder(mat(&[&[1.0, 0.0], &[0.0, -1.0]]), SparseMatrix::identity(2))
            .build()
            .unwrap_err();
        assert!(matches!(err, Error::InvalidSystem(_)));
    }

    #[test]
    fn binv_examples() {
        let sys = small_system();
        let tk = OperatorToolkit::new(&sys).unwrap();
        assert_eq!(tk.binv_apply(&[0.0]).unwrap(), vec![0.0, 0.0]);
        let x = tk.binv_apply(&[1.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] + 0.5).abs() < 1e-14);
        let ax = sys.stiffness().spmv(&x).unwrap();
        assert!(dot(&[0.0, 1.0], &ax).abs() < 1e-14);
    }

    #[test]
    fn aker_examples() {
        let sys = small_system();
        let tk = OperatorToolkit::new(&sys).unwrap();
        assert_eq!(tk.aker_apply(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        let x = tk.aker_apply(&[0.0, 1.0]).unwrap();
        assert!(x[0].abs() < 1e-14 && (x[1] - 2.0).abs() < 1e-14);
        assert!(matches!(
            tk.aker_apply(&[1.0, 1.0]),
            Err(Error::NotInKernel { .. })
        ));
    }

    #[test]
    fn aker_unconstrained_is_multiplication() {
        let a = mat(&[&[3.0, 1.0, 0.0], &[1.0, 4.0, 1.0], &[0.0, 1.0, 5.0]]);
        let sys = SemiDiscreteDae::builder(SparseMatrix::identity(3), a.clone())
            .build()
            .unwrap();
        let tk = OperatorToolkit::new(&sys).unwrap();
        let v = [1.0, -2.0, 0.5];
        assert_eq!(tk.aker_apply(&v).unwrap(), a.spmv(&v).unwrap());
        let b = tk.aker_inv_apply(&v).unwrap();
        let ab = a.spmv(&b).unwrap();
        for i in 0..3 {
            assert!((ab[i] - v[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn aker_inv_examples() {
        let sys = small_system();
        let tk = OperatorToolkit::new(&sys).unwrap();
        assert_eq!(tk.aker_inv_apply(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        let b = tk.aker_inv_apply(&[0.0, 1.0]).unwrap();
        assert!(b[0].abs() < 1e-15 && (b[1] - 0.5).abs() < 1e-15);
    }

    struct RandomSystem {
        sys: SemiDiscreteDae,
        projector: SaddleFactorization,
    }

    fn random_system(seed: u64, n: usize, m: usize, identity_mass: bool) -> RandomSystem {
        let mut rng = SmallRng::seed_from_u64(seed);
        let spd = |rng: &mut SmallRng, shift: f64| {
            let g: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.random::<f64>() - 0.5).collect())
                .collect();
            let mut t = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    let v: f64 = (0..n).map(|k| g[i][k] * g[j][k]).sum();
                    t.push((i, j, v + if i == j { shift } else { 0.0 }));
                }
            }
            SparseMatrix::from_triplets(n, n, &t).unwrap()
        };
        let mass = if identity_mass {
            SparseMatrix::identity(n)
        } else {
            spd(&mut rng, 1.0)
        };
        let stiff = spd(&mut rng, 0.5);
        let mut t = Vec::new();
        for i in 0..m {
            for j in 0..n {
                t.push((i, j, rng.random::<f64>() - 0.5));
            }
        }
        let b = SparseMatrix::from_triplets(m, n, &t).unwrap();
        let projector = SaddleFactorization::new(&SparseMatrix::identity(n), &b).unwrap();
        let sys = SemiDiscreteDae::builder(mass, stiff)
            .homogeneous_constraint(b)
            .build()
            .unwrap();
        RandomSystem { sys, projector }
    }

    impl RandomSystem {
        fn kernel_vector(&self, rng: &mut SmallRng) -> Vec<f64> {
            let x: Vec<f64> = (0..self.sys.n()).map(|_| rng.random::<f64>() - 0.5).collect();
            self.projector.solve_kernel(&x).unwrap().0
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn kernel_operator_invariants(seed in 0u64..5000, n in 2usize..10, mfrac in 0.0f64..0.7) {
            let m = ((n as f64) * mfrac) as usize;
            let rs = random_system(seed, n, m, false);
            let sys = &rs.sys;
            let tk = OperatorToolkit::new(sys).unwrap();
            let mut rng = SmallRng::seed_from_u64(seed ^ 0xabc);
            let anorm = sys.stiffness().norm_inf();

            let gval: Vec<f64> = (0..m).map(|_| rng.random::<f64>() - 0.5).collect();
            let c = tk.binv_apply(&gval).unwrap();
            let bc = sys.constraint_matrix().spmv(&c).unwrap();
            prop_assert!(norm2(&sub(&bc, &gval)) <= 1e-10 * (1.0 + norm2(&gval)));
            let ac = sys.stiffness().spmv(&c).unwrap();
            for _ in 0..10 {
                let w = rs.kernel_vector(&mut rng);
                prop_assert!(dot(&w, &ac).abs() <= 1e-9 * norm2(&w) * norm2(&gval) * anorm + 1e-14);
            }

            let v = rs.kernel_vector(&mut rng);
            let w = rs.kernel_vector(&mut rng);
            let av = tk.aker_apply(&v).unwrap();
            let aw = tk.aker_apply(&w).unwrap();
            let bav = sys.constraint_matrix().spmv(&av).unwrap();
            prop_assert!(norm2(&bav) <= 1e-10 * norm2(&av) + 1e-15);
            // wᵀ M A_ker v = wᵀ A v, symmetric in v and w
            let lhs = dot(&v, &sys.mass().spmv(&aw).unwrap());
            let rhs = dot(&w, &sys.mass().spmv(&av).unwrap());
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (lhs.abs() + rhs.abs() + 1e-12));
            let direct = dot(&w, &sys.stiffness().spmv(&v).unwrap());
            prop_assert!((rhs - direct).abs() <= 1e-9 * (direct.abs() + 1e-12));

            // A_ker⁻¹ M A_ker v = v on ker B
            let mv = sys.mass().spmv(&av).unwrap();
            let back = tk.aker_inv_apply(&mv).unwrap();
            prop_assert!(norm2(&sub(&back, &v)) <= 1e-10 * norm2(&v) * 1e2);
        }

        #[test]
        fn identity_mass_round_trip(seed in 0u64..5000, n in 2usize..10, mfrac in 0.0f64..0.7) {
            let m = ((n as f64) * mfrac) as usize;
            let rs = random_system(seed, n, m, true);
            let tk = OperatorToolkit::new(&rs.sys).unwrap();
            let mut rng = SmallRng::seed_from_u64(seed);
            let v = rs.kernel_vector(&mut rng);
            let back = tk.aker_inv_apply(&tk.aker_apply(&v).unwrap()).unwrap();
            prop_assert!(norm2(&sub(&back, &v)) <= 1e-10 * norm2(&v).max(1.0));
        }
    }
}
