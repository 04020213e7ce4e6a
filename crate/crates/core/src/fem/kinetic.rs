//! Wave equation with kinetic boundary conditions,
//!
//! ```text
//! ü − Δu + u = sin t                 in Ω
//! p̈ − Δ_Γ p + ∂ₙu = p − p³          on Γ,   p = u|_Γ
//! ```
//!
//! written as a constrained system in `x = [u; p]` with `B = [−T, I]`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::str::FromStr;

use super::assembly::{assemble_boundary, assemble_domain};
use super::mesh::Mesh;
use crate::dae::SemiDiscreteDae;
use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;

/// Assembled blocks of the kinetic problem.
#[derive(Debug, Clone)]
pub struct FemBlocks {
    pub m_dom: SparseMatrix,
    pub a_dom: SparseMatrix,
    pub m_bnd: SparseMatrix,
    pub a_bnd: SparseMatrix,
    /// `m × n_u` selector of the boundary nodes, in boundary-loop order.
    pub trace: SparseMatrix,
}

impl FemBlocks {
    pub fn assemble(mesh: &Mesh) -> Result<Self> {
        let (m_dom, a_dom) = assemble_domain(mesh)?;
        let (m_bnd, a_bnd) = assemble_boundary(mesh)?;
        let lp = mesh.boundary_loop();
        let t: Vec<_> = lp.iter().enumerate().map(|(i, &v)| (i, v, 1.0)).collect();
        let trace = SparseMatrix::from_triplets(lp.len(), mesh.node_count(), &t)?;
        Ok(Self {
            m_dom,
            a_dom,
            m_bnd,
            a_bnd,
            trace,
        })
    }

    /// Number of domain unknowns.
    pub fn n_u(&self) -> usize {
        self.m_dom.nrows()
    }

    /// Number of boundary unknowns, equal to the number of constraints.
    pub fn m(&self) -> usize {
        self.m_bnd.nrows()
    }

    /// Total dimension `n_u + m`.
    pub fn n(&self) -> usize {
        self.n_u() + self.m()
    }

    /// `diag(top, bottom)`
    fn block_diag(top: &SparseMatrix, bottom: &SparseMatrix) -> Result<SparseMatrix> {
        let (nu, n) = (top.nrows(), top.nrows() + bottom.nrows());
        let mut t: Vec<_> = top.triplets().collect();
        t.extend(bottom.triplets().map(|(i, j, v)| (i + nu, j + nu, v)));
        SparseMatrix::from_triplets(n, n, &t)
    }

    /// `B = [−T, I]`
    pub fn constraint_matrix(&self) -> Result<SparseMatrix> {
        let nu = self.n_u();
        let mut t: Vec<_> = self.trace.triplets().map(|(i, j, v)| (i, j, -v)).collect();
        t.extend((0..self.m()).map(|i| (i, nu + i, 1.0)));
        SparseMatrix::from_triplets(self.m(), self.n(), &t)
    }

    pub fn mass(&self) -> Result<SparseMatrix> {
        Self::block_diag(&self.m_dom, &self.m_bnd)
    }

    pub fn stiffness(&self) -> Result<SparseMatrix> {
        Self::block_diag(&self.a_dom, &self.a_bnd)
    }

    /// The damping-free benchmark system with `g ≡ 0` and load
    /// `[sin t · M_dom 1; M_bnd (p − p³)]`.
    pub fn kinetic_dae(&self) -> Result<SemiDiscreteDae> {
        let nu = self.n_u();
        let domain_load = self.m_dom.spmv(&vec![1.0; nu])?;
        let m_bnd = self.m_bnd.clone();
        SemiDiscreteDae::builder(self.mass()?, self.stiffness()?)
            .homogeneous_constraint(self.constraint_matrix()?)
            .load(move |t, x| {
                let s = libm::sin(t);
                let mut f: Vec<f64> = domain_load.iter().map(|v| s * v).collect();
                let nodal: Vec<f64> = x[nu..].iter().map(|p| p - p * p * p).collect();
                f.resize(x.len(), 0.0);
                m_bnd.mul_vec_into(&nodal, &mut f[nu..]);
                f
            })
            .build()
    }

    /// Discrete norm of a u-block vector.
    pub fn error_norm(&self, e: &[f64], kind: Norm) -> Result<f64> {
        if e.len() != self.n_u() {
            return Err(Error::DimensionMismatch {
                context: "u-block error vector",
                expected: self.n_u(),
                found: e.len(),
            });
        }
        let q = match kind {
            Norm::L2 => self.m_dom.quadratic_form(e),
            Norm::H1 => self.a_dom.quadratic_form(e),
        };
        Ok(libm::sqrt(q.max(0.0)))
    }
}

/// Assembles the benchmark on `mesh`.
pub fn build_kinetic_dae(mesh: &Mesh) -> Result<SemiDiscreteDae> {
    FemBlocks::assemble(mesh)?.kinetic_dae()
}

/// Free-function form of [`FemBlocks::error_norm`].
pub fn error_norm(blocks: &FemBlocks, e: &[f64], kind: Norm) -> Result<f64> {
    blocks.error_norm(e, kind)
}

/// Initial displacement of the benchmark.
pub fn gaussian_pulse(x: f64, y: f64) -> f64 {
    libm::exp(-20.0 * ((x - 1.0) * (x - 1.0) + y * y))
}

/// `x₀ = [u⁰; T u⁰]` with `u⁰` the nodal interpolant of the Gaussian pulse,
/// `y₀ = 0`.
pub fn initial_condition(mesh: &Mesh) -> (Vec<f64>, Vec<f64>) {
    let mut x0: Vec<f64> = mesh.nodes().iter().map(|&[x, y]| gaussian_pulse(x, y)).collect();
    let trace: Vec<f64> = mesh.boundary_loop().iter().map(|&v| x0[v]).collect();
    x0.extend(trace);
    let y0 = vec![0.0; x0.len()];
    (x0, y0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Norm {
    /// `√(eᵀ M_dom e)`
    L2,
    /// `√(eᵀ A_dom e)`, which includes the L² part.
    H1,
}

impl Norm {
    pub fn name(self) -> &'static str {
        match self {
            Norm::L2 => "l2",
            Norm::H1 => "h1",
        }
    }
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "l2" => Ok(Norm::L2),
            "h1" => Ok(Norm::H1),
            other => Err(Error::InvalidConfig(format!("unknown norm `{other}`"))),
        }
    }
}
