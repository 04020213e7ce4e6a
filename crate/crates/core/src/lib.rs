//! Time integration of constrained second-order systems
//!
//! ```text
//! M x'' + D x' + A x + Bᵀ λ = f(t, x)
//!                       B x = g(t)
//! ```
//!
//! The crate provides an implicit–explicit Crank–Nicolson scheme (three-substep
//! and damping-free two-step forms), an IMEX Euler baseline and a Gautschi-type
//! exponential integrator whose matrix cosine is approximated in a Krylov
//! space of the constrained stiffness operator. All operators restricted to
//! `ker B` are applied through saddle-point solves, so the kernel of `B` is
//! never formed.
//!
//! The [`fem`] module assembles the P1 benchmark of a wave equation with
//! kinetic boundary conditions on the unit disc.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod dae;
mod error;
pub mod fem;
pub mod integrators;
pub mod linalg;
#[cfg(any(test, feature = "oracle"))]
pub mod oracle;

pub use dae::{ConsistencyReport, OperatorToolkit, SemiDiscreteDae, SemiDiscreteDaeBuilder};
pub use error::{Error, Result};
pub use integrators::{integrate, FirstStep, Integrator, IntegratorConfig, Scheme, StepperState, Trajectory};

pub use linalg::{DenseMatrix, SaddleFactorization, SparseMatrix};
