//! Implicit–explicit schemes: the load is always evaluated at known states,
//! so each step is a fixed number of linear saddle-point solves.

use alloc::vec::Vec;

use super::StepperState;
use crate::dae::{OperatorToolkit, SemiDiscreteDae};
use crate::error::{Error, Result};
use crate::linalg::vector::{axpy, scale, sub};
use crate::linalg::{SaddleFactorization, SparseMatrix};

fn require_velocity(state: &StepperState) -> Result<&[f64]> {
    state
        .w
        .as_deref()
        .ok_or(Error::SchemeNotApplicable("one-step scheme needs a velocity"))
}

/// Backward Euler for the linear part, load taken at `t_n`.
///
/// With `w^{n+1} = (u^{n+1} − u^n)/τ` eliminated, each step solves
/// `(M + τD + τ²A) u^{n+1} + τ²Bᵀλ = M u^n + τ M w^n + τ D u^n + τ² f(t_n, u^n)`
/// with `B u^{n+1} = g(t_{n+1})`.
#[derive(Debug)]
pub struct ImexEuler {
    tau: f64,
    saddle: SaddleFactorization,
}

impl ImexEuler {
    pub fn new(sys: &SemiDiscreteDae, tau: f64) -> Result<Self> {
        let k = SparseMatrix::linear_combination(&[
            (1.0, sys.mass()),
            (tau, sys.damping()),
            (tau * tau, sys.stiffness()),
        ])?;
        Ok(Self {
            tau,
            saddle: SaddleFactorization::new(&k, sys.constraint_matrix())?,
        })
    }

    pub fn step(&self, sys: &SemiDiscreteDae, state: &mut StepperState) -> Result<()> {
        let tau = self.tau;
        let t = state.step as f64 * tau;
        let u = &state.u;
        let w = require_velocity(state)?;

        let mut pos = u.clone();
        axpy(tau, w, &mut pos);
        let mut rhs = sys.mass().spmv(&pos)?;
        sys.damping().mul_vec_add(tau, u, &mut rhs);
        axpy(tau * tau, &sys.load(t, u), &mut rhs);
        let (u_next, mut mult) = self.saddle.solve(&rhs, &sys.g(t + tau))?;

        let mut w_next = sub(&u_next, u);
        scale(1.0 / tau, &mut w_next);
        scale(1.0 / (tau * tau), &mut mult);
        state.u = u_next;
        state.w = Some(w_next);
        state.multiplier = mult;
        state.step += 1;
        Ok(())
    }
}

/// Three-substep IMEX Crank–Nicolson scheme.
///
/// 1. `(M + τ/2 D + τ²/4 A) w^{n+½} + Bᵀλ̂ = M w^n − τ/2 A u^n + τ/2 f^n`,
///    `B w^{n+½} = (g^{n+1} − g^n)/τ`
/// 2. `u^{n+1} = u^n + τ w^{n+½}`
/// 3. `M w^{n+1} + Bᵀμ = M(2w^{n+½} − w^n) + τ/2 (f^{n+1} − f^n)`,
///    `B w^{n+1} = (g^{n+3/2} − g^{n+½})/τ`
///
/// The multiplier of substep 1 is solved for in the scaled form `λ̂ = τ/2 λ`.
#[derive(Debug)]
pub struct ImexCn {
    tau: f64,
    half_step: SaddleFactorization,
}

impl ImexCn {
    pub fn new(sys: &SemiDiscreteDae, tau: f64) -> Result<Self> {
        let k = SparseMatrix::linear_combination(&[
            (1.0, sys.mass()),
            (0.5 * tau, sys.damping()),
            (0.25 * tau * tau, sys.stiffness()),
        ])?;
        Ok(Self {
            tau,
            half_step: SaddleFactorization::new(&k, sys.constraint_matrix())?,
        })
    }

    pub fn step(&self, tk: &OperatorToolkit<'_>, state: &mut StepperState) -> Result<()> {
        let sys = tk.system();
        let tau = self.tau;
        let t = state.step as f64 * tau;
        let u = &state.u;
        let w = require_velocity(state)?;

        let f_now = sys.load(t, u);
        let mut rhs = sys.mass().spmv(w)?;
        sys.stiffness().mul_vec_add(-0.5 * tau, u, &mut rhs);
        axpy(0.5 * tau, &f_now, &mut rhs);
        let mut dg = sub(&sys.g(t + tau), &sys.g(t));
        scale(1.0 / tau, &mut dg);
        let (w_half, mut lambda) = self.half_step.solve(&rhs, &dg)?;
        scale(2.0 / tau, &mut lambda);

        let mut u_next = u.clone();
        axpy(tau, &w_half, &mut u_next);

        let f_next = sys.load(t + tau, &u_next);
        let mut vel = w_half.clone();
        scale(2.0, &mut vel);
        axpy(-1.0, w, &mut vel);
        let mut rhs = sys.mass().spmv(&vel)?;
        axpy(0.5 * tau, &f_next, &mut rhs);
        axpy(-0.5 * tau, &f_now, &mut rhs);
        let mut dg = sub(&sys.g(t + 1.5 * tau), &sys.g(t + 0.5 * tau));
        scale(1.0 / tau, &mut dg);
        let (w_next, _mu) = tk.mass_saddle().solve(&rhs, &dg)?;

        state.u = u_next;
        state.w = Some(w_next);
        state.multiplier = lambda;
        state.step += 1;
        Ok(())
    }
}

/// Damping-free two-step form of [`ImexCn`]:
///
/// `(M + τ²/4 A) u^{n+1} + Bᵀλ̃ = M(2u^n − u^{n−1}) − τ²/4 A(2u^n + u^{n−1}) + τ² f^n`,
/// `B u^{n+1} = g^{n+1}`, started by
/// `(M + τ²/4 A) u¹ + Bᵀλ̃ = M(u⁰ + τw⁰) − τ²/4 A u⁰ + τ²/2 f⁰`.
#[derive(Debug)]
pub struct ImexCnTwoStep {
    tau: f64,
    saddle: SaddleFactorization,
}

impl ImexCnTwoStep {
    pub fn new(sys: &SemiDiscreteDae, tau: f64) -> Result<Self> {
        if !sys.is_damping_free() {
            return Err(Error::SchemeNotApplicable(
                "the two-step IMEX scheme requires D = 0",
            ));
        }
        let k = SparseMatrix::linear_combination(&[
            (1.0, sys.mass()),
            (0.25 * tau * tau, sys.stiffness()),
        ])?;
        Ok(Self {
            tau,
            saddle: SaddleFactorization::new(&k, sys.constraint_matrix())?,
        })
    }

    /// First step from `(u⁰, w⁰)`; returns `u¹` and the multiplier.
    pub fn start(
        &self,
        sys: &SemiDiscreteDae,
        u0: &[f64],
        w0: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let tau = self.tau;
        let mut pos = u0.to_vec();
        axpy(tau, w0, &mut pos);
        let mut rhs = sys.mass().spmv(&pos)?;
        sys.stiffness().mul_vec_add(-0.25 * tau * tau, u0, &mut rhs);
        axpy(0.5 * tau * tau, &sys.load(0.0, u0), &mut rhs);
        self.saddle.solve(&rhs, &sys.g(tau))
    }

    pub fn step(&self, sys: &SemiDiscreteDae, state: &mut StepperState) -> Result<()> {
        let tau = self.tau;
        let t = state.step as f64 * tau;
        let u = &state.u;
        let u_prev = state
            .u_prev
            .as_deref()
            .ok_or(Error::SchemeNotApplicable("two-step scheme needs u^{n-1}"))?;

        let mut lin = u.clone();
        scale(2.0, &mut lin);
        axpy(-1.0, u_prev, &mut lin);
        let mut rhs = sys.mass().spmv(&lin)?;
        let mut sum = u.clone();
        scale(2.0, &mut sum);
        axpy(1.0, u_prev, &mut sum);
        sys.stiffness().mul_vec_add(-0.25 * tau * tau, &sum, &mut rhs);
        axpy(tau * tau, &sys.load(t, u), &mut rhs);
        let (u_next, mult) = self.saddle.solve(&rhs, &sys.g(t + tau))?;

        state.u_prev = Some(core::mem::replace(&mut state.u, u_next));
        state.w = None;
        state.multiplier = mult;
        state.step += 1;
        Ok(())
    }
}
