//! Gautschi-type two-step integrator for damping-free constrained systems.
//!
//! With `c^n = B⁻g^n` and `b^n = A_ker⁻¹ π_ker [f(t_n, u^n) − M B⁻g̈^n]`,
//!
//! ```text
//! u^{n+1} = c^{n+1} − (u^{n−1} − c^{n−1}) + 2 cos(τΩ_ker)(u^n − c^n − b^n) + 2 b^n
//! ```
//!
//! The cosine is applied through [`krylov_cos_apply`].

use alloc::vec::Vec;

use super::krylov::krylov_cos_apply;
use super::StepperState;
use crate::dae::OperatorToolkit;
use crate::error::{Error, Result};
use crate::linalg::vector::{axpy, sub};

#[derive(Debug, Clone)]
pub struct Gautschi {
    tau: f64,
    krylov_dim: usize,
}

impl Gautschi {
    pub fn new(tk: &OperatorToolkit<'_>, tau: f64, krylov_dim: usize) -> Result<Self> {
        if !tk.system().is_damping_free() {
            return Err(Error::SchemeNotApplicable(
                "the Gautschi-type integrator requires D = 0",
            ));
        }
        if krylov_dim == 0 {
            return Err(Error::InvalidConfig("Krylov dimension must be >= 1".into()));
        }
        Ok(Self { tau, krylov_dim })
    }

    pub fn krylov_dim(&self) -> usize {
        self.krylov_dim
    }

    /// Second-order Taylor start
    /// `u¹ = c¹ + (u⁰ − c⁰) + τ (w⁰ − B⁻ġ⁰) + τ²/2 a`, where
    /// `M a + Bᵀμ = f(0, u⁰) − A(u⁰ − c⁰)`, `B a = 0`.
    pub fn first_step(&self, tk: &OperatorToolkit<'_>, u0: &[f64], w0: &[f64]) -> Result<Vec<f64>> {
        let sys = tk.system();
        let tau = self.tau;
        let c0 = tk.binv_apply(&sys.g(0.0))?;
        let c1 = tk.binv_apply(&sys.g(tau))?;
        let w_ker = sub(w0, &tk.binv_apply(&sys.gdot(0.0))?);
        let u_ker = sub(u0, &c0);

        let mut force = sys.load(0.0, u0);
        sys.stiffness().mul_vec_add(-1.0, &u_ker, &mut force);
        let accel = tk.kernel_mass_solve(&force)?;

        let mut u1 = c1;
        axpy(1.0, &u_ker, &mut u1);
        axpy(tau, &w_ker, &mut u1);
        axpy(0.5 * tau * tau, &accel, &mut u1);
        Ok(u1)
    }

    /// Fills the complementary parts `c^{n−1}, c^n` for a state at step `n ≥ 1`.
    pub fn prime_state(&self, tk: &OperatorToolkit<'_>, state: &mut StepperState) -> Result<()> {
        let sys = tk.system();
        let t = state.step as f64 * self.tau;
        state.complement_prev = Some(tk.binv_apply(&sys.g(t - self.tau))?);
        state.complement = Some(tk.binv_apply(&sys.g(t))?);
        Ok(())
    }

    pub fn step(&self, tk: &OperatorToolkit<'_>, state: &mut StepperState) -> Result<()> {
        let sys = tk.system();
        let tau = self.tau;
        if state.complement.is_none() || state.complement_prev.is_none() {
            self.prime_state(tk, state)?;
        }
        let t = state.step as f64 * tau;
        let u = &state.u;
        let u_prev = state
            .u_prev
            .as_deref()
            .ok_or(Error::SchemeNotApplicable("Gautschi step needs u^{n-1}"))?;
        let (c_prev, c_cur) = match (&state.complement_prev, &state.complement) {
            (Some(p), Some(c)) => (p, c),
            _ => unreachable!("complements primed above"),
        };

        let c_next = tk.binv_apply(&sys.g(t + tau))?;
        let accel_c = tk.binv_apply(&sys.gddot(t))?;
        let mut rhs = sys.load(t, u);
        sys.mass().mul_vec_add(-1.0, &accel_c, &mut rhs);
        let b = tk.aker_inv_apply(&rhs)?;

        let mut y = sub(u, c_cur);
        axpy(-1.0, &b, &mut y);
        let z = krylov_cos_apply(tk, &y, tau, self.krylov_dim)?;

        let mut u_next = c_next.clone();
        axpy(-1.0, u_prev, &mut u_next);
        axpy(1.0, c_prev, &mut u_next);
        axpy(2.0, &z, &mut u_next);
        axpy(2.0, &b, &mut u_next);

        state.u_prev = Some(core::mem::replace(&mut state.u, u_next));
        state.complement_prev = state.complement.take();
        state.complement = Some(c_next);
        state.w = None;
        state.step += 1;
        Ok(())
    }
}
