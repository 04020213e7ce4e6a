//! Time stepping on the uniform grid `t_n = nτ`.
//!
//! [`Integrator`] drives one of the schemes from a consistent initial state;
//! [`integrate`] runs it to `t_end` and collects a thinned [`Trajectory`].

mod gautschi;
mod imex;
pub mod krylov;

use alloc::string::String;
use alloc::vec::Vec;
use alloc::format;
use core::fmt;
use core::str::FromStr;

pub use gautschi::Gautschi;
pub use imex::{ImexCn, ImexCnTwoStep, ImexEuler};
pub use krylov::{krylov_cos_apply, KrylovCosineWorkspace};

use crate::dae::OperatorToolkit;
use crate::error::{Error, Result};
use crate::linalg::vector::{all_finite, norm2};
use crate::linalg::MAX_SMALL_DIM;

/// Relative constraint residual every accepted step has to satisfy.
pub const CONSTRAINT_TOLERANCE: f64 = 1e-8;

/// Mutable state of a stepper at step `step`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepperState {
    pub step: usize,
    pub u: Vec<f64>,
    /// Velocity; `None` for two-step schemes after startup.
    pub w: Option<Vec<f64>>,
    /// `u^{n−1}` (two-step schemes).
    pub u_prev: Option<Vec<f64>>,
    /// `B⁻g^{n−1}` (Gautschi).
    pub complement_prev: Option<Vec<f64>>,
    /// `B⁻g^n` (Gautschi).
    pub complement: Option<Vec<f64>>,
    /// Last multiplier, for diagnostics. Empty when the scheme has none.
    pub multiplier: Vec<f64>,
}

impl StepperState {
    pub fn initial(u0: &[f64], w0: &[f64]) -> Self {
        Self {
            step: 0,
            u: u0.to_vec(),
            w: Some(w0.to_vec()),
            u_prev: None,
            complement_prev: None,
            complement: None,
            multiplier: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    ImexEuler,
    ImexCn,
    ImexCnTwoStep,
    Gautschi,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::ImexEuler,
        Scheme::ImexCn,
        Scheme::ImexCnTwoStep,
        Scheme::Gautschi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::ImexEuler => "imex-euler",
            Scheme::ImexCn => "imex-cn",
            Scheme::ImexCnTwoStep => "imex-cn2",
            Scheme::Gautschi => "gautschi",
        }
    }

    pub fn is_two_step(self) -> bool {
        matches!(self, Scheme::ImexCnTwoStep | Scheme::Gautschi)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "imex-euler" | "euler" => Ok(Scheme::ImexEuler),
            "imex-cn" | "cn" => Ok(Scheme::ImexCn),
            "imex-cn2" | "imex-cn-two-step" | "cn2" => Ok(Scheme::ImexCnTwoStep),
            "gautschi" => Ok(Scheme::Gautschi),
            other => Err(Error::InvalidConfig(format!("unknown scheme `{other}`"))),
        }
    }
}

/// Startup of the two-step schemes.
#[derive(Debug, Clone, PartialEq)]
pub enum FirstStep {
    /// Taylor step (Gautschi) or the CN-type start (two-step IMEX).
    Taylor,
    /// User-supplied `u¹`.
    Provided(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    pub tau: f64,
    pub t_end: f64,
    /// Krylov dimension (Gautschi only).
    pub krylov_dim: usize,
    pub first_step: FirstStep,
    pub store_every: usize,
}

impl IntegratorConfig {
    pub fn new(scheme: Scheme, tau: f64, t_end: f64) -> Self {
        Self {
            scheme,
            tau,
            t_end,
            krylov_dim: 3,
            first_step: FirstStep::Taylor,
            store_every: 1,
        }
    }

    pub fn with_krylov_dim(mut self, r: usize) -> Self {
        self.krylov_dim = r;
        self
    }

    pub fn with_first_step(mut self, first: FirstStep) -> Self {
        self.first_step = first;
        self
    }

    pub fn with_store_every(mut self, k: usize) -> Self {
        self.store_every = k;
        self
    }

    /// Number of steps `t_end / τ`, which must be an integer up to half an ulp.
    pub fn step_count(&self) -> Result<usize> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::InvalidConfig(format!("time step {} must be positive", self.tau)));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::InvalidConfig(format!("final time {} must be >= 0", self.t_end)));
        }
        let q = self.t_end / self.tau;
        let k = libm::round(q);
        let half_ulp = 0.5 * (q.next_up() - q);
        if (q - k).abs() > half_ulp {
            return Err(Error::InvalidConfig(format!(
                "t_end = {} is not an integer multiple of tau = {}",
                self.t_end, self.tau
            )));
        }
        Ok(k as usize)
    }

    fn validate(&self, tk: &OperatorToolkit<'_>) -> Result<usize> {
        let steps = self.step_count()?;
        if self.store_every == 0 {
            return Err(Error::InvalidConfig("store_every must be >= 1".into()));
        }
        let sys = tk.system();
        if self.scheme == Scheme::Gautschi {
            let kernel_dim = sys.n() - sys.m();
            let limit = kernel_dim.min(MAX_SMALL_DIM);
            if self.krylov_dim == 0 || self.krylov_dim > limit {
                return Err(Error::InvalidConfig(format!(
                    "Krylov dimension {} outside 1..={limit}",
                    self.krylov_dim
                )));
            }
        }
        if sys.horizon() < self.t_end + self.tau {
            return Err(Error::InvalidConfig(format!(
                "constraint data horizon {} shorter than t_end + tau = {}",
                sys.horizon(),
                self.t_end + self.tau
            )));
        }
        if let FirstStep::Provided(u1) = &self.first_step {
            if !self.scheme.is_two_step() {
                return Err(Error::InvalidConfig(format!(
                    "{} is a one-step scheme and takes no first step",
                    self.scheme
                )));
            }
            if u1.len() != sys.n() {
                return Err(Error::DimensionMismatch {
                    context: "provided first step",
                    expected: sys.n(),
                    found: u1.len(),
                });
            }
        }
        Ok(steps)
    }
}

#[derive(Debug)]
enum Stepper {
    Euler(ImexEuler),
    Cn(ImexCn),
    CnTwoStep(ImexCnTwoStep),
    Gautschi(Gautschi),
}

/// A scheme bound to a system and an initial state.
#[derive(Debug)]
pub struct Integrator<'a> {
    tk: &'a OperatorToolkit<'a>,
    config: IntegratorConfig,
    stepper: Stepper,
    state: StepperState,
    total_steps: usize,
    max_violation: f64,
}

fn tolerance_for(u: &[f64]) -> f64 {
    CONSTRAINT_TOLERANCE * (1.0 + norm2(u))
}

impl<'a> Integrator<'a> {
    pub fn new(
        tk: &'a OperatorToolkit<'a>,
        config: IntegratorConfig,
        x0: &[f64],
        y0: &[f64],
    ) -> Result<Self> {
        let total_steps = config.validate(tk)?;
        let sys = tk.system();
        if !all_finite(x0) || !all_finite(y0) {
            return Err(Error::NonFinite("initial value"));
        }
        let tol = CONSTRAINT_TOLERANCE * (1.0 + norm2(x0).max(norm2(y0)));
        let report = sys.check_consistency(x0, y0, tol)?;
        if !report.passed {
            return Err(Error::InvalidConfig(format!(
                "inconsistent initial data: |Bx0 - g(0)| = {:e}, |By0 - g'(0)| = {:e}",
                report.position_residual, report.velocity_residual
            )));
        }
        let tau = config.tau;
        let stepper = match config.scheme {
            Scheme::ImexEuler => Stepper::Euler(ImexEuler::new(sys, tau)?),
            Scheme::ImexCn => Stepper::Cn(ImexCn::new(sys, tau)?),
            Scheme::ImexCnTwoStep => Stepper::CnTwoStep(ImexCnTwoStep::new(sys, tau)?),
            Scheme::Gautschi => Stepper::Gautschi(Gautschi::new(tk, tau, config.krylov_dim)?),
        };
        let max_violation = sys.constraint_residual(x0, 0.0)?;
        Ok(Self {
            tk,
            config,
            stepper,
            state: StepperState::initial(x0, y0),
            total_steps,
            max_violation,
        })
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.config
    }

    pub fn state(&self) -> &StepperState {
        &self.state
    }

    pub fn time(&self) -> f64 {
        self.state.step as f64 * self.config.tau
    }

    pub fn total_steps(&self) -> usize {
        self.total_steps
    }

    pub fn is_finished(&self) -> bool {
        self.state.step >= self.total_steps
    }

    /// Largest `‖B uⁿ − g(tₙ)‖₂` seen so far.
    pub fn max_constraint_violation(&self) -> f64 {
        self.max_violation
    }

    /// Advances one step and returns the constraint residual of the new state.
    pub fn advance(&mut self) -> Result<f64> {
        let sys = self.tk.system();
        let tau = self.config.tau;
        let state = &mut self.state;
        match &self.stepper {
            Stepper::Euler(s) => s.step(sys, state)?,
            Stepper::Cn(s) => s.step(self.tk, state)?,
            Stepper::CnTwoStep(s) => {
                if state.step == 0 {
                    let (u1, mult) = match &self.config.first_step {
                        FirstStep::Taylor => s.start(sys, &state.u, state.w.as_deref().unwrap_or(&[]))?,
                        FirstStep::Provided(u1) => (u1.clone(), Vec::new()),
                    };
                    start_two_step(state, u1, mult);
                } else {
                    s.step(sys, state)?;
                }
            }
            Stepper::Gautschi(s) => {
                if state.step == 0 {
                    let u1 = match &self.config.first_step {
                        FirstStep::Taylor => {
                            s.first_step(self.tk, &state.u, state.w.as_deref().unwrap_or(&[]))?
                        }
                        FirstStep::Provided(u1) => u1.clone(),
                    };
                    start_two_step(state, u1, Vec::new());
                    s.prime_state(self.tk, state)?;
                } else {
                    s.step(self.tk, state)?;
                }
            }
        }

        if !all_finite(&state.u) {
            return Err(Error::NonFinite("time step produced a non-finite state"));
        }
        let t = state.step as f64 * tau;
        let residual = sys.constraint_residual(&state.u, t)?;
        if !(residual <= tolerance_for(&state.u)) {
            return Err(Error::ConstraintDrift {
                step: state.step,
                residual,
            });
        }
        self.max_violation = self.max_violation.max(residual);
        Ok(residual)
    }
}

fn start_two_step(state: &mut StepperState, u1: Vec<f64>, multiplier: Vec<f64>) {
    state.u_prev = Some(core::mem::replace(&mut state.u, u1));
    state.w = None;
    state.multiplier = multiplier;
    state.step = 1;
}

/// Stored snapshots of a run, every `store_every` steps including `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub scheme: Scheme,
    pub tau: f64,
    pub store_every: usize,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub constraint_residuals: Vec<f64>,
    /// Maximum over all steps, stored or not.
    pub max_constraint_violation: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&[f64]> {
        self.states.last().map(Vec::as_slice)
    }

    /// Snapshot at step `n`, if it was stored.
    pub fn at_step(&self, n: usize) -> Option<&[f64]> {
        if n % self.store_every != 0 {
            return None;
        }
        self.states.get(n / self.store_every).map(Vec::as_slice)
    }
}

/// Runs `config.scheme` from `(x0, y0)` to `config.t_end`.
pub fn integrate(
    tk: &OperatorToolkit<'_>,
    config: &IntegratorConfig,
    x0: &[f64],
    y0: &[f64],
) -> Result<Trajectory> {
    let mut it = Integrator::new(tk, config.clone(), x0, y0)?;
    let every = config.store_every;
    let capacity = it.total_steps() / every + 1;
    let mut traj = Trajectory {
        scheme: config.scheme,
        tau: config.tau,
        store_every: every,
        times: Vec::with_capacity(capacity),
        states: Vec::with_capacity(capacity),
        constraint_residuals: Vec::with_capacity(capacity),
        max_constraint_violation: 0.0,
    };
    traj.times.push(0.0);
    traj.states.push(x0.to_vec());
    traj.constraint_residuals
        .push(tk.system().constraint_residual(x0, 0.0)?);
    while !it.is_finished() {
        let residual = it.advance()?;
        let n = it.state().step;
        if n % every == 0 {
            traj.times.push(n as f64 * config.tau);
            traj.states.push(it.state().u.clone());
            traj.constraint_residuals.push(residual);
        }
    }
    traj.max_constraint_violation = it.max_constraint_violation();
    Ok(traj)
}

/// Human-readable summary of a scheme choice, e.g. `gautschi(r=3)`.
pub fn describe(config: &IntegratorConfig) -> String {
    match config.scheme {
        Scheme::Gautschi => format!("gautschi(r={})", config.krylov_dim),
        s => String::from(s.name()),
    }
}
