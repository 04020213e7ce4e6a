//! Temporal convergence study against a fine-step Gautschi reference.

use rayon::prelude::*;

use cwave_core::fem::{initial_condition, make_disc_mesh, FemBlocks, Mesh, Norm};
use cwave_core::{integrate, Integrator, IntegratorConfig, OperatorToolkit, Scheme};

use crate::config::{MeshSource, StudyConfig};
use crate::error::Result;
use crate::mesh_io::load_mesh;

/// One (scheme, r, τ) run.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub scheme: Scheme,
    /// Krylov dimension, Gautschi only.
    pub krylov_dim: Option<usize>,
    pub tau: f64,
    /// `max_n ‖u(t_n) − u_ref(t_n)‖` over the coarse grid.
    pub err_l2: f64,
    pub err_h1: f64,
    /// Order against the previous (larger) step of the same scheme.
    pub order_l2: Option<f64>,
    pub max_constraint_violation: f64,
    /// Set when the run aborted; the errors are NaN then.
    pub failure: Option<String>,
}

impl ReportRow {
    pub fn label(&self) -> String {
        match self.krylov_dim {
            Some(r) => format!("{}(r={r})", self.scheme),
            None => self.scheme.to_string(),
        }
    }

    pub fn error(&self, norm: Norm) -> f64 {
        match norm {
            Norm::L2 => self.err_l2,
            Norm::H1 => self.err_h1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceInfo {
    pub tau: f64,
    pub krylov_dim: usize,
    pub stored_snapshots: usize,
    pub max_constraint_violation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// Sorted by scheme, then Krylov dimension, then descending τ.
    pub rows: Vec<ReportRow>,
    pub reference: Option<ReferenceInfo>,
    pub domain_dofs: usize,
    pub boundary_dofs: usize,
}

impl ConvergenceReport {
    pub fn empty() -> Self {
        Self {
            rows: Vec::new(),
            reference: None,
            domain_dofs: 0,
            boundary_dofs: 0,
        }
    }

    /// Rows of one scheme (and Krylov dimension), descending τ.
    pub fn series(&self, scheme: Scheme, krylov_dim: Option<usize>) -> Vec<&ReportRow> {
        self.rows
            .iter()
            .filter(|r| r.scheme == scheme && r.krylov_dim == krylov_dim)
            .collect()
    }

    /// Observed orders of one series in the given norm.
    pub fn orders(&self, scheme: Scheme, krylov_dim: Option<usize>, norm: Norm) -> Vec<f64> {
        let pts: Vec<(f64, f64)> = self
            .series(scheme, krylov_dim)
            .iter()
            .map(|r| (r.tau, r.error(norm)))
            .collect();
        observed_orders(&pts)
    }
}

/// `p_k = log(e_k / e_{k+1}) / log(τ_k / τ_{k+1})`, i.e. `log₂` of the error
/// ratio under halving. Nonpositive or non-finite errors give NaN.
pub fn observed_orders(errors: &[(f64, f64)]) -> Vec<f64> {
    errors
        .windows(2)
        .map(|w| {
            let ((t0, e0), (t1, e1)) = (w[0], w[1]);
            if !(e0 > 0.0 && e1 > 0.0 && e0.is_finite() && e1.is_finite()) {
                return f64::NAN;
            }
            (e0 / e1).ln() / (t0 / t1).ln()
        })
        .collect()
}

pub fn build_mesh(source: &MeshSource) -> Result<Mesh> {
    Ok(match source {
        MeshSource::Disc(level) => make_disc_mesh(*level)?,
        MeshSource::File(path) => load_mesh(path)?,
    })
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

struct Job {
    scheme: Scheme,
    krylov_dim: Option<usize>,
    tau: f64,
    ratio: usize,
}

/// Runs every (scheme, r, τ) of `cfg` and compares against the reference.
pub fn run_convergence_study(cfg: &StudyConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let mesh = build_mesh(&cfg.mesh)?;
    let blocks = FemBlocks::assemble(&mesh)?;
    let sys = blocks.kinetic_dae()?;
    let tk = OperatorToolkit::new(&sys)?;
    let (x0, y0) = initial_condition(&mesh);
    let nu = blocks.n_u();

    let ratios = cfg.ratios()?;
    let stride = ratios.iter().copied().fold(0, gcd);
    let ref_cfg = IntegratorConfig::new(Scheme::Gautschi, cfg.tau_ref, cfg.t_end)
        .with_krylov_dim(cfg.ref_krylov_dim)
        .with_store_every(stride);
    let reference = integrate(&tk, &ref_cfg, &x0, &y0)?;
    let ref_states: Vec<&[f64]> = reference.states.iter().map(|s| &s[..nu]).collect();

    let mut jobs = Vec::new();
    for &scheme in &cfg.schemes {
        let dims: Vec<Option<usize>> = if scheme == Scheme::Gautschi {
            cfg.krylov_dims.iter().map(|&r| Some(r)).collect()
        } else {
            vec![None]
        };
        for krylov_dim in dims {
            for (&tau, &ratio) in cfg.tau_list.iter().zip(&ratios) {
                jobs.push(Job {
                    scheme,
                    krylov_dim,
                    tau,
                    ratio: ratio / stride,
                });
            }
        }
    }

    let mut rows: Vec<ReportRow> = jobs
        .par_iter()
        .map(|job| run_job(&tk, &blocks, cfg.t_end, job, &x0, &y0, &ref_states))
        .collect();
    rows.sort_by(|a, b| {
        (a.scheme, a.krylov_dim)
            .cmp(&(b.scheme, b.krylov_dim))
            .then(b.tau.total_cmp(&a.tau))
    });
    for i in 1..rows.len() {
        let (prev, cur) = (&rows[i - 1], &rows[i]);
        if prev.scheme == cur.scheme && prev.krylov_dim == cur.krylov_dim {
            let p = observed_orders(&[(prev.tau, prev.err_l2), (cur.tau, cur.err_l2)])[0];
            rows[i].order_l2 = Some(p);
        }
    }

    Ok(ConvergenceReport {
        rows,
        reference: Some(ReferenceInfo {
            tau: cfg.tau_ref,
            krylov_dim: cfg.ref_krylov_dim,
            stored_snapshots: reference.len(),
            max_constraint_violation: reference.max_constraint_violation,
        }),
        domain_dofs: nu,
        boundary_dofs: blocks.m(),
    })
}

fn run_job(
    tk: &OperatorToolkit<'_>,
    blocks: &FemBlocks,
    t_end: f64,
    job: &Job,
    x0: &[f64],
    y0: &[f64],
    reference: &[&[f64]],
) -> ReportRow {
    let mut row = ReportRow {
        scheme: job.scheme,
        krylov_dim: job.krylov_dim,
        tau: job.tau,
        err_l2: f64::NAN,
        err_h1: f64::NAN,
        order_l2: None,
        max_constraint_violation: f64::NAN,
        failure: None,
    };
    let nu = blocks.n_u();
    let mut cfg = IntegratorConfig::new(job.scheme, job.tau, t_end);
    if let Some(r) = job.krylov_dim {
        cfg = cfg.with_krylov_dim(r);
    }
    let result = (|| -> cwave_core::Result<(f64, f64, f64)> {
        let mut it = Integrator::new(tk, cfg, x0, y0)?;
        let (mut l2, mut h1) = (0.0f64, 0.0f64);
        let mut diff = vec![0.0; nu];
        while !it.is_finished() {
            it.advance()?;
            let s = it.state();
            let r = reference[s.step * job.ratio];
            for ((d, a), b) in diff.iter_mut().zip(&s.u[..nu]).zip(r) {
                *d = a - b;
            }
            l2 = l2.max(blocks.error_norm(&diff, Norm::L2)?);
            h1 = h1.max(blocks.error_norm(&diff, Norm::H1)?);
        }
        Ok((l2, h1, it.max_constraint_violation()))
    })();
    match result {
        Ok((l2, h1, viol)) => {
            row.err_l2 = l2;
            row.err_h1 = h1;
            row.max_constraint_violation = viol;
        }
        Err(e) => row.failure = Some(e.to_string()),
    }
    row
}
