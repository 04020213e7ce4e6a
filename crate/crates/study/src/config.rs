//! Study configuration, read from `key = value` lines.
//!
//! Time steps may be written as decimals, fractions (`1/16`) or powers of
//! two (`2^-4`). A list of steps is comma-separated or a halving range
//! `2^-4..2^-9`.

use std::path::{Path, PathBuf};

use cwave_core::fem::Norm;
use cwave_core::integrators::Scheme;

use crate::error::{Result, StudyError};

#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    Disc(u32),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub mesh: MeshSource,
    pub t_end: f64,
    /// Time steps of the coarse runs.
    pub tau_list: Vec<f64>,
    pub tau_ref: f64,
    pub schemes: Vec<Scheme>,
    /// Krylov dimensions swept for the Gautschi scheme.
    pub krylov_dims: Vec<usize>,
    /// Norm used for the printed orders.
    pub norm: Norm,
    pub output: PathBuf,
    pub ref_krylov_dim: usize,
}

fn halving(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|k| 2f64.powi(-k)).collect()
}

impl StudyConfig {
    /// Coarse mesh and short sweep; runs in a few minutes.
    pub fn desk() -> Self {
        Self {
            mesh: MeshSource::Disc(2),
            t_end: 1.0,
            tau_list: halving(4, 9),
            tau_ref: 2f64.powi(-11),
            schemes: Scheme::ALL.to_vec(),
            krylov_dims: vec![1, 2, 3],
            norm: Norm::L2,
            output: PathBuf::from("convergence.csv"),
            ref_krylov_dim: 10,
        }
    }

    /// Six refinements and `τ_ref = 2⁻¹³`.
    pub fn paper() -> Self {
        Self {
            mesh: MeshSource::Disc(6),
            tau_list: halving(2, 12),
            tau_ref: 2f64.powi(-13),
            ..Self::desk()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name.trim() {
            "desk" => Ok(Self::desk()),
            "paper" => Ok(Self::paper()),
            other => Err(StudyError::Config(format!("unknown preset `{other}`"))),
        }
    }

    /// Parses a config file on top of `base`. A `preset` key, if present,
    /// replaces the base before the other keys are applied.
    pub fn parse(text: &str, base: Self) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| StudyError::parse(i + 1, format!("expected `key = value`, found `{line}`")))?;
            entries.push((i + 1, key.trim().to_ascii_lowercase(), value.trim().to_string()));
        }
        let mut cfg = base;
        if let Some((line, _, v)) = entries.iter().find(|(_, k, _)| k == "preset") {
            cfg = Self::preset(v).map_err(|e| StudyError::parse(*line, e.to_string()))?;
        }
        for (line, key, value) in entries {
            let at = |e: StudyError| match e {
                StudyError::Parse { .. } => e,
                other => StudyError::parse(line, other.to_string()),
            };
            match key.as_str() {
                "preset" => {}
                "mesh_level" => cfg.mesh = MeshSource::Disc(parse_int(&value).map_err(at)? as u32),
                "mesh_path" => cfg.mesh = MeshSource::File(PathBuf::from(value)),
                "t_end" => cfg.t_end = parse_step(&value).map_err(at)?,
                "tau_list" => cfg.tau_list = parse_step_list(&value).map_err(at)?,
                "tau_ref" => cfg.tau_ref = parse_step(&value).map_err(at)?,
                "schemes" => {
                    cfg.schemes = split_list(&value)
                        .map(|s| s.parse::<Scheme>().map_err(|e| StudyError::parse(line, e.to_string())))
                        .collect::<Result<_>>()?
                }
                "krylov_dims" => {
                    cfg.krylov_dims = split_list(&value).map(parse_int).collect::<Result<_>>().map_err(at)?
                }
                "norm" => {
                    cfg.norm = value.parse().map_err(|e: cwave_core::Error| StudyError::parse(line, e.to_string()))?
                }
                "output" => cfg.output = PathBuf::from(value),
                "ref_krylov_dim" => cfg.ref_krylov_dim = parse_int(&value).map_err(at)?,
                other => return Err(StudyError::parse(line, format!("unknown key `{other}`"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, base: Self) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| StudyError::io(path, e))?;
        Self::parse(&text, base)
    }

    /// `τ / τ_ref` for each coarse step.
    pub fn ratios(&self) -> Result<Vec<usize>> {
        self.tau_list
            .iter()
            .map(|&tau| {
                let q = tau / self.tau_ref;
                let k = q.round();
                if k < 1.0 || (q - k).abs() > 1e-9 * k {
                    Err(StudyError::Config(format!(
                        "tau = {tau} is not an integer multiple of tau_ref = {}",
                        self.tau_ref
                    )))
                } else {
                    Ok(k as usize)
                }
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.t_end) || !positive(self.tau_ref) || !self.tau_list.iter().all(|&t| positive(t)) {
            return Err(StudyError::Config("times and time steps must be positive".into()));
        }
        if self.tau_list.is_empty() {
            return Err(StudyError::Config("tau_list is empty".into()));
        }
        if self.schemes.is_empty() {
            return Err(StudyError::Config("no schemes selected".into()));
        }
        if self.schemes.contains(&Scheme::Gautschi) && self.krylov_dims.is_empty() {
            return Err(StudyError::Config("gautschi selected without krylov_dims".into()));
        }
        if self.krylov_dims.contains(&0) || self.ref_krylov_dim == 0 {
            return Err(StudyError::Config("Krylov dimensions must be >= 1".into()));
        }
        if let MeshSource::Disc(level) = self.mesh {
            if !(1..=cwave_core::fem::mesh::MAX_DISC_LEVEL).contains(&level) {
                return Err(StudyError::Config(format!("mesh level {level} out of range")));
            }
        }
        self.ratios()?;
        Ok(())
    }
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_int(s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| StudyError::Config(format!("`{s}` is not a non-negative integer")))
}

/// `0.125`, `1/8` or `2^-3`.
pub fn parse_step(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || StudyError::Config(format!("cannot parse `{s}` as a number"));
    if let Some(exp) = s.strip_prefix("2^") {
        let e: i32 = exp.trim().parse().map_err(|_| bad())?;
        return Ok(2f64.powi(e));
    }
    if let Some((num, den)) = s.split_once('/') {
        let (n, d): (f64, f64) = (num.trim().parse().map_err(|_| bad())?, den.trim().parse().map_err(|_| bad())?);
        return Ok(n / d);
    }
    s.parse().map_err(|_| bad())
}

/// Comma list of steps, or a halving range `a..b` between powers of two.
pub fn parse_step_list(s: &str) -> Result<Vec<f64>> {
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (parse_step(a)?, parse_step(b)?);
        let (ea, eb) = (a.log2(), b.log2());
        if ea.fract() != 0.0 || eb.fract() != 0.0 || eb > ea {
            return Err(StudyError::Config(format!(
                "range `{s}` must run downward between powers of two"
            )));
        }
        return Ok(halving(-ea as i32, -eb as i32));
    }
    split_list(s).map(parse_step).collect()
}
