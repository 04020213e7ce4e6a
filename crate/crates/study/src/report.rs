//! CSV output of convergence reports and trajectories.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use cwave_core::Trajectory;

use crate::error::{Result, StudyError};
use crate::study::ConvergenceReport;

pub const REPORT_HEADER: &str = "scheme,r,tau,err_l2,err_h1,order_l2";

/// Shortest decimal that parses back to `x`; `NaN` for undefined values.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:?}")
    }
}

pub fn report_csv(report: &ConvergenceReport) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for row in &report.rows {
        let r = row.krylov_dim.map(|r| r.to_string()).unwrap_or_default();
        let order = row.order_l2.map(format_float).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{}",
            row.scheme,
            r,
            format_float(row.tau),
            format_float(row.err_l2),
            format_float(row.err_h1),
            order
        )
        .expect("writing to a string");
    }
    out
}

pub fn write_report(report: &ConvergenceReport, path: &Path) -> Result<()> {
    fs::write(path, report_csv(report)).map_err(|e| StudyError::io(path, e))
}

/// `time,u_0,…,u_{k−1}` with the first `columns` entries of every snapshot.
pub fn trajectory_csv(traj: &Trajectory, columns: usize) -> String {
    let mut out = String::from("time");
    for i in 0..columns {
        write!(out, ",u_{i}").expect("writing to a string");
    }
    out.push('\n');
    for (t, u) in traj.times.iter().zip(&traj.states) {
        out.push_str(&format_float(*t));
        for x in &u[..columns] {
            out.push(',');
            out.push_str(&format_float(*x));
        }
        out.push('\n');
    }
    out
}

pub fn write_trajectory(traj: &Trajectory, columns: usize, path: &Path) -> Result<()> {
    fs::write(path, trajectory_csv(traj, columns)).map_err(|e| StudyError::io(path, e))
}
