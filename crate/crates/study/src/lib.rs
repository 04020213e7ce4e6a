//! Mesh files, the temporal convergence study and CSV reports built on
//! `cwave-core`.

pub mod config;
mod error;
pub mod mesh_io;
pub mod report;
pub mod study;

pub use config::{MeshSource, StudyConfig};
pub use error::{Result, StudyError};
pub use study::{observed_orders, run_convergence_study, ConvergenceReport, ReportRow};
