use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cwave_core::fem::{initial_condition, make_disc_mesh, FemBlocks};
use cwave_core::{integrate, IntegratorConfig, OperatorToolkit, Scheme};
use cwave_study::config::{parse_step, MeshSource, StudyConfig};
use cwave_study::mesh_io::save_mesh;
use cwave_study::report::{write_report, write_trajectory};
use cwave_study::study::{build_mesh, run_convergence_study};
use cwave_study::StudyError;

/// Time integration of the wave equation with kinetic boundary conditions.
#[derive(Debug, Parser)]
#[command(name = "cwave", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a concentric-ring disc mesh.
    Mesh {
        #[arg(long)]
        level: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Integrate once and write the u-block trajectory as CSV.
    Run(RunArgs),
    /// Run the convergence study described by a config file.
    Study {
        #[arg(long)]
        config: PathBuf,
        /// Start from the fine-mesh preset instead of the desk preset.
        #[arg(long)]
        paper_scale: bool,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long, value_parser = parse_scheme)]
    scheme: Scheme,
    #[arg(long, default_value_t = 3)]
    krylov_dim: usize,
    #[arg(long, value_parser = parse_float)]
    tau: f64,
    #[arg(long, value_parser = parse_float)]
    t_end: f64,
    #[arg(long, conflicts_with = "mesh", required_unless_present = "mesh")]
    mesh_level: Option<u32>,
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    store_every: usize,
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse().map_err(|e: cwave_core::Error| e.to_string())
}

fn parse_float(s: &str) -> Result<f64, String> {
    parse_step(s).map_err(|e| e.to_string())
}

fn run(args: RunArgs) -> Result<(), StudyError> {
    let source = match (args.mesh_level, args.mesh) {
        (_, Some(path)) => MeshSource::File(path),
        (Some(level), None) => MeshSource::Disc(level),
        (None, None) => unreachable!("clap requires one mesh option"),
    };
    let mesh = build_mesh(&source)?;
    let blocks = FemBlocks::assemble(&mesh)?;
    let sys = blocks.kinetic_dae()?;
    let tk = OperatorToolkit::new(&sys)?;
    let (x0, y0) = initial_condition(&mesh);
    let cfg = IntegratorConfig::new(args.scheme, args.tau, args.t_end)
        .with_krylov_dim(args.krylov_dim)
        .with_store_every(args.store_every);
    let traj = integrate(&tk, &cfg, &x0, &y0)?;
    write_trajectory(&traj, blocks.n_u(), &args.out)?;
    eprintln!(
        "{} steps, max |Bu - g| = {:e}, wrote {}",
        cfg.step_count()?,
        traj.max_constraint_violation,
        args.out.display()
    );
    Ok(())
}

fn study(config: PathBuf, paper_scale: bool) -> Result<(), StudyError> {
    let base = if paper_scale { StudyConfig::paper() } else { StudyConfig::desk() };
    let cfg = StudyConfig::load(&config, base)?;
    let report = run_convergence_study(&cfg)?;
    write_report(&report, &cfg.output)?;
    if let Some(r) = &report.reference {
        println!(
            "reference: gautschi r={} tau={} ({} snapshots, max |Bu - g| = {:e})",
            r.krylov_dim, r.tau, r.stored_snapshots, r.max_constraint_violation
        );
    }
    println!("{:<18} {:>12} {:>14} {:>8}", "scheme", "tau", "error", "order");
    let norm = cfg.norm;
    let mut prev: Option<&cwave_study::ReportRow> = None;
    for row in &report.rows {
        let order = match prev {
            Some(p) if p.scheme == row.scheme && p.krylov_dim == row.krylov_dim => {
                let o = cwave_study::observed_orders(&[(p.tau, p.error(norm)), (row.tau, row.error(norm))])[0];
                format!("{o:.3}")
            }
            _ => String::new(),
        };
        match &row.failure {
            Some(msg) => println!("{:<18} {:>12} failed: {msg}", row.label(), row.tau),
            None => println!("{:<18} {:>12} {:>14.6e} {:>8}", row.label(), row.tau, row.error(norm), order),
        }
        prev = Some(row);
    }
    println!("wrote {}", cfg.output.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Mesh { level, out } => make_disc_mesh(level)
            .map_err(StudyError::from)
            .and_then(|m| save_mesh(&m, &out)),
        Command::Run(args) => run(args),
        Command::Study { config, paper_scale } => study(config, paper_scale),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
