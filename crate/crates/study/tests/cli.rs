use std::process::Command;

fn cwave() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cwave"))
}

#[test]
fn mesh_subcommand_writes_a_loadable_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.txt");
    let st = cwave().args(["mesh", "--level", "1", "--out"]).arg(&out).status().unwrap();
    assert!(st.success());
    let mesh = cwave_study::mesh_io::load_mesh(&out).unwrap();
    assert_eq!(mesh.node_count(), 61);
}

#[test]
fn run_subcommand_writes_thinned_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj.csv");
    let st = cwave()
        .args(["run", "--scheme", "gautschi", "--krylov-dim", "3", "--tau", "2^-4", "--t-end", "1"])
        .args(["--mesh-level", "1", "--store-every", "4", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    let mut rd = csv::Reader::from_path(&out).unwrap();
    assert_eq!(rd.headers().unwrap().len(), 1 + 61);
    let times: Vec<f64> = rd.records().map(|r| r.unwrap()[0].parse().unwrap()).collect();
    assert_eq!(times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
}

#[test]
fn run_from_mesh_file() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("m.txt");
    cwave_study::mesh_io::save_mesh(&cwave_core::fem::make_disc_mesh(1).unwrap(), &mesh).unwrap();
    let out = dir.path().join("traj.csv");
    let st = cwave()
        .args(["run", "--scheme", "imex-cn2", "--tau", "0.125", "--t-end", "0.5", "--mesh"])
        .arg(&mesh)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let usage = cwave().args(["run", "--scheme", "leapfrog"]).output().unwrap();
    assert_eq!(usage.status.code(), Some(1));
    let missing = cwave().args(["study", "--config", "/nonexistent/cfg"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(1));
    // non-integer number of steps is an integrator configuration failure
    let bad = cwave()
        .args(["run", "--scheme", "imex-cn", "--tau", "0.3", "--t-end", "1", "--mesh-level", "1", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(cwave().arg("--help").status().unwrap().success());
}

#[test]
fn study_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("study.cfg");
    let out = dir.path().join("conv.csv");
    std::fs::write(
        &cfg,
        format!(
            "mesh_level = 1\nt_end = 0.5\ntau_list = 2^-3..2^-4\ntau_ref = 2^-6\nschemes = imex-cn\noutput = {}\n",
            out.display()
        ),
    )
    .unwrap();
    let run = cwave().args(["study", "--config"]).arg(&cfg).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 3);
}
