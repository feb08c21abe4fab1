use std::fs;
use std::process::Command;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_macro-ale"));
    cmd.env("RUST_LOG", "error");
    cmd
}

#[test]
fn solve_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "preset = \"paper1\"\n[time]\nsteps = 2\n[output]\nmatrix_market = true\nsparsity_image = true\nmacro_mesh = true\n").unwrap();
    let out = dir.path().join("out");
    let status = bin()
        .args(["solve", "--config"])
        .arg(&cfg)
        .args(["--n", "2", "--solver", "gmres", "--tol", "1e-8", "--out"])
        .arg(&out)
        .env("MACRO_ALE_THREADS", "2")
        .status()
        .unwrap();
    assert!(status.success());
    for f in [
        "solution_0001.vtk",
        "solution_0002.vtk",
        "surface_0002.vtk",
        "matrix_0001.mtx",
        "sparsity_0002.pgm",
        "macro_mesh.vtk",
    ] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let csv = fs::read_to_string(out.join("solver.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "step,time,method,iterations,rel_residual,seconds");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1,0.0625,GMRES,"));
    assert!(lines[2].starts_with("2,0.125,GMRES,"));
}

#[test]
fn preset_without_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["solve", "--preset", "paper2", "--n", "2", "--solver", "segregated", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(dir.path().join("solver.csv")).unwrap();
    assert_eq!(csv.lines().count(), 10);
    assert!(csv.lines().nth(9).unwrap().starts_with("9,0.45,SCHUR_CG,"));
}

#[test]
fn usage_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "scenario = \"moving_sphere\"\n[mesh]\nn = 2\n").unwrap();
    let out = bin().args(["solve", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin().args(["solve", "--preset", "paper1", "--tol", "-1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin()
        .args(["solve", "--preset", "paper1"])
        .env("MACRO_ALE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    assert!(!bin().arg("solve").status().unwrap().success());
}
