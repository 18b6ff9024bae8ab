use std::path::Path;
use std::process::{Command, Output};

use mdflow::assembly::{assemble_blocks, read_vector, schur_tpfa, write_matrix_market, write_vector};
use mdflow::harness::HEADER_2D;
use mdflow::model::{case1, write_case_config, Case1Variant, ReferenceKind};
use mdflow::solve::SolveReport;
use mdflow::sparse::norm2;

fn mdflow(args: &[&str], out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mdflow"));
    cmd.args(args).env_remove("MDFLOW_OUT");
    if let Some(dir) = out {
        cmd.env("MDFLOW_OUT", dir);
    }
    cmd.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn case1a_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = mdflow(&["case1a", "--meshes", "8,16", "--out", out], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let conv = read(&dir.path().join("case1a_convergence.csv"));
    assert_eq!(conv.lines().next(), Some(HEADER_2D));
    // two meshes plus an average row, for pressure and flux
    assert_eq!(conv.lines().count(), 7);
    let solver = read(&dir.path().join("case1a_solver.csv"));
    assert_eq!(solver.lines().next(), Some(SolveReport::CSV_HEADER));
    assert!(solver.lines().nth(1).unwrap().starts_with("8,"));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = mdflow(&["case1b", "--meshes", "8"], Some(dir.path()));
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("case1b_convergence.csv").exists());
}

#[test]
fn no_timings_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let o = mdflow(&["case1a", "--meshes", "8,16", "--no-timings", "--threads", "2", "--out", d.path().to_str().unwrap()], None);
        assert_eq!(code(&o), 0);
    }
    for f in ["case1a_convergence.csv", "case1a_solver.csv"] {
        assert_eq!(read(&a.path().join(f)), read(&b.path().join(f)), "{f}");
    }
    assert!(read(&a.path().join("case1a_solver.csv")).contains(",0.000,0.000,"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&mdflow(&["case1a", "--bogus"], None)), 1);
    assert_eq!(code(&mdflow(&["case1a", "--meshes", "12"], None)), 1);
    assert_eq!(code(&mdflow(&["case1a", "--tol", "2"], None)), 1);
    assert_eq!(code(&mdflow(&["custom", "--config", "/nonexistent/case.cfg"], None)), 1);
    assert_eq!(code(&mdflow(&["--help"], None)), 0);
}

#[test]
fn non_convergence_exits_two_after_writing() {
    let dir = tempfile::tempdir().unwrap();
    let o = mdflow(&["case1a", "--meshes", "16", "--maxit", "2", "--out", dir.path().to_str().unwrap()], None);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("did not converge"));
    assert!(dir.path().join("case1a_solver.csv").exists());
}

#[test]
fn reference_profile_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = mdflow(&["reference", "--case", "1b", "--samples", "20", "--out", dir.path().to_str().unwrap()], None);
    assert_eq!(code(&o), 0);
    let text = read(&dir.path().join("case1b_reference.csv"));
    assert_eq!(text.lines().next(), Some("r,pD,q_r"));
    assert_eq!(text.lines().count(), 21);
}

#[test]
fn solve_matrix_market_system() {
    let dir = tempfile::tempdir().unwrap();
    let blocks = assemble_blocks(&case1(Case1Variant::A).discretize(16, 4).unwrap()).unwrap();
    let (a, b) = schur_tpfa(&blocks).unwrap();
    std::fs::write(dir.path().join("A.mtx"), write_matrix_market(&a)).unwrap();
    std::fs::write(dir.path().join("b.txt"), write_vector(&b)).unwrap();
    let p = |f: &str| dir.path().join(f).to_str().unwrap().to_string();
    let o = mdflow(&["solve", "--matrix", &p("A.mtx"), "--rhs", &p("b.txt"), "--tol", "1e-9", "--out", &p("")], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let x = read_vector(&read(&dir.path().join("solution.txt"))).unwrap();
    let ax = a.mul_vec(&x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(u, v)| u - v).collect();
    assert!(norm2(&r) <= 1e-9 * norm2(&b));
    assert!(read(&dir.path().join("solve_report.csv")).lines().nth(1).unwrap().starts_with("-,"));
}

#[test]
fn custom_config_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = case1(Case1Variant::A);
    spec.name = "mine".into();
    spec.reference = ReferenceKind::None;
    let cfg = dir.path().join("mine.cfg");
    std::fs::write(&cfg, write_case_config(&spec)).unwrap();
    let o = mdflow(&["custom", "--config", cfg.to_str().unwrap(), "--meshes", "8,16", "--out", dir.path().to_str().unwrap()], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(&dir.path().join("mine_convergence.csv")), format!("{HEADER_2D}\n"));
    assert_eq!(read(&dir.path().join("mine_solver.csv")).lines().count(), 3);
}
