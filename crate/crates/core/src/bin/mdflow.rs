//! Command-line front end for the benchmark cases and the pressure solver.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use mdflow::assembly::{read_matrix_market, read_vector, write_vector, Kernel};
use mdflow::harness::{emit_tables, run_case, write_atomic, HarnessError, RunOptions};
use mdflow::model::{case1, case2, parse_case_config, Case1Variant, CaseSpec, ReferenceKind};
use mdflow::reference::solve_constants;
use mdflow::solve::{solve_pressure, AmgConfig, SolveError, SolveReport, SolverConfig};

#[derive(Parser, Debug)]
#[command(name = "mdflow", version, about = "Mixed-dimensional network/Darcy flow benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Case 1A: decaying transfer, series reference.
    Case1a(CaseArgs),
    /// Case 1B: indicator transfer, series reference.
    Case1b(CaseArgs),
    /// Case 2: four-dimensional two-compartment model, fine-grid reference.
    Case2(CaseArgs),
    /// Radial profile of the series solution.
    Reference(ReferenceArgs),
    /// Solve a Matrix Market system with AMG-preconditioned FGMRES.
    Solve(SolveArgs),
    /// Run a case described by a config file.
    Custom(CustomArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Output directory (falls back to $MDFLOW_OUT, then the working directory).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    maxit: usize,
    /// AMG strength threshold.
    #[arg(long, default_value_t = 0.08)]
    theta: f64,
    /// Coarsening stops at this many rows.
    #[arg(long, default_value_t = 32)]
    coarse_threshold: usize,
    /// Gauss points per axis for coefficient and source integrals.
    #[arg(long, default_value_t = 4)]
    quad_points: usize,
    /// Write zero timing columns.
    #[arg(long)]
    no_timings: bool,
    /// Meshes solved concurrently.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args, Debug)]
struct CaseArgs {
    /// Comma-separated 1/h values.
    #[arg(long, value_delimiter = ',')]
    meshes: Option<Vec<usize>>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct CustomArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "16,32")]
    meshes: Vec<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SeriesCase {
    #[value(name = "1a")]
    OneA,
    #[value(name = "1b")]
    OneB,
}

#[derive(Args, Debug)]
struct ReferenceArgs {
    #[arg(long = "case", value_enum, default_value = "1a")]
    case: SeriesCase,
    #[arg(long, default_value_t = 500)]
    samples: usize,
    /// Largest radius sampled.
    #[arg(long, default_value_t = 0.5)]
    r_max: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    rhs: PathBuf,
    #[command(flatten)]
    common: Common,
}

/// Raised after outputs are written when some solve failed to converge.
#[derive(Debug)]
struct NotConverged(String);

impl std::fmt::Display for NotConverged {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "solver did not converge: {}", self.0)
    }
}

impl std::error::Error for NotConverged {}

fn out_dir(explicit: &Option<PathBuf>) -> PathBuf {
    explicit
        .clone()
        .or_else(|| std::env::var_os("MDFLOW_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn options(c: &Common) -> Result<RunOptions> {
    if !(c.tol > 0.0 && c.tol < 1.0) {
        bail!("--tol must lie in (0, 1)");
    }
    if c.maxit == 0 || c.quad_points == 0 || c.threads == 0 {
        bail!("--maxit, --quad-points and --threads must be positive");
    }
    let amg = AmgConfig { theta: c.theta, coarse_threshold: c.coarse_threshold.max(1), ..AmgConfig::default() };
    let solver = SolverConfig { tol: c.tol, maxit: c.maxit, amg, no_timings: c.no_timings };
    Ok(RunOptions { solver, quad_points: c.quad_points, threads: c.threads })
}

fn check_meshes(meshes: &[usize]) -> Result<()> {
    if meshes.is_empty() {
        bail!("mesh list is empty");
    }
    if let Some(m) = meshes.iter().find(|m| !m.is_power_of_two() || **m < 2) {
        bail!("mesh 1/h = {m} is not a power of two >= 2");
    }
    Ok(())
}

fn run_and_emit(spec: &CaseSpec, meshes: &[usize], common: &Common) -> Result<()> {
    let opts = options(common)?;
    let run = match run_case(spec, meshes, &opts) {
        Err(HarnessError::ReferenceNotConverged(m)) => return Err(NotConverged(format!("reference solve at 1/h = {m}")).into()),
        other => other?,
    };
    let files = emit_tables(&run, &out_dir(&common.out))?;
    for f in &files {
        println!("wrote {}", f.display());
    }
    if !run.all_converged() {
        let bad: Vec<String> = run.reports.iter().filter(|(_, r)| !r.converged).map(|(m, _)| format!("1/h = {m}")).collect();
        return Err(NotConverged(bad.join(", ")).into());
    }
    Ok(())
}

fn builtin(spec: CaseSpec, args: &CaseArgs, default: &[usize]) -> Result<()> {
    let meshes = args.meshes.clone().unwrap_or_else(|| default.to_vec());
    check_meshes(&meshes)?;
    run_and_emit(&spec, &meshes, &args.common)
}

fn reference(args: &ReferenceArgs) -> Result<()> {
    let (spec, name) = match args.case {
        SeriesCase::OneA => (case1(Case1Variant::A), "case1a"),
        SeriesCase::OneB => (case1(Case1Variant::B), "case1b"),
    };
    let ReferenceKind::Series(params) = spec.reference else { unreachable!("case 1 has a series reference") };
    if args.samples == 0 || !(args.r_max > 0.0) {
        bail!("--samples and --r-max must be positive");
    }
    let sol = solve_constants(&params)?;
    let dir = out_dir(&args.out);
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(format!("{name}_reference.csv"));
    write_atomic(&path, &sol.profile_csv(args.samples, args.r_max))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn solve(args: &SolveArgs) -> Result<()> {
    let opts = options(&args.common)?;
    let a = read_matrix_market(&read(&args.matrix)?).with_context(|| format!("parsing {}", args.matrix.display()))?;
    let b = read_vector(&read(&args.rhs)?).with_context(|| format!("parsing {}", args.rhs.display()))?;
    // a zero row-sum operator has the constants in its kernel
    let ones = vec![1.0; a.ncols()];
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let kernel = if a.is_square() && a.mul_vec(&ones).iter().all(|v| v.abs() <= 1e-12 * scale) { Kernel::Constants } else { Kernel::Trivial };
    let dir = out_dir(&args.common.out);
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let write_report = |r: &SolveReport| -> Result<()> {
        let path = dir.join("solve_report.csv");
        let table = format!("{}\n{}\n", SolveReport::CSV_HEADER, r.csv_row("-"));
        write_atomic(&path, &table)?;
        print!("{table}");
        Ok(())
    };
    match solve_pressure(&a, &b, kernel, &opts.solver) {
        Ok((x, report)) => {
            let path = dir.join("solution.txt");
            write_atomic(&path, &write_vector(&x))?;
            write_report(&report)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Err(SolveError::NotConverged(report)) | Err(SolveError::Breakdown { report, .. }) => {
            write_report(&report)?;
            Err(NotConverged(format!("relative residual {:.3e} after {} iterations", report.relative_residual, report.iterations)).into())
        }
        Err(e) => Err(e.into()),
    }
}

fn custom(args: &CustomArgs) -> Result<()> {
    let spec = parse_case_config(&read(&args.config)?).with_context(|| format!("parsing {}", args.config.display()))?;
    if args.meshes.is_empty() || args.meshes.contains(&0) {
        bail!("mesh sizes must be positive");
    }
    run_and_emit(&spec, &args.meshes, &args.common)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Case1a(a) => builtin(case1(Case1Variant::A), a, &[16, 32, 64, 128]),
        Command::Case1b(a) => builtin(case1(Case1Variant::B), a, &[16, 32, 64, 128]),
        Command::Case2(a) => builtin(case2(), a, &[8, 16, 32]),
        Command::Reference(a) => reference(a),
        Command::Solve(a) => solve(a),
        Command::Custom(a) => custom(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<NotConverged>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
