//! AMG-preconditioned FGMRES for the pressure system.

mod amg;
mod fgmres;

pub use amg::{build_hierarchy, galerkin, gauss_seidel, pairwise_aggregation, AmgConfig, AmgHierarchy};
pub use fgmres::{fgmres, FgmresConfig, NoPreconditioner, Preconditioner};

use std::time::Instant;

use thiserror::Error;

use crate::assembly::Kernel;
use crate::sparse::{norm2, CsrMatrix};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("singular system is inconsistent: kernel component {ratio:.3e} of the right-hand side")]
    Inconsistent { ratio: f64 },
    #[error("coarsening stalled at level {level} with {rows} rows")]
    CoarseningStalled { level: usize, rows: usize },
    #[error("Arnoldi breakdown at iteration {iteration}")]
    Breakdown { iteration: usize, report: Box<SolveReport> },
    #[error("no convergence after {} iterations (relative residual {:.3e})", .0.iterations, .0.relative_residual)]
    NotConverged(Box<SolveReport>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub tol: f64,
    pub maxit: usize,
    pub amg: AmgConfig,
    /// Zero the timing fields of reports.
    pub no_timings: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol: 1e-6, maxit: 500, amg: AmgConfig::default(), no_timings: false }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// Relative residual estimate after each iteration, starting with 1.
    pub residual_history: Vec<f64>,
    /// Recomputed ‖b − Ax‖/‖b‖.
    pub relative_residual: f64,
    pub converged: bool,
    pub setup_seconds: f64,
    pub solve_seconds: f64,
    pub levels: usize,
    pub grid_complexity: f64,
    pub operator_complexity: f64,
    pub dof: usize,
}

impl SolveReport {
    pub const CSV_HEADER: &'static str = "inv_h,NLevel,GridComp,OperComp,NIter,CPUsetup,CPUsolve,DOF";

    /// One row of the solver table; `label` fills the first column.
    pub fn csv_row(&self, label: &str) -> String {
        format!(
            "{label},{},{:.2},{:.2},{},{:.3},{:.3},{}",
            self.levels,
            self.grid_complexity,
            self.operator_complexity,
            self.iterations,
            self.setup_seconds,
            self.solve_seconds,
            self.dof
        )
    }
}

/// Remove the mean (the component along the constant vector).
pub fn project_constants(x: &mut [f64]) {
    if x.is_empty() {
        return;
    }
    let m = x.iter().sum::<f64>() / x.len() as f64;
    for v in x.iter_mut() {
        *v -= m;
    }
}

struct AmgPrec<'a> {
    h: &'a AmgHierarchy,
}

impl Preconditioner for AmgPrec<'_> {
    fn apply(&mut self, r: &[f64], z: &mut [f64]) {
        z.iter_mut().for_each(|v| *v = 0.0);
        self.h.vcycle(r, z);
    }
}

/// Build the hierarchy and run preconditioned FGMRES from a zero guess.
///
/// With `Kernel::Constants` the right-hand side must be orthogonal to the
/// constants; iterates are kept mean-free and the returned solution has zero mean.
pub fn solve_pressure(a: &CsrMatrix, b: &[f64], kernel: Kernel, config: &SolverConfig) -> Result<(Vec<f64>, SolveReport), SolveError> {
    if !a.is_square() {
        return Err(SolveError::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    if b.len() != a.nrows() {
        return Err(SolveError::Dimension(format!("rhs has {} entries, matrix {} rows", b.len(), a.nrows())));
    }
    let singular = kernel == Kernel::Constants;
    if singular {
        let bn = norm2(b);
        let along = b.iter().sum::<f64>().abs() / (b.len() as f64).sqrt();
        if bn > 0.0 && along > 1e-10 * bn {
            return Err(SolveError::Inconsistent { ratio: along / bn });
        }
    }
    let t0 = Instant::now();
    let h = build_hierarchy(a, &config.amg)?;
    let setup = t0.elapsed().as_secs_f64();
    let mut prec = AmgPrec { h: &h };
    let t1 = Instant::now();
    let fcfg = FgmresConfig { tol: config.tol, maxit: config.maxit, restart: None, project_constants: singular };
    let result = fgmres(a, b, &mut prec, &fcfg);
    let solve = t1.elapsed().as_secs_f64();
    let fill = |r: &mut SolveReport| {
        r.levels = h.num_levels();
        r.grid_complexity = h.grid_complexity();
        r.operator_complexity = h.operator_complexity();
        r.dof = a.nrows();
        if !config.no_timings {
            r.setup_seconds = setup;
            r.solve_seconds = solve;
        }
    };
    match result {
        Ok((x, mut r)) => {
            fill(&mut r);
            Ok((x, r))
        }
        Err(SolveError::NotConverged(mut r)) => {
            fill(&mut r);
            Err(SolveError::NotConverged(r))
        }
        Err(SolveError::Breakdown { iteration, mut report }) => {
            fill(&mut report);
            Err(SolveError::Breakdown { iteration, report })
        }
        Err(e) => Err(e),
    }
}
