//! Benchmark driver: solve a case on a mesh sequence, score each mesh
//! against its reference and write the convergence and solver tables.

mod table;

pub use table::{Column, ConvergenceTable, HEADER_2D, HEADER_4D};

use std::collections::HashMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::assembly::{assemble_blocks, conservation_residual, graph_stokes_check, recover_fluxes, schur_tpfa, AssemblyError, LumpedBlocks, MixedState};
use crate::geom::{CartesianGrid, Face, Forest, NodeKind};
use crate::model::{CaseSpec, ModelError, Problem, ReferenceKind};
use crate::quadrature::BoxRule;
use crate::reference::{solve_constants, RadialSolution, ReferenceError};
use crate::solve::{solve_pressure, SolveError, SolveReport, SolverConfig};
use crate::sparse::norm2;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Reference(#[from] ReferenceError),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("reference solve at 1/h = {0} did not converge")]
    ReferenceNotConverged(usize),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Discrete errors on one mesh.
///
/// Pressures in the cell-centred L² norm (domain) and ℓ² (nodes); fluxes in
/// the lumped k^{-1/2}-weighted norm. `errs_q` is only scored against the
/// series reference, `errt_q` and `errp_q` only against a fine grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorRecord {
    pub inv_h: usize,
    pub errd_p: f64,
    pub errn_p: f64,
    pub errd_q: f64,
    pub errs_q: Option<f64>,
    pub errn_q: f64,
    /// Physical transfer q^T per cell.
    pub errt_q: Option<f64>,
    /// Flux across the last axis of a four-dimensional case.
    pub errp_q: Option<f64>,
    pub converged: bool,
}

impl ErrorRecord {
    fn unscored(inv_h: usize) -> Self {
        Self {
            inv_h,
            errd_p: f64::NAN,
            errn_p: f64::NAN,
            errd_q: f64::NAN,
            errs_q: None,
            errn_q: f64::NAN,
            errt_q: None,
            errp_q: None,
            converged: false,
        }
    }
}

fn network_errors(forest: &Forest, state: &MixedState, pn: &[f64], qn: &[f64]) -> (f64, f64) {
    let p: f64 = forest.unknown_nodes().iter().map(|&id| (state.pn[id] - pn[id]).powi(2)).sum();
    let q: f64 = forest.edges().iter().enumerate().map(|(l, e)| (state.qn[l] - qn[l]).powi(2) / e.conductivity).sum();
    (p.sqrt(), q.sqrt())
}

/// Integrate `f` over an interior face with a tensor Gauss rule.
fn face_integral<F: FnMut(&[f64]) -> f64>(grid: &CartesianGrid, face: &Face, rule: &BoxRule, mut f: F) -> f64 {
    let dim = grid.dim();
    let h = grid.spacing();
    let centre = grid.face_center(face);
    let others: Vec<usize> = (0..dim).filter(|&a| a != face.axis).collect();
    let lower: Vec<f64> = others.iter().map(|&a| centre[a] - 0.5 * h[a]).collect();
    let width: Vec<f64> = others.iter().map(|&a| h[a]).collect();
    let mut x = centre.clone();
    rule.integrate(&lower, &width, |y| {
        for (k, &a) in others.iter().enumerate() {
            x[a] = y[k];
        }
        f(&x)
    })
}

/// Errors against the radial series solution centred on the single terminal.
///
/// The reference face flux is the exact normal flux integrated over the face
/// with `points` Gauss points per axis; the reference transfer flux is
/// `(1/|τ|)∫_τ kS (pN1 − pD)` by the same rule.
pub fn series_errors(problem: &Problem, blocks: &LumpedBlocks, state: &MixedState, sol: &RadialSolution, points: usize) -> Result<ErrorRecord, HarnessError> {
    let grid = &problem.grid;
    let forest = &problem.forest;
    let anchor = forest
        .terminals()
        .find_map(|n| match &n.kind {
            NodeKind::Terminal { anchor } if anchor.len() == grid.dim() => Some(anchor.clone()),
            _ => None,
        })
        .ok_or_else(|| HarnessError::GridMismatch("series reference needs a fully anchored terminal".into()))?;
    if state.pd.len() != grid.num_cells() || state.qd.len() != grid.num_faces() {
        return Err(HarnessError::GridMismatch("state does not belong to this grid".into()));
    }
    let radius = |x: &[f64]| anchor.iter().zip(x).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt();
    let vol = grid.cell_volume();

    let errd_p = (0..grid.num_cells())
        .map(|c| vol * (state.pd[c] - sol.pressure(radius(&grid.cell_center(c)))).powi(2))
        .sum::<f64>()
        .sqrt();

    let face_rule = BoxRule::new(grid.dim() - 1, points);
    let mut errd_q = 0.0;
    for (k, face) in grid.faces().iter().enumerate() {
        let q_ref = face_integral(grid, face, &face_rule, |x| {
            let r = radius(x);
            if r == 0.0 {
                0.0
            } else {
                sol.eval(r).1 * (x[face.axis] - anchor[face.axis]) / r
            }
        });
        errd_q += blocks.d[k] * (state.qd[k] - q_ref).powi(2);
    }

    let cell_rule = BoxRule::new(grid.dim(), points);
    let h = grid.spacing().to_vec();
    let mut errs_q = 0.0;
    for (k, &(_, cell)) in blocks.transfer_rows.iter().enumerate() {
        let lo = grid.cell_lower(cell);
        let integral = cell_rule.integrate(&lo, &h, |x| {
            let r = radius(x);
            sol.transfer(r).sqrt() * (sol.pn1 - sol.pressure(r))
        });
        errs_q += vol * (state.qs[k] - integral / vol).powi(2);
    }

    let mut pn = vec![0.0; forest.num_nodes()];
    for n in forest.nodes() {
        pn[n.id] = match n.kind {
            NodeKind::DirichletRoot { pressure } => pressure,
            NodeKind::Terminal { .. } => sol.pn1,
            _ => f64::NAN,
        };
    }
    let qn = vec![sol.qn; forest.num_edges()];
    let (errn_p, errn_q) = network_errors(forest, state, &pn, &qn);
    Ok(ErrorRecord {
        inv_h: 0,
        errd_p,
        errn_p,
        errd_q: errd_q.sqrt(),
        errs_q: Some(errs_q.sqrt()),
        errn_q,
        errt_q: None,
        errp_q: None,
        converged: true,
    })
}

/// A fine solution expressed on a coarser nested grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Restricted {
    /// Volume average of the fine cell pressures.
    pub pd: Vec<f64>,
    /// Sum of the fine face fluxes covering each coarse face.
    pub qd: Vec<f64>,
    /// Physical transfer `Σ ∫kS · qS` gathered into each coarse cell.
    pub transfer: Vec<f64>,
    pub pn: Vec<f64>,
    pub qn: Vec<f64>,
}

/// Per-axis refinement ratio of `fine` over `coarse`.
pub fn refinement_ratio(coarse: &CartesianGrid, fine: &CartesianGrid) -> Result<Vec<usize>, HarnessError> {
    let bad = |m: String| Err(HarnessError::GridMismatch(m));
    if coarse.dim() != fine.dim() {
        return bad(format!("dimensions {} and {}", coarse.dim(), fine.dim()));
    }
    let mut ratio = Vec::with_capacity(coarse.dim());
    for a in 0..coarse.dim() {
        let (c, f) = (coarse.shape()[a], fine.shape()[a]);
        let span_c = coarse.upper()[a] - coarse.lower()[a];
        let span_f = fine.upper()[a] - fine.lower()[a];
        if f % c != 0 || (coarse.lower()[a] - fine.lower()[a]).abs() > 1e-12 * span_c || (span_c - span_f).abs() > 1e-12 * span_c {
            return bad(format!("axis {a}: {f} fine cells do not nest in {c} coarse cells"));
        }
        ratio.push(f / c);
    }
    Ok(ratio)
}

/// Restrict a fine state to `coarse`. Every fine cell must lie in an active coarse cell.
pub fn restrict(coarse: &CartesianGrid, fine: &CartesianGrid, fine_blocks: &LumpedBlocks, state: &MixedState) -> Result<Restricted, HarnessError> {
    let ratio = refinement_ratio(coarse, fine)?;
    let coarse_of = |cell: usize| -> Result<usize, HarnessError> {
        let idx: Vec<usize> = fine.cell_index(cell).iter().zip(&ratio).map(|(i, r)| i / r).collect();
        coarse.active_cell(&idx).ok_or_else(|| HarnessError::GridMismatch(format!("fine cell {cell} has no active coarse parent")))
    };
    let per_cell: usize = ratio.iter().product();
    let mut pd = vec![0.0; coarse.num_cells()];
    let mut count = vec![0usize; coarse.num_cells()];
    for (cell, &p) in state.pd.iter().enumerate() {
        let c = coarse_of(cell)?;
        pd[c] += p;
        count[c] += 1;
    }
    for (p, &n) in pd.iter_mut().zip(&count) {
        if n != per_cell {
            return Err(HarnessError::GridMismatch("coarse cell only partially covered by fine cells".into()));
        }
        *p /= n as f64;
    }

    let lookup: HashMap<(usize, usize), usize> = coarse.faces().iter().enumerate().map(|(k, f)| ((f.axis, f.minus), k)).collect();
    let mut qd = vec![0.0; coarse.num_faces()];
    for (k, face) in fine.faces().iter().enumerate() {
        let idx = fine.cell_index(face.minus);
        if !(idx[face.axis] + 1).is_multiple_of(ratio[face.axis]) {
            continue;
        }
        let minus = coarse_of(face.minus)?;
        let key = (face.axis, minus);
        match lookup.get(&key) {
            Some(&ck) => qd[ck] += state.qd[k],
            None => return Err(HarnessError::GridMismatch("fine face without a coarse face".into())),
        }
    }

    let mut transfer = vec![0.0; coarse.num_cells()];
    for (k, &(_, cell)) in fine_blocks.transfer_rows.iter().enumerate() {
        transfer[coarse_of(cell)?] += fine_blocks.transfer_weight[k] * state.qs[k];
    }
    Ok(Restricted { pd, qd, transfer, pn: state.pn.clone(), qn: state.qn.clone() })
}

/// Errors against a restricted fine solution. Faces normal to
/// `perfusion_axis` are scored separately as q^P.
pub fn fine_errors(
    problem: &Problem,
    blocks: &LumpedBlocks,
    state: &MixedState,
    reference: &Restricted,
    perfusion_axis: Option<usize>,
) -> Result<ErrorRecord, HarnessError> {
    let grid = &problem.grid;
    if reference.pd.len() != grid.num_cells() || reference.qd.len() != grid.num_faces() || reference.pn.len() != state.pn.len() {
        return Err(HarnessError::GridMismatch("reference restricted to a different grid".into()));
    }
    let vol = grid.cell_volume();
    let errd_p = state.pd.iter().zip(&reference.pd).map(|(a, b)| vol * (a - b).powi(2)).sum::<f64>().sqrt();
    let (mut errd_q, mut errp_q) = (0.0, 0.0);
    for (k, face) in grid.faces().iter().enumerate() {
        let e = blocks.d[k] * (state.qd[k] - reference.qd[k]).powi(2);
        if Some(face.axis) == perfusion_axis {
            errp_q += e;
        } else {
            errd_q += e;
        }
    }
    let mut transfer = vec![0.0; grid.num_cells()];
    for (k, &(_, cell)) in blocks.transfer_rows.iter().enumerate() {
        transfer[cell] += blocks.transfer_weight[k] * state.qs[k];
    }
    let errt_q = transfer.iter().zip(&reference.transfer).map(|(a, b)| vol * ((a - b) / vol).powi(2)).sum::<f64>().sqrt();
    let (errn_p, errn_q) = network_errors(&problem.forest, state, &reference.pn, &reference.qn);
    Ok(ErrorRecord {
        inv_h: 0,
        errd_p,
        errn_p,
        errd_q: errd_q.sqrt(),
        errs_q: None,
        errn_q,
        errt_q: Some(errt_q),
        errp_q: perfusion_axis.map(|_| errp_q.sqrt()),
        converged: true,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    pub solver: SolverConfig,
    /// Gauss points per axis for coefficient and source integrals.
    pub quad_points: usize,
    /// Meshes solved concurrently.
    pub threads: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { solver: SolverConfig::default(), quad_points: 4, threads: 1 }
    }
}

/// Balance checks of one converged solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConservationCheck {
    pub inv_h: usize,
    pub graph_stokes: f64,
    /// ‖b‖₁ of the pressure system.
    pub rhs_norm1: f64,
    /// ‖Gᵀq + r‖₂ over all conservation rows.
    pub local: f64,
    pub rhs_norm2: f64,
}

/// One assembled and solved mesh. `state` is `None` if the solver failed.
#[derive(Clone, Debug)]
pub struct MeshRun {
    pub inv_h: usize,
    pub problem: Problem,
    pub blocks: LumpedBlocks,
    pub state: Option<MixedState>,
    pub report: SolveReport,
    pub check: Option<ConservationCheck>,
}

/// Discretize, assemble, solve and recover fluxes at `1/h = inv_h`.
///
/// Non-convergence and breakdown are not errors here; the run carries the
/// report and no state.
pub fn solve_mesh(spec: &CaseSpec, inv_h: usize, options: &RunOptions) -> Result<MeshRun, HarnessError> {
    let problem = spec.discretize(inv_h, options.quad_points)?;
    let blocks = assemble_blocks(&problem)?;
    let (a, b) = schur_tpfa(&blocks)?;
    let (state, report, check) = match solve_pressure(&a, &b, blocks.kernel, &options.solver) {
        Ok((p, report)) => {
            let state = recover_fluxes(&blocks, &problem.forest, &p)?;
            let check = ConservationCheck {
                inv_h,
                graph_stokes: graph_stokes_check(&state, &problem.forest, &problem.coefficients),
                rhs_norm1: b.iter().map(|v| v.abs()).sum(),
                local: norm2(&conservation_residual(&blocks, &state)),
                rhs_norm2: norm2(&b),
            };
            (Some(state), report, Some(check))
        }
        Err(SolveError::NotConverged(report)) => (None, *report, None),
        Err(SolveError::Breakdown { report, .. }) => (None, *report, None),
        Err(e) => return Err(e.into()),
    };
    Ok(MeshRun { inv_h, problem, blocks, state, report, check })
}

fn solve_meshes(spec: &CaseSpec, meshes: &[usize], options: &RunOptions) -> Result<Vec<MeshRun>, HarnessError> {
    let threads = options.threads.max(1);
    if threads == 1 || meshes.len() < 2 {
        return meshes.iter().map(|&m| solve_mesh(spec, m, options)).collect();
    }
    let mut slots: Vec<Option<Result<MeshRun, HarnessError>>> = (0..meshes.len()).map(|_| None).collect();
    std::thread::scope(|s| {
        for (chunk, out) in meshes.chunks(meshes.len().div_ceil(threads)).zip(slots.chunks_mut(meshes.len().div_ceil(threads))) {
            s.spawn(move || {
                for (&m, slot) in chunk.iter().zip(out.iter_mut()) {
                    *slot = Some(solve_mesh(spec, m, options));
                }
            });
        }
    });
    slots.into_iter().map(|s| s.expect("every mesh is solved")).collect()
}

/// Everything produced by [`run_case`].
#[derive(Clone, Debug)]
pub struct CaseRun {
    pub name: String,
    pub table: ConvergenceTable,
    /// Solver reports keyed by `1/h`; a fine-grid reference solve comes last.
    pub reports: Vec<(usize, SolveReport)>,
    pub checks: Vec<ConservationCheck>,
}

impl CaseRun {
    pub fn all_converged(&self) -> bool {
        self.reports.iter().all(|(_, r)| r.converged)
    }
}

/// Solve `spec` on every mesh and score it against the case reference.
///
/// Meshes that fail to converge stay in the table as unscored rows.
pub fn run_case(spec: &CaseSpec, meshes: &[usize], options: &RunOptions) -> Result<CaseRun, HarnessError> {
    spec.validate()?;
    let four_d = spec.dim() == 4;
    let mut table = ConvergenceTable { records: Vec::new(), four_d };
    let mut reports = Vec::new();
    let mut checks = Vec::new();

    let runs = solve_meshes(spec, meshes, options)?;
    match &spec.reference {
        ReferenceKind::Series(params) => {
            let sol = solve_constants(params)?;
            for run in &runs {
                let rec = match &run.state {
                    Some(state) => ErrorRecord { inv_h: run.inv_h, ..series_errors(&run.problem, &run.blocks, state, &sol, options.quad_points)? },
                    None => ErrorRecord::unscored(run.inv_h),
                };
                table.records.push(rec);
            }
        }
        ReferenceKind::FineGrid { inv_h: fine_h } => {
            if let Some(&m) = meshes.iter().find(|&&m| m >= *fine_h) {
                return Err(HarnessError::GridMismatch(format!("mesh 1/h = {m} is not coarser than the reference 1/h = {fine_h}")));
            }
            let fine = solve_mesh(spec, *fine_h, options)?;
            let Some(fine_state) = &fine.state else {
                return Err(HarnessError::ReferenceNotConverged(*fine_h));
            };
            let perfusion = four_d.then_some(spec.dim() - 1);
            for run in &runs {
                let rec = match &run.state {
                    Some(state) => {
                        let restricted = restrict(&run.problem.grid, &fine.problem.grid, &fine.blocks, fine_state)?;
                        ErrorRecord { inv_h: run.inv_h, ..fine_errors(&run.problem, &run.blocks, state, &restricted, perfusion)? }
                    }
                    None => ErrorRecord::unscored(run.inv_h),
                };
                table.records.push(rec);
            }
            reports.extend(runs.iter().map(|r| (r.inv_h, r.report.clone())));
            checks.extend(runs.iter().filter_map(|r| r.check));
            reports.push((fine.inv_h, fine.report.clone()));
            checks.extend(fine.check);
            return Ok(CaseRun { name: spec.name.clone(), table, reports, checks });
        }
        ReferenceKind::None => {}
    }
    reports.extend(runs.iter().map(|r| (r.inv_h, r.report.clone())));
    checks.extend(runs.iter().filter_map(|r| r.check));
    Ok(CaseRun { name: spec.name.clone(), table, reports, checks })
}

pub fn solver_csv(reports: &[(usize, SolveReport)]) -> String {
    let mut out = format!("{}\n", SolveReport::CSV_HEADER);
    for (inv_h, r) in reports {
        out.push_str(&r.csv_row(&inv_h.to_string()));
        out.push('\n');
    }
    out
}

/// Write through a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), HarnessError> {
    let io = |source| HarnessError::Io { path: path.to_path_buf(), source };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| io(std::io::Error::other("path has no file name")))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let mut file = fs::File::create(&tmp).map_err(io)?;
    file.write_all(contents.as_bytes()).map_err(io)?;
    file.sync_all().map_err(io)?;
    drop(file);
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io(e)
    })
}

/// `<name>_convergence.csv` and `<name>_solver.csv` in `dir`, created if needed.
pub fn emit_tables(run: &CaseRun, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir).map_err(|source| HarnessError::Io { path: dir.to_path_buf(), source })?;
    let conv = dir.join(format!("{}_convergence.csv", run.name));
    let solver = dir.join(format!("{}_solver.csv", run.name));
    write_atomic(&conv, &run.table.to_csv())?;
    write_atomic(&solver, &solver_csv(&run.reports))?;
    Ok(vec![conv, solver])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{case1, case2, Case1Variant};

    fn opts() -> RunOptions {
        RunOptions { solver: SolverConfig { tol: 1e-10, no_timings: true, ..SolverConfig::default() }, ..RunOptions::default() }
    }

    #[test]
    fn reference_against_itself_is_zero() {
        let spec = case2();
        let run = solve_mesh(&spec, 4, &opts()).unwrap();
        let state = run.state.as_ref().unwrap();
        let r = restrict(&run.problem.grid, &run.problem.grid, &run.blocks, state).unwrap();
        let e = fine_errors(&run.problem, &run.blocks, state, &r, Some(3)).unwrap();
        assert_eq!((e.errd_p, e.errd_q, e.errn_p, e.errn_q), (0.0, 0.0, 0.0, 0.0));
        assert_eq!((e.errt_q, e.errp_q), (Some(0.0), Some(0.0)));
    }

    #[test]
    fn restriction_is_conservative() {
        let spec = case2();
        let fine = solve_mesh(&spec, 8, &opts()).unwrap();
        let coarse = spec.grid.build(4).unwrap();
        let state = fine.state.as_ref().unwrap();
        let r = restrict(&coarse, &fine.problem.grid, &fine.blocks, state).unwrap();
        let fine_mass: f64 = state.pd.iter().sum::<f64>() * fine.problem.grid.cell_volume();
        let coarse_mass: f64 = r.pd.iter().sum::<f64>() * coarse.cell_volume();
        assert!((fine_mass - coarse_mass).abs() <= 1e-14 * fine_mass.abs().max(1.0));
        let fine_t: f64 = fine.blocks.transfer_weight.iter().zip(&state.qs).map(|(w, q)| w * q).sum();
        let coarse_t: f64 = r.transfer.iter().sum();
        assert!((fine_t - coarse_t).abs() <= 1e-14 * fine_t.abs().max(1.0));
        // every coarse face of 4 cells per axis collects (8/4)^2 * 1 fine faces
        assert!(fine.problem.grid.faces().len() > coarse.faces().len());
    }

    #[test]
    fn non_nested_grids_rejected() {
        let spec = case2();
        let a = spec.grid.build(4).unwrap();
        let b = spec.grid.build(6).unwrap();
        assert!(matches!(refinement_ratio(&a, &b), Err(HarnessError::GridMismatch(_))));
    }

    #[test]
    fn series_errors_shrink() {
        let spec = case1(Case1Variant::A);
        let run = run_case(&spec, &[8, 16], &opts()).unwrap();
        let r = &run.table.records;
        assert!(r[1].errd_p < r[0].errd_p && r[1].errd_q < r[0].errd_q);
        assert!(run.all_converged());
        assert_eq!(run.checks.len(), 2);
    }

    #[test]
    fn atomic_write_and_tables() {
        let dir = tempfile::tempdir().unwrap();
        let run = CaseRun { name: "empty".into(), table: ConvergenceTable::default(), reports: vec![], checks: vec![] };
        let files = emit_tables(&run, &dir.path().join("out")).unwrap();
        assert_eq!(fs::read_to_string(&files[0]).unwrap(), format!("{HEADER_2D}\n"));
        assert_eq!(fs::read_to_string(&files[1]).unwrap(), format!("{}\n", SolveReport::CSV_HEADER));
        let leftovers: Vec<_> = fs::read_dir(dir.path().join("out")).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(leftovers.len(), 2);
    }
}
