//! Right-preconditioned flexible GMRES with modified Gram–Schmidt and
//! Givens rotations.

use crate::solve::{project_constants, SolveError, SolveReport};
use crate::sparse::{dot, norm2, CsrMatrix};

pub trait Preconditioner {
    /// `z ≈ A⁻¹ r`. May change between calls.
    fn apply(&mut self, r: &[f64], z: &mut [f64]);
}

/// The identity.
pub struct NoPreconditioner;

impl Preconditioner for NoPreconditioner {
    fn apply(&mut self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FgmresConfig {
    /// Target ‖b − Ax‖ ≤ tol·‖b‖ (the initial guess is zero).
    pub tol: f64,
    /// Total inner iterations over all cycles.
    pub maxit: usize,
    /// Basis size per cycle; `None` keeps the full basis.
    pub restart: Option<usize>,
    /// Keep every Krylov and preconditioned vector orthogonal to the constants.
    pub project_constants: bool,
}

impl Default for FgmresConfig {
    fn default() -> Self {
        Self { tol: 1e-6, maxit: 500, restart: None, project_constants: false }
    }
}

fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else {
        let r = a.hypot(b);
        (a / r, b / r)
    }
}

/// Solve `A x = b` from `x = 0`.
///
/// A cycle ends when the Arnoldi estimate reaches the tolerance; the true
/// residual is then recomputed and another cycle starts if it is still too
/// large.
pub fn fgmres(a: &CsrMatrix, b: &[f64], m: &mut dyn Preconditioner, cfg: &FgmresConfig) -> Result<(Vec<f64>, SolveReport), SolveError> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(SolveError::Dimension(format!("{}x{} matrix with rhs of length {}", n, a.ncols(), b.len())));
    }
    let mut report = SolveReport { residual_history: vec![1.0], relative_residual: 0.0, dof: n, ..Default::default() };
    let mut x = vec![0.0; n];
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        report.converged = true;
        return Ok((x, report));
    }
    let target = cfg.tol * bnorm;
    let project = |v: &mut [f64]| {
        if cfg.project_constants {
            project_constants(v);
        }
    };

    let mut r = b.to_vec();
    project(&mut r);
    loop {
        let beta = norm2(&r);
        if beta <= target {
            report.relative_residual = beta / bnorm;
            report.converged = true;
            return Ok((x, report));
        }
        if report.iterations >= cfg.maxit {
            report.relative_residual = beta / bnorm;
            return Err(SolveError::NotConverged(Box::new(report)));
        }
        let room = cfg.maxit - report.iterations;
        let size = cfg.restart.unwrap_or(room).min(room).max(1);
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|x| x / beta).collect()];
        let mut z: Vec<Vec<f64>> = Vec::with_capacity(size);
        let mut hcols: Vec<Vec<f64>> = Vec::with_capacity(size);
        let mut cs: Vec<f64> = Vec::with_capacity(size);
        let mut sn: Vec<f64> = Vec::with_capacity(size);
        let mut g = vec![beta];
        let mut breakdown = false;
        for j in 0..size {
            let mut zj = vec![0.0; n];
            m.apply(&v[j], &mut zj);
            project(&mut zj);
            let mut w = a.mul_vec(&zj);
            project(&mut w);
            let mut h = vec![0.0; j + 2];
            for (i, vi) in v.iter().enumerate() {
                h[i] = dot(&w, vi);
                for (wk, vk) in w.iter_mut().zip(vi) {
                    *wk -= h[i] * vk;
                }
            }
            let hn = norm2(&w);
            h[j + 1] = hn;
            for i in 0..j {
                let t = cs[i] * h[i] + sn[i] * h[i + 1];
                h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
                h[i] = t;
            }
            let (c, s) = givens(h[j], h[j + 1]);
            h[j] = c * h[j] + s * h[j + 1];
            h[j + 1] = 0.0;
            cs.push(c);
            sn.push(s);
            g.push(-s * g[j]);
            g[j] *= c;
            z.push(zj);
            hcols.push(h);
            report.iterations += 1;
            let est = g[j + 1].abs();
            report.residual_history.push(est / bnorm);
            if hn <= 1e-14 * beta {
                breakdown = true;
                break;
            }
            if est <= target {
                break;
            }
            v.push(w.iter().map(|x| x / hn).collect());
        }
        // back substitution on the triangular factor
        let k = z.len();
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for l in i + 1..k {
                s -= hcols[l][i] * y[l];
            }
            // a zero pivot only arises with a breakdown; drop that direction
            y[i] = if hcols[i][i] == 0.0 { 0.0 } else { s / hcols[i][i] };
        }
        for (zi, yi) in z.iter().zip(&y) {
            for (xk, zk) in x.iter_mut().zip(zi) {
                *xk += yi * zk;
            }
        }
        let ax = a.mul_vec(&x);
        r = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        project(&mut r);
        if breakdown && norm2(&r) > target {
            report.relative_residual = norm2(&r) / bnorm;
            let iteration = report.iterations;
            return Err(SolveError::Breakdown { iteration, report: Box::new(report) });
        }
    }
}
