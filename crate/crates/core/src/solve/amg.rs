//! Unsmoothed aggregation multigrid.
//!
//! Aggregates come from two greedy pairwise matching passes per level on
//! the strength graph `|a_ij| ≥ θ√(a_ii a_jj)`. Rows are visited in index
//! order and each takes its strongest free neighbour, ties going to the
//! lower index. Rows left without a partner join the aggregate of their
//! strongest neighbour, or stay alone.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::solve::SolveError;
use crate::sparse::{CsrMatrix, TripletBuilder};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmgConfig {
    /// Strength threshold θ.
    pub theta: f64,
    /// Stop coarsening once a level has at most this many rows.
    pub coarse_threshold: usize,
    /// Largest coarsest level accepted for the dense solve.
    pub dense_limit: usize,
    pub max_levels: usize,
    /// Pairwise passes per coarsening step.
    pub passes: usize,
}

impl Default for AmgConfig {
    fn default() -> Self {
        Self { theta: 0.08, coarse_threshold: 32, dense_limit: 1024, max_levels: 30, passes: 2 }
    }
}

/// Dense pseudo-inverse of the coarsest operator.
#[derive(Clone, Debug)]
struct CoarseSolver {
    n: usize,
    pinv: Vec<f64>,
}

impl CoarseSolver {
    fn new(a: &CsrMatrix) -> Self {
        let n = a.nrows();
        let mut m = DMatrix::<f64>::zeros(n, n);
        for (i, j, v) in a.triplets() {
            m[(i, j)] = v;
        }
        let eig = SymmetricEigen::new(m);
        let top = eig.eigenvalues.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        let cut = 1e-12 * top;
        let mut pinv = vec![0.0; n * n];
        for (k, &lam) in eig.eigenvalues.iter().enumerate() {
            if lam.abs() <= cut {
                continue;
            }
            let v = eig.eigenvectors.column(k);
            for i in 0..n {
                let s = v[i] / lam;
                for j in 0..n {
                    pinv[i * n + j] += s * v[j];
                }
            }
        }
        Self { n, pinv }
    }

    fn solve(&self, b: &[f64], x: &mut [f64]) {
        for i in 0..self.n {
            x[i] = self.pinv[i * self.n..(i + 1) * self.n].iter().zip(b).map(|(p, v)| p * v).sum();
        }
    }
}

/// Operators and aggregate maps of every level.
#[derive(Clone, Debug)]
pub struct AmgHierarchy {
    operators: Vec<CsrMatrix>,
    /// `aggregates[l][i]` is the coarse index of row `i` of level `l`.
    aggregates: Vec<Vec<usize>>,
    coarse: Option<CoarseSolver>,
}

impl AmgHierarchy {
    pub fn num_levels(&self) -> usize {
        self.operators.len()
    }

    pub fn operator(&self, level: usize) -> &CsrMatrix {
        &self.operators[level]
    }

    pub fn aggregates(&self, level: usize) -> &[usize] {
        &self.aggregates[level]
    }

    pub fn grid_complexity(&self) -> f64 {
        let n0 = self.operators[0].nrows() as f64;
        self.operators.iter().map(|a| a.nrows() as f64).sum::<f64>() / n0
    }

    pub fn operator_complexity(&self) -> f64 {
        let z0 = self.operators[0].nnz().max(1) as f64;
        self.operators.iter().map(|a| a.nnz() as f64).sum::<f64>() / z0
    }

    /// Piecewise-constant prolongation of `level` as a matrix.
    pub fn prolongation(&self, level: usize) -> CsrMatrix {
        let agg = &self.aggregates[level];
        let nc = self.operators[level + 1].nrows();
        let t: Vec<_> = agg.iter().enumerate().map(|(i, &c)| (i, c, 1.0)).collect();
        CsrMatrix::from_triplets(agg.len(), nc, &t)
    }

    /// One V(1,1) cycle for `A x = b`, improving `x` in place.
    ///
    /// With a single level the cycle is a forward Gauss–Seidel sweep
    /// followed by a second one; no direct solve takes place.
    pub fn vcycle(&self, b: &[f64], x: &mut [f64]) {
        self.cycle(0, b, x);
    }

    fn cycle(&self, level: usize, b: &[f64], x: &mut [f64]) {
        let a = &self.operators[level];
        if level + 1 == self.operators.len() {
            match &self.coarse {
                Some(c) if level > 0 => c.solve(b, x),
                _ => {
                    gauss_seidel(a, b, x);
                    gauss_seidel(a, b, x);
                }
            }
            return;
        }
        gauss_seidel(a, b, x);
        let ax = a.mul_vec(x);
        let agg = &self.aggregates[level];
        let nc = self.operators[level + 1].nrows();
        let mut rc = vec![0.0; nc];
        for i in 0..b.len() {
            rc[agg[i]] += b[i] - ax[i];
        }
        let mut ec = vec![0.0; nc];
        self.cycle(level + 1, &rc, &mut ec);
        for i in 0..x.len() {
            x[i] += ec[agg[i]];
        }
        gauss_seidel(a, b, x);
    }
}

/// One forward lexicographic Gauss–Seidel sweep; rows with zero diagonal are skipped.
pub fn gauss_seidel(a: &CsrMatrix, b: &[f64], x: &mut [f64]) {
    for i in 0..a.nrows() {
        let (cols, vals) = a.row(i);
        let mut diag = 0.0;
        let mut s = b[i];
        for (&j, &v) in cols.iter().zip(vals) {
            if j == i {
                diag += v;
            } else {
                s -= v * x[j];
            }
        }
        if diag != 0.0 {
            x[i] = s / diag;
        }
    }
}

/// One greedy pairwise matching pass. Returns the aggregate of each row and the aggregate count.
pub fn pairwise_aggregation(a: &CsrMatrix, theta: f64) -> (Vec<usize>, usize) {
    let n = a.nrows();
    let diag = a.diagonal();
    let strong = |i: usize, j: usize, v: f64| {
        i != j && v != 0.0 && diag[i] > 0.0 && diag[j] > 0.0 && v.abs() >= theta * (diag[i] * diag[j]).sqrt()
    };
    const FREE: usize = usize::MAX;
    let mut agg = vec![FREE; n];
    let mut count = 0;
    let mut leftovers = Vec::new();
    for i in 0..n {
        if agg[i] != FREE {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for (j, v) in a.row_iter(i) {
            if agg[j] == FREE && strong(i, j, v) && best.is_none_or(|(bj, bv)| v.abs() > bv || (v.abs() == bv && j < bj)) {
                best = Some((j, v.abs()));
            }
        }
        match best {
            Some((j, _)) => {
                agg[i] = count;
                agg[j] = count;
                count += 1;
            }
            None => leftovers.push(i),
        }
    }
    for i in leftovers {
        let mut best: Option<(usize, f64)> = None;
        for (j, v) in a.row_iter(i) {
            if agg[j] != FREE && strong(i, j, v) && best.is_none_or(|(bj, bv)| v.abs() > bv || (v.abs() == bv && j < bj)) {
                best = Some((j, v.abs()));
            }
        }
        agg[i] = match best {
            Some((j, _)) => agg[j],
            None => {
                count += 1;
                count - 1
            }
        };
    }
    (agg, count)
}

/// Galerkin product `Pᵀ A P` for a piecewise-constant `P`.
pub fn galerkin(a: &CsrMatrix, agg: &[usize], nc: usize) -> CsrMatrix {
    let mut b = TripletBuilder::with_capacity(nc, nc, a.nnz());
    for (i, j, v) in a.triplets() {
        b.push(agg[i], agg[j], v);
    }
    b.build()
}

pub fn build_hierarchy(a: &CsrMatrix, config: &AmgConfig) -> Result<AmgHierarchy, SolveError> {
    if !a.is_square() {
        return Err(SolveError::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    let mut operators = vec![a.clone()];
    let mut aggregates = Vec::new();
    loop {
        let cur = operators.last().unwrap();
        let n = cur.nrows();
        if n <= config.coarse_threshold || operators.len() >= config.max_levels {
            break;
        }
        let mut map: Vec<usize> = (0..n).collect();
        let mut nc = n;
        let mut level_op = cur.clone();
        for _ in 0..config.passes.max(1) {
            let (pass, count) = pairwise_aggregation(&level_op, config.theta);
            if count == nc {
                break;
            }
            level_op = galerkin(&level_op, &pass, count);
            for m in map.iter_mut() {
                *m = pass[*m];
            }
            nc = count;
        }
        if nc == n {
            // stalled: keep what we have and solve it directly
            if operators.len() > 1 && n > config.dense_limit {
                return Err(SolveError::CoarseningStalled { level: operators.len() - 1, rows: n });
            }
            break;
        }
        aggregates.push(map);
        operators.push(level_op);
    }
    let coarse = if operators.len() > 1 {
        let last = operators.last().unwrap();
        if last.nrows() > config.dense_limit {
            return Err(SolveError::CoarseningStalled { level: operators.len() - 1, rows: last.nrows() });
        }
        Some(CoarseSolver::new(last))
    } else {
        None
    };
    Ok(AmgHierarchy { operators, aggregates, coarse })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_laplacian(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n - 1 {
            t.push((i, i, 1.0));
            t.push((i + 1, i + 1, 1.0));
            t.push((i, i + 1, -1.0));
            t.push((i + 1, i, -1.0));
        }
        CsrMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn path_graph_by_hand() {
        let a = path_laplacian(8);
        let cfg = AmgConfig { coarse_threshold: 1, ..AmgConfig::default() };
        let h = build_hierarchy(&a, &cfg).unwrap();
        assert_eq!(h.aggregates(0), &[0, 0, 0, 0, 1, 1, 1, 1]);
        assert_eq!(h.num_levels(), 3);
        assert_eq!(h.operator(1).to_dense(), vec![vec![1.0, -1.0], vec![-1.0, 1.0]]);
        assert!((h.grid_complexity() - 11.0 / 8.0).abs() < 1e-15);
        assert!(h.grid_complexity() < 2.0);
    }

    #[test]
    fn identity_is_one_level() {
        let h = build_hierarchy(&CsrMatrix::identity(100), &AmgConfig::default()).unwrap();
        assert_eq!(h.num_levels(), 1);
        let b: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let mut x = vec![0.0; 100];
        h.vcycle(&b, &mut x);
        assert_eq!(x, b);
    }

    #[test]
    fn single_pass_pairs_neighbours() {
        let (agg, n) = pairwise_aggregation(&path_laplacian(5), 0.08);
        assert_eq!(agg, vec![0, 0, 1, 1, 1]);
        assert_eq!(n, 2);
    }

    #[test]
    fn galerkin_matches_dense_product() {
        let n = 40;
        let a = path_laplacian(n);
        let h = build_hierarchy(&a, &AmgConfig { coarse_threshold: 2, ..AmgConfig::default() }).unwrap();
        for l in 0..h.num_levels() - 1 {
            let p = h.prolongation(l);
            let pt = p.transpose();
            let dense = pt.matmul(h.operator(l)).matmul(&p).to_dense();
            let got = h.operator(l + 1).to_dense();
            for (r1, r2) in dense.iter().zip(&got) {
                for (x, y) in r1.iter().zip(r2) {
                    assert!((x - y).abs() <= 1e-13);
                }
            }
        }
    }

    #[test]
    fn non_square_rejected() {
        let a = CsrMatrix::zeros(2, 3);
        assert!(matches!(build_hierarchy(&a, &AmgConfig::default()), Err(SolveError::NotSquare { .. })));
    }
}
