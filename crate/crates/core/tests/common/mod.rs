//! Independent oracles for the integration tests.
//!
//! The discrete operator is rebuilt from the lowest-order Raviart–Thomas
//! space on each rectangle with the vertex (trapezoidal) rule for the mass
//! matrix, inverted densely, and combined with the network/coupling graph
//! Laplacian written out by hand.

#![allow(dead_code)]

use mdflow::geom::{CartesianGrid, Forest, NodeKind};
use mdflow::model::CoefficientField;
use nalgebra::{DMatrix, DVector};

/// Global RT0 face: normal axis and the multi-index of the cell below it.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct FaceKey {
    axis: usize,
    below: Vec<usize>,
}

/// Dense pressure operator and right-hand side in the library's unknown
/// order (cells, then non-Dirichlet nodes).
pub fn rt0_vertex_schur(grid: &CartesianGrid, forest: &Forest, coef: &CoefficientField) -> (DMatrix<f64>, DVector<f64>) {
    let dim = grid.dim();
    let h = grid.spacing().to_vec();
    let ncells = grid.num_cells();

    // interior faces
    let mut faces: Vec<FaceKey> = Vec::new();
    for c in 0..ncells {
        let idx = grid.cell_index(c);
        for axis in 0..dim {
            let mut up = idx.clone();
            up[axis] += 1;
            if up[axis] < grid.shape()[axis] && grid.active_cell(&up).is_some() {
                faces.push(FaceKey { axis, below: idx.clone() });
            }
        }
    }
    faces.sort();
    let face_id = |key: &FaceKey| faces.binary_search(key).ok();

    let nf = faces.len();
    let mut mass = DMatrix::<f64>::zeros(nf, nf);
    let mut div = DMatrix::<f64>::zeros(nf, ncells);
    let area = |axis: usize| (0..dim).filter(|&a| a != axis).map(|a| h[a]).product::<f64>();
    let weight = h.iter().product::<f64>() / (1usize << dim) as f64;

    for c in 0..ncells {
        let idx = grid.cell_index(c);
        let lo = grid.cell_lower(c);
        // local basis: (global face, axis, on +side of this cell)
        let mut local: Vec<(usize, usize, bool)> = Vec::new();
        for axis in 0..dim {
            if let Some(f) = face_id(&FaceKey { axis, below: idx.clone() }) {
                local.push((f, axis, true));
            }
            if idx[axis] > 0 {
                let mut below = idx.clone();
                below[axis] -= 1;
                if let Some(f) = face_id(&FaceKey { axis, below }) {
                    local.push((f, axis, false));
                }
            }
        }
        // globally oriented along +axis with unit face flux
        let eval = |&(_, axis, plus): &(usize, usize, bool), x: &[f64]| -> Vec<f64> {
            let t = (x[axis] - lo[axis]) / h[axis];
            let mut v = vec![0.0; dim];
            v[axis] = if plus { t } else { 1.0 - t } / area(axis);
            v
        };
        for corner in 0..(1usize << dim) {
            let x: Vec<f64> = (0..dim).map(|a| lo[a] + if corner >> a & 1 == 1 { h[a] } else { 0.0 }).collect();
            let vals: Vec<Vec<f64>> = local.iter().map(|b| eval(b, &x)).collect();
            for (bi, vi) in local.iter().zip(&vals) {
                for (bj, vj) in local.iter().zip(&vals) {
                    let s: f64 = (0..dim).map(|a| vi[a] * vj[a] / coef.kd(c, a)).sum();
                    mass[(bi.0, bj.0)] += weight * s;
                }
            }
        }
        // ∫ div φ over the cell: +1 where the face is the upper face
        for &(f, _, plus) in &local {
            div[(f, c)] += if plus { 1.0 } else { -1.0 };
        }
    }

    let minv = mass.clone().try_inverse().expect("lumped mass is invertible");
    let darcy = div.transpose() * minv * &div;

    let nodes = forest.num_unknowns();
    let n = ncells + nodes;
    let mut a = DMatrix::<f64>::zeros(n, n);
    a.view_mut((0, 0), (ncells, ncells)).copy_from(&darcy);
    let mut b = DVector::<f64>::zeros(n);
    for c in 0..ncells {
        b[c] = coef.source[c];
    }
    for (k, &id) in forest.unknown_nodes().iter().enumerate() {
        b[ncells + k] = coef.node_source[id];
    }

    // eliminated transfer row: conductance (∫kS)²/|τ| between cell and terminal
    let vol = grid.cell_volume();
    for s in &coef.supports {
        let t = ncells + forest.unknown_index(s.terminal).unwrap();
        for (&c, &w) in s.cells.iter().zip(&s.ks_integral) {
            add_link(&mut a, c, t, w * w / vol);
        }
    }
    for e in forest.edges() {
        let k = e.conductivity;
        match (forest.unknown_index(e.tail), forest.unknown_index(e.head)) {
            (Some(i), Some(j)) => add_link(&mut a, ncells + i, ncells + j, k),
            (None, Some(j)) => {
                a[(ncells + j, ncells + j)] += k;
                b[ncells + j] += k * dirichlet(forest, e.tail);
            }
            (Some(i), None) => {
                a[(ncells + i, ncells + i)] += k;
                b[ncells + i] += k * dirichlet(forest, e.head);
            }
            (None, None) => {}
        }
    }
    (a, b)
}

fn dirichlet(forest: &Forest, id: usize) -> f64 {
    match forest.node(id).kind {
        NodeKind::DirichletRoot { pressure } => pressure,
        _ => unreachable!("eliminated nodes are Dirichlet"),
    }
}

fn add_link(a: &mut DMatrix<f64>, i: usize, j: usize, c: f64) {
    a[(i, i)] += c;
    a[(j, j)] += c;
    a[(i, j)] -= c;
    a[(j, i)] -= c;
}

/// Largest entrywise difference between a CSR matrix and a dense one.
pub fn max_diff(a: &mdflow::sparse::CsrMatrix, dense: &DMatrix<f64>) -> f64 {
    let mut full = DMatrix::<f64>::zeros(a.nrows(), a.ncols());
    for i in 0..a.nrows() {
        for (j, v) in a.row_iter(i) {
            full[(i, j)] += v;
        }
    }
    (full - dense).abs().max()
}

/// Unit box with per-cell anisotropic `kd` and, if `tree` is set, a
/// Dirichlet root joined to one terminal whose support is every cell with
/// weights `ks`.
pub fn boxed_problem(shape: &[usize], kd: Vec<f64>, tree: Option<(&[f64], f64, f64)>, source: Vec<f64>) -> (CartesianGrid, Forest, CoefficientField) {
    use mdflow::geom::{build_forest, EdgeSpec, Node, SupportRegion};
    let dim = shape.len();
    let grid = CartesianGrid::brick(shape, &vec![0.0; dim], &vec![1.0; dim]).unwrap();
    let (forest, supports, node_source) = match tree {
        None => (Forest::empty(), vec![], vec![]),
        Some((ks, kn, p0)) => {
            let f = build_forest(
                vec![
                    Node { id: 0, kind: NodeKind::DirichletRoot { pressure: p0 } },
                    Node { id: 1, kind: NodeKind::Terminal { anchor: vec![0.5; dim] } },
                ],
                &[EdgeSpec::new(0, 1, kn)],
            )
            .unwrap();
            let s = SupportRegion::from_cells(1, (0..grid.num_cells()).collect(), ks.to_vec()).unwrap();
            (f, vec![s], vec![0.0, 0.25])
        }
    };
    let coef = CoefficientField::new(&grid, &forest, kd, supports, source, node_source).unwrap();
    (grid, forest, coef)
}
