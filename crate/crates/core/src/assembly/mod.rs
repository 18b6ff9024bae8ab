//! Mass-lumped mixed system, its elimination to the two-point pressure
//! system, and flux recovery.
//!
//! Unknown layout. Pressures: active cells, then non-Dirichlet nodes in
//! unknown order. Fluxes: interior faces, then terminal-cell pairs (supports
//! in node-id order, cells in support order), then edges.
//!
//! The block system is
//!
//! ```text
//! D q + G p = f
//!       Gᵀq = −r
//! ```
//!
//! with `D` diagonal, so `A = Gᵀ D⁻¹ G` and `A p = r + Gᵀ D⁻¹ f`.

mod io;

pub use io::{read_matrix_market, read_vector, write_matrix_market, write_state_csv, write_vector};

use thiserror::Error;

use crate::geom::{CartesianGrid, Forest, NodeId};
use crate::model::{CoefficientField, Problem};
use crate::sparse::{CsrMatrix, TripletBuilder};

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("non-positive permeability {value} on cell {cell}, axis {axis}")]
    NonPositivePermeability { cell: usize, axis: usize, value: f64 },
    #[error("terminal {0} has an empty support")]
    EmptySupport(NodeId),
    #[error("{components} disconnected components, {floating} without a Dirichlet root")]
    Disconnected { components: usize, floating: usize },
    #[error("zero diagonal weight in flux row {0}")]
    ZeroDiagonal(usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Lumped weight ω of the half face `(cell, axis)` for the face-integrated
/// flux unknown: ω = (h/2)/(k|f|), `h` the spacing along `axis`.
pub fn face_weight(grid: &CartesianGrid, coefficients: &CoefficientField, cell: usize, axis: usize) -> Result<f64, AssemblyError> {
    let k = coefficients.kd(cell, axis);
    if !(k > 0.0) || !k.is_finite() {
        return Err(AssemblyError::NonPositivePermeability { cell, axis, value: k });
    }
    Ok(0.5 * grid.spacing()[axis] / (k * grid.face_area(axis)))
}

/// Sizes and offsets of the unknown blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub faces: usize,
    pub transfer: usize,
    pub edges: usize,
    pub cells: usize,
    pub nodes: usize,
}

impl Layout {
    pub fn num_fluxes(&self) -> usize {
        self.faces + self.transfer + self.edges
    }

    pub fn num_pressures(&self) -> usize {
        self.cells + self.nodes
    }

    pub fn transfer_offset(&self) -> usize {
        self.faces
    }

    pub fn edge_offset(&self) -> usize {
        self.faces + self.transfer
    }
}

/// Null space of the pressure operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kernel {
    Trivial,
    /// A single floating component: the constant vector.
    Constants,
}

/// The lumped block system in flattened form.
///
/// `g` stacks G_DD / G_SD,G_SN / G_NN row-wise; `d` stacks D_D, D_S, D_N.
#[derive(Clone, Debug)]
pub struct LumpedBlocks {
    pub layout: Layout,
    pub d: Vec<f64>,
    pub g: CsrMatrix,
    /// Flux right-hand side (Dirichlet root pressures on root edges).
    pub f: Vec<f64>,
    /// Pressure right-hand side: ∫rD per cell, rN per unknown node.
    pub r: Vec<f64>,
    /// `(terminal, cell)` of every transfer row.
    pub transfer_rows: Vec<(NodeId, usize)>,
    /// ∫kS of every transfer row.
    pub transfer_weight: Vec<f64>,
    pub kernel: Kernel,
}

impl LumpedBlocks {
    /// Block `rows × cols` of `g` as its own matrix.
    fn sub(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> CsrMatrix {
        let mut b = TripletBuilder::new(rows.len(), cols.len());
        for i in rows.clone() {
            for (j, v) in self.g.row_iter(i) {
                if cols.contains(&j) {
                    b.push(i - rows.start, j - cols.start, v);
                }
            }
        }
        b.build()
    }

    fn ranges(&self) -> [std::ops::Range<usize>; 5] {
        let l = self.layout;
        [0..l.faces, l.faces..l.edge_offset(), l.edge_offset()..l.num_fluxes(), 0..l.cells, l.cells..l.num_pressures()]
    }

    pub fn g_dd(&self) -> CsrMatrix {
        let [f, _, _, c, _] = self.ranges();
        self.sub(f, c)
    }

    pub fn g_sd(&self) -> CsrMatrix {
        let [_, s, _, c, _] = self.ranges();
        self.sub(s, c)
    }

    pub fn g_sn(&self) -> CsrMatrix {
        let [_, s, _, _, n] = self.ranges();
        self.sub(s, n)
    }

    pub fn g_nn(&self) -> CsrMatrix {
        let [_, _, e, _, n] = self.ranges();
        self.sub(e, n)
    }

    pub fn d_d(&self) -> &[f64] {
        &self.d[..self.layout.faces]
    }

    pub fn d_s(&self) -> &[f64] {
        &self.d[self.layout.faces..self.layout.edge_offset()]
    }

    pub fn d_n(&self) -> &[f64] {
        &self.d[self.layout.edge_offset()..]
    }

    /// Full symmetric saddle-point matrix `[[D, G], [Gᵀ, 0]]` as a dense array.
    pub fn saddle_dense(&self) -> Vec<Vec<f64>> {
        let nf = self.layout.num_fluxes();
        let n = nf + self.layout.num_pressures();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..nf {
            m[i][i] = self.d[i];
            for (j, v) in self.g.row_iter(i) {
                m[i][nf + j] = v;
                m[nf + j][i] = v;
            }
        }
        m
    }
}

pub fn assemble_blocks(problem: &Problem) -> Result<LumpedBlocks, AssemblyError> {
    assemble(&problem.grid, &problem.forest, &problem.coefficients)
}

/// Build all blocks; fails on empty supports and on floating components
/// when more than one component exists.
pub fn assemble(grid: &CartesianGrid, forest: &Forest, coefficients: &CoefficientField) -> Result<LumpedBlocks, AssemblyError> {
    if coefficients.node_source.len() != forest.num_nodes() || coefficients.source.len() != grid.num_cells() {
        return Err(AssemblyError::Dimension("coefficients do not match grid and forest".into()));
    }
    let mut supports: Vec<_> = coefficients.supports.iter().collect();
    supports.sort_by_key(|s| s.terminal);
    for t in forest.terminals() {
        match coefficients.support_of(t.id) {
            Some(s) if s.total() > 0.0 => {}
            _ => return Err(AssemblyError::EmptySupport(t.id)),
        }
    }

    let ncells = grid.num_cells();
    let faces = grid.faces();
    let transfer: usize = supports.iter().map(|s| s.len()).sum();
    let layout = Layout {
        faces: faces.len(),
        transfer,
        edges: forest.num_edges(),
        cells: ncells,
        nodes: forest.num_unknowns(),
    };
    let mut d = Vec::with_capacity(layout.num_fluxes());
    let mut f = vec![0.0; layout.num_fluxes()];
    let mut g = TripletBuilder::with_capacity(layout.num_fluxes(), layout.num_pressures(), 2 * layout.num_fluxes());

    for (row, face) in faces.iter().enumerate() {
        let w = face_weight(grid, coefficients, face.minus, face.axis)? + face_weight(grid, coefficients, face.plus, face.axis)?;
        d.push(w);
        g.push(row, face.minus, -1.0);
        g.push(row, face.plus, 1.0);
    }

    let vol = grid.cell_volume();
    let mut transfer_rows = Vec::with_capacity(transfer);
    let mut transfer_weight = Vec::with_capacity(transfer);
    for s in &supports {
        let col = ncells + forest.unknown_index(s.terminal).expect("terminals are never Dirichlet");
        for (&cell, &w) in s.cells.iter().zip(&s.ks_integral) {
            let row = d.len();
            d.push(vol);
            g.push(row, cell, w);
            g.push(row, col, -w);
            transfer_rows.push((s.terminal, cell));
            transfer_weight.push(w);
        }
    }

    for e in forest.edges() {
        let row = d.len();
        d.push(1.0 / e.conductivity);
        match forest.unknown_index(e.tail) {
            Some(c) => g.push(row, ncells + c, -1.0),
            None => f[row] = forest.node(e.tail).kind.dirichlet_value().expect("eliminated nodes are Dirichlet"),
        }
        if let Some(c) = forest.unknown_index(e.head) {
            g.push(row, ncells + c, 1.0);
        }
    }

    let mut r = coefficients.source.clone();
    r.extend(forest.unknown_nodes().iter().map(|&id| coefficients.node_source[id]));

    let g = g.build();
    let kernel = classify_kernel(&g, forest, layout)?;
    Ok(LumpedBlocks { layout, d, g, f, r, transfer_rows, transfer_weight, kernel })
}

/// Components of the pressure graph induced by the flux rows; a component
/// is anchored if a Dirichlet root edge touches it.
fn classify_kernel(g: &CsrMatrix, forest: &Forest, layout: Layout) -> Result<Kernel, AssemblyError> {
    let n = layout.num_pressures();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..g.nrows() {
        let (cols, _) = g.row(i);
        for w in cols.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            if a != b {
                parent[a] = b;
            }
        }
    }
    let mut anchored = vec![false; n];
    let off = layout.edge_offset();
    for (l, e) in forest.edges().iter().enumerate() {
        if forest.unknown_index(e.tail).is_none() {
            let (cols, _) = g.row(off + l);
            if let Some(&c) = cols.first() {
                let root = find(&mut parent, c);
                anchored[root] = true;
            }
        }
    }
    let mut components = 0;
    let mut floating = 0;
    for i in 0..n {
        if find(&mut parent, i) == i {
            components += 1;
            if !anchored[i] {
                floating += 1;
            }
        }
    }
    match (components, floating) {
        (_, 0) => Ok(Kernel::Trivial),
        (1, 1) => Ok(Kernel::Constants),
        _ => Err(AssemblyError::Disconnected { components, floating }),
    }
}

/// `A = Gᵀ D⁻¹ G` and `b = r + Gᵀ D⁻¹ f`.
///
/// Every product `g_ki g_kj / d_k` is pushed for both orderings of the pair
/// from the same expression, so `A` is exactly symmetric.
pub fn schur_tpfa(blocks: &LumpedBlocks) -> Result<(CsrMatrix, Vec<f64>), AssemblyError> {
    let n = blocks.layout.num_pressures();
    let g = &blocks.g;
    let mut a = TripletBuilder::with_capacity(n, n, 4 * g.nnz());
    let mut b = blocks.r.clone();
    for k in 0..g.nrows() {
        let dk = blocks.d[k];
        if !(dk > 0.0) {
            return Err(AssemblyError::ZeroDiagonal(k));
        }
        let (cols, vals) = g.row(k);
        for (x, (&i, &gi)) in cols.iter().zip(vals).enumerate() {
            a.push(i, i, gi * gi / dk);
            for (&j, &gj) in cols[x + 1..].iter().zip(&vals[x + 1..]) {
                let v = gi * gj / dk;
                a.push(i, j, v);
                a.push(j, i, v);
            }
            if blocks.f[k] != 0.0 {
                b[i] += gi * blocks.f[k] / dk;
            }
        }
    }
    Ok((a.build(), b))
}

/// Discrete solution.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedState {
    /// Face-integrated flux per interior face, positive along the face axis.
    pub qd: Vec<f64>,
    /// Scaled transfer flux per transfer row (see [`LumpedBlocks::transfer_rows`]),
    /// positive from the network into the cell.
    pub qs: Vec<f64>,
    /// Edge flux, positive from tail to head.
    pub qn: Vec<f64>,
    pub pd: Vec<f64>,
    /// Node pressure by node id, Dirichlet values included.
    pub pn: Vec<f64>,
}

impl MixedState {
    pub fn flux_vector(&self) -> Vec<f64> {
        [self.qd.as_slice(), &self.qs, &self.qn].concat()
    }

    /// Pressure vector in unknown order.
    pub fn pressure_vector(&self, forest: &Forest) -> Vec<f64> {
        let mut p = self.pd.clone();
        p.extend(forest.unknown_nodes().iter().map(|&id| self.pn[id]));
        p
    }
}

/// `q = D⁻¹(f − G p)`; Dirichlet node values are re-inserted into `pn`.
pub fn recover_fluxes(blocks: &LumpedBlocks, forest: &Forest, p: &[f64]) -> Result<MixedState, AssemblyError> {
    let l = blocks.layout;
    if p.len() != l.num_pressures() {
        return Err(AssemblyError::Dimension(format!("pressure has {} entries, expected {}", p.len(), l.num_pressures())));
    }
    let gp = blocks.g.mul_vec(p);
    let q: Vec<f64> = (0..l.num_fluxes()).map(|k| (blocks.f[k] - gp[k]) / blocks.d[k]).collect();
    let mut pn: Vec<f64> = forest.nodes().iter().map(|n| n.kind.dirichlet_value().unwrap_or(0.0)).collect();
    for (c, &id) in forest.unknown_nodes().iter().enumerate() {
        pn[id] = p[l.cells + c];
    }
    Ok(MixedState {
        qd: q[..l.faces].to_vec(),
        qs: q[l.faces..l.edge_offset()].to_vec(),
        qn: q[l.edge_offset()..].to_vec(),
        pd: p[..l.cells].to_vec(),
        pn,
    })
}

/// Residual `Gᵀq + r` of every conservation row (cells, then unknown nodes).
pub fn conservation_residual(blocks: &LumpedBlocks, state: &MixedState) -> Vec<f64> {
    let mut res = blocks.g.mul_transpose_vec(&state.flux_vector());
    for (x, r) in res.iter_mut().zip(&blocks.r) {
        *x += r;
    }
    res
}

/// Global balance: outflow at Dirichlet roots must equal the total source.
///
/// Returns |Σ_{root edges} q + Σ rN + Σ ∫rD|. Boundary faces carry no flux.
pub fn graph_stokes_check(state: &MixedState, forest: &Forest, coefficients: &CoefficientField) -> f64 {
    let into_tree: f64 = forest
        .edges()
        .iter()
        .zip(&state.qn)
        .filter(|(e, _)| forest.node(e.tail).kind.is_dirichlet())
        .map(|(_, q)| q)
        .sum();
    let node_src: f64 = forest
        .nodes()
        .iter()
        .filter(|n| !n.kind.is_dirichlet())
        .map(|n| coefficients.node_source[n.id])
        .sum();
    let domain_src: f64 = coefficients.source.iter().sum();
    (into_tree + node_src + domain_src).abs()
}
