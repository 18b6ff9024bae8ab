use crate::geom::GeomError;

/// Interior face between two axis-adjacent active cells. Normal points from
/// `minus` to `plus` (the positive direction of `axis`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Face {
    pub axis: usize,
    pub minus: usize,
    pub plus: usize,
}

/// Face on the boundary of the active region. Carries zero normal flux.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryFace {
    pub axis: usize,
    pub cell: usize,
    /// True when the outward normal points along +axis.
    pub positive_side: bool,
}

/// Tensor-product cell grid on a box, with an optional active mask.
///
/// Cells are numbered lexicographically with axis 0 fastest. Active cells get
/// a dense index in the same order; every per-cell array in the crate uses
/// that active index.
#[derive(Clone, Debug, PartialEq)]
pub struct CartesianGrid {
    shape: Vec<usize>,
    spacing: Vec<f64>,
    lower: Vec<f64>,
    active_of_linear: Vec<Option<usize>>,
    linear_of_active: Vec<usize>,
    faces: Vec<Face>,
}

impl CartesianGrid {
    /// Full brick `[lower, upper]` split into `shape` cells.
    pub fn brick(shape: &[usize], lower: &[f64], upper: &[f64]) -> Result<Self, GeomError> {
        let total: usize = shape.iter().product();
        Self::with_mask(shape, lower, upper, vec![true; total])
    }

    pub fn with_mask(shape: &[usize], lower: &[f64], upper: &[f64], mask: Vec<bool>) -> Result<Self, GeomError> {
        let dim = shape.len();
        if !(2..=4).contains(&dim) {
            return Err(GeomError::BadGrid(format!("dimension {dim} not in 2..=4")));
        }
        if lower.len() != dim || upper.len() != dim {
            return Err(GeomError::BadGrid("bounds do not match dimension".into()));
        }
        if shape.contains(&0) {
            return Err(GeomError::BadGrid("zero cells along an axis".into()));
        }
        let spacing: Vec<f64> = (0..dim).map(|a| (upper[a] - lower[a]) / shape[a] as f64).collect();
        if spacing.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
            return Err(GeomError::BadGrid("non-positive spacing".into()));
        }
        let total: usize = shape.iter().product();
        if mask.len() != total {
            return Err(GeomError::BadGrid(format!("mask has {} entries, grid has {total}", mask.len())));
        }
        let mut active_of_linear = vec![None; total];
        let mut linear_of_active = Vec::new();
        for (lin, &on) in mask.iter().enumerate() {
            if on {
                active_of_linear[lin] = Some(linear_of_active.len());
                linear_of_active.push(lin);
            }
        }
        if linear_of_active.is_empty() {
            return Err(GeomError::BadGrid("no active cells".into()));
        }
        let mut grid = Self {
            shape: shape.to_vec(),
            spacing,
            lower: lower.to_vec(),
            active_of_linear,
            linear_of_active,
            faces: Vec::new(),
        };
        grid.faces = grid.build_faces();
        Ok(grid)
    }

    fn build_faces(&self) -> Vec<Face> {
        let mut faces = Vec::new();
        let strides = self.strides();
        for axis in 0..self.dim() {
            for (minus, &lin) in self.linear_of_active.iter().enumerate() {
                let idx = self.multi_index(lin);
                if idx[axis] + 1 < self.shape[axis] {
                    if let Some(plus) = self.active_of_linear[lin + strides[axis]] {
                        faces.push(Face { axis, minus, plus });
                    }
                }
            }
        }
        faces
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.dim()];
        for a in 1..self.dim() {
            s[a] = s[a - 1] * self.shape[a - 1];
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> Vec<f64> {
        (0..self.dim()).map(|a| self.lower[a] + self.spacing[a] * self.shape[a] as f64).collect()
    }

    pub fn num_cells(&self) -> usize {
        self.linear_of_active.len()
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// |f| for faces normal to `axis`.
    pub fn face_area(&self, axis: usize) -> f64 {
        self.cell_volume() / self.spacing[axis]
    }

    pub fn multi_index(&self, linear: usize) -> Vec<usize> {
        let mut rem = linear;
        self.shape
            .iter()
            .map(|&n| {
                let i = rem % n;
                rem /= n;
                i
            })
            .collect()
    }

    pub fn linear_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(self.strides()).map(|(i, s)| i * s).sum()
    }

    /// Multi-index of an active cell.
    pub fn cell_index(&self, cell: usize) -> Vec<usize> {
        self.multi_index(self.linear_of_active[cell])
    }

    /// Active index of the cell with the given multi-index, if active.
    pub fn active_cell(&self, idx: &[usize]) -> Option<usize> {
        self.active_of_linear[self.linear_index(idx)]
    }

    pub fn cell_lower(&self, cell: usize) -> Vec<f64> {
        self.cell_index(cell)
            .iter()
            .enumerate()
            .map(|(a, &i)| self.lower[a] + i as f64 * self.spacing[a])
            .collect()
    }

    pub fn cell_center(&self, cell: usize) -> Vec<f64> {
        self.cell_index(cell)
            .iter()
            .enumerate()
            .map(|(a, &i)| self.lower[a] + (i as f64 + 0.5) * self.spacing[a])
            .collect()
    }

    /// Center point of an interior face.
    pub fn face_center(&self, face: &Face) -> Vec<f64> {
        let mut c = self.cell_center(face.minus);
        c[face.axis] += 0.5 * self.spacing[face.axis];
        c
    }

    /// Cell containing `x`, points on the upper boundary belonging to the last cell.
    pub fn locate(&self, x: &[f64]) -> Option<Vec<usize>> {
        if x.len() != self.dim() {
            return None;
        }
        let mut idx = Vec::with_capacity(self.dim());
        for a in 0..self.dim() {
            let t = (x[a] - self.lower[a]) / self.spacing[a];
            if !(t >= 0.0 && t <= self.shape[a] as f64) {
                return None;
            }
            idx.push((t.floor() as usize).min(self.shape[a] - 1));
        }
        Some(idx)
    }

    /// Faces of active cells that have no active neighbour across them.
    pub fn boundary_faces(&self) -> Vec<BoundaryFace> {
        let strides = self.strides();
        let mut out = Vec::new();
        for axis in 0..self.dim() {
            for (cell, &lin) in self.linear_of_active.iter().enumerate() {
                let idx = self.multi_index(lin);
                let below = idx[axis] == 0 || self.active_of_linear[lin - strides[axis]].is_none();
                let above =
                    idx[axis] + 1 == self.shape[axis] || self.active_of_linear[lin + strides[axis]].is_none();
                if below {
                    out.push(BoundaryFace { axis, cell, positive_side: false });
                }
                if above {
                    out.push(BoundaryFace { axis, cell, positive_side: true });
                }
            }
        }
        out
    }

    /// Number of connected components of the active cells under face adjacency.
    pub fn active_components(&self) -> usize {
        let n = self.num_cells();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut comps = n;
        for f in &self.faces {
            let (a, b) = (find(&mut parent, f.minus), find(&mut parent, f.plus));
            if a != b {
                parent[a] = b;
                comps -= 1;
            }
        }
        comps
    }
}
