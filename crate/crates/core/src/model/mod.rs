//! Coefficients, sources and case descriptions.

mod cases;
mod config;

pub use cases::{case1, case2, Case1Variant};
pub use config::{parse_case_config, write_case_config};

use thiserror::Error;

use crate::geom::{
    build_support, CartesianGrid, Compartment, Forest, GeomError, NodeId, NodeKind, SupportGeometry, SupportRegion,
    TransferProfile,
};
use crate::quadrature::BoxRule;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("negative transfer coefficient {0}")]
    NegativeTransfer(f64),
    #[error("invalid case: {0}")]
    Invalid(String),
    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// kS = √kT at a point.
pub fn scaled_coefficient(kt: f64) -> Result<f64, ModelError> {
    if kt < 0.0 || kt.is_nan() {
        return Err(ModelError::NegativeTransfer(kt));
    }
    Ok(kt.sqrt())
}

/// Cellwise kS = √kT for a user-supplied table of transfer values.
pub fn scale_transfer(kt: &[f64]) -> Result<Vec<f64>, ModelError> {
    kt.iter().map(|&v| scaled_coefficient(v)).collect()
}

/// Per-cell material data on a discretized case.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientField {
    dim: usize,
    /// Axis-aligned permeability, `dim` entries per active cell. The last
    /// axis of a two-compartment model holds the perfusion coefficient.
    kd: Vec<f64>,
    /// One support per terminal node, ordered by node id.
    pub supports: Vec<SupportRegion>,
    /// ∫_τ rD dx per active cell.
    pub source: Vec<f64>,
    /// Node sources rN by node id; entries of Dirichlet roots are ignored.
    pub node_source: Vec<f64>,
}

impl CoefficientField {
    pub fn new(
        grid: &CartesianGrid,
        forest: &Forest,
        kd: Vec<f64>,
        supports: Vec<SupportRegion>,
        source: Vec<f64>,
        node_source: Vec<f64>,
    ) -> Result<Self, ModelError> {
        let field = Self { dim: grid.dim(), kd, supports, source, node_source };
        field.validate(grid, forest)?;
        Ok(field)
    }

    /// Constant per-axis permeability on every cell.
    pub fn uniform_kd(grid: &CartesianGrid, per_axis: &[f64]) -> Vec<f64> {
        let mut kd = Vec::with_capacity(grid.num_cells() * grid.dim());
        for _ in 0..grid.num_cells() {
            kd.extend_from_slice(per_axis);
        }
        kd
    }

    pub fn kd(&self, cell: usize, axis: usize) -> f64 {
        self.kd[cell * self.dim + axis]
    }

    pub fn support_of(&self, terminal: NodeId) -> Option<&SupportRegion> {
        self.supports.iter().find(|s| s.terminal == terminal)
    }

    pub fn validate(&self, grid: &CartesianGrid, forest: &Forest) -> Result<(), ModelError> {
        let n = grid.num_cells();
        if self.kd.len() != n * grid.dim() {
            return Err(ModelError::Invalid(format!("kd has {} entries, expected {}", self.kd.len(), n * grid.dim())));
        }
        if let Some(bad) = self.kd.iter().find(|k| !(**k > 0.0) || !k.is_finite()) {
            return Err(ModelError::Invalid(format!("non-positive permeability {bad}")));
        }
        if self.source.len() != n {
            return Err(ModelError::Invalid("source length differs from cell count".into()));
        }
        if self.node_source.len() != forest.num_nodes() {
            return Err(ModelError::Invalid("node source length differs from node count".into()));
        }
        for t in forest.terminals() {
            let count = self.supports.iter().filter(|s| s.terminal == t.id).count();
            if count != 1 {
                return Err(ModelError::Invalid(format!("terminal {} has {count} supports", t.id)));
            }
        }
        for s in &self.supports {
            if s.terminal >= forest.num_nodes() || !forest.node(s.terminal).kind.is_terminal() {
                return Err(ModelError::Invalid(format!("support attached to non-terminal node {}", s.terminal)));
            }
            if s.total() <= 0.0 {
                return Err(GeomError::EmptySupport(s.terminal).into());
            }
            if s.cells.iter().any(|&c| c >= n) {
                return Err(ModelError::Invalid("support cell out of range".into()));
            }
        }
        Ok(())
    }
}

/// Cells along one axis, either following the refinement level or fixed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AxisCells {
    /// `inv_h × extent` cells.
    Refined,
    Fixed(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub cells: Vec<AxisCells>,
}

impl GridSpec {
    pub fn shape(&self, inv_h: usize) -> Result<Vec<usize>, ModelError> {
        self.cells
            .iter()
            .enumerate()
            .map(|(a, c)| match *c {
                AxisCells::Fixed(n) => Ok(n),
                AxisCells::Refined => {
                    let n = inv_h as f64 * (self.upper[a] - self.lower[a]);
                    if (n - n.round()).abs() > 1e-9 || n.round() < 1.0 {
                        Err(ModelError::Invalid(format!("1/h = {inv_h} does not tile axis {a}")))
                    } else {
                        Ok(n.round() as usize)
                    }
                }
            })
            .collect()
    }

    pub fn build(&self, inv_h: usize) -> Result<CartesianGrid, ModelError> {
        Ok(CartesianGrid::brick(&self.shape(inv_h)?, &self.lower, &self.upper)?)
    }
}

/// Domain source density.
#[derive(Clone, Debug, PartialEq)]
pub enum SourceSpec {
    None,
    /// rD = rd0·(r − r2)⁺(r3 − r)⁺ around `center`.
    Annulus { center: Vec<f64>, r2: f64, r3: f64, rd0: f64 },
}

impl SourceSpec {
    pub fn density(&self, x: &[f64]) -> f64 {
        match self {
            SourceSpec::None => 0.0,
            SourceSpec::Annulus { center, r2, r3, rd0 } => {
                let r = center.iter().zip(x).map(|(c, y)| (y - c) * (y - c)).sum::<f64>().sqrt();
                rd0 * (r - r2).max(0.0) * (r3 - r).max(0.0)
            }
        }
    }
}

/// Radial transfer attached to one terminal; the anchor is the terminal's position.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferSpec {
    pub terminal: NodeId,
    pub profile: TransferProfile,
    pub compartment: Option<Compartment>,
}

/// Parameters of the radially symmetric single-edge configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialParams {
    pub r0: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub kt0: f64,
    pub kd: f64,
    pub kn: f64,
    pub rd0: f64,
    pub pn0: f64,
}

impl RadialParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let ordered = 0.0 < self.r0 && self.r0 <= self.r1 && self.r1 <= self.r2 && self.r2 < self.r3;
        if !ordered {
            return Err(ModelError::Invalid(format!(
                "radii must satisfy 0 < r0 <= r1 <= r2 < r3, got {} {} {} {}",
                self.r0, self.r1, self.r2, self.r3
            )));
        }
        if !(self.kt0 > 0.0 && self.kd > 0.0 && self.kn > 0.0) {
            return Err(ModelError::Invalid("kt0, kd, kn must be positive".into()));
        }
        if !self.rd0.is_finite() || !self.pn0.is_finite() {
            return Err(ModelError::Invalid("rd0 and pn0 must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ReferenceKind {
    Series(RadialParams),
    FineGrid { inv_h: usize },
    None,
}

/// A complete, resolution-independent problem description.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseSpec {
    pub name: String,
    pub grid: GridSpec,
    pub forest: Forest,
    /// Constant permeability per axis.
    pub kd: Vec<f64>,
    pub transfers: Vec<TransferSpec>,
    pub source: SourceSpec,
    /// Non-zero node sources.
    pub node_sources: Vec<(NodeId, f64)>,
    pub reference: ReferenceKind,
}

/// A case at one resolution, ready for assembly.
#[derive(Clone, Debug)]
pub struct Problem {
    pub grid: CartesianGrid,
    pub forest: Forest,
    pub coefficients: CoefficientField,
}

impl CaseSpec {
    pub fn dim(&self) -> usize {
        self.grid.cells.len()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let dim = self.dim();
        if self.grid.lower.len() != dim || self.grid.upper.len() != dim || self.kd.len() != dim {
            return Err(ModelError::Invalid("grid bounds, cells and kd must share one dimension".into()));
        }
        for t in self.forest.terminals() {
            let n = self.transfers.iter().filter(|s| s.terminal == t.id).count();
            if n != 1 {
                return Err(ModelError::Invalid(format!("terminal {} has {n} transfer specs", t.id)));
            }
        }
        for t in &self.transfers {
            if t.terminal >= self.forest.num_nodes() || !self.forest.node(t.terminal).kind.is_terminal() {
                return Err(ModelError::Invalid(format!("transfer on non-terminal node {}", t.terminal)));
            }
        }
        for &(id, _) in &self.node_sources {
            if id >= self.forest.num_nodes() {
                return Err(ModelError::Invalid(format!("node source on unknown node {id}")));
            }
        }
        if let ReferenceKind::Series(p) = &self.reference {
            self.check_series(p)?;
        }
        Ok(())
    }

    /// The series reference only describes one two-node Dirichlet tree with
    /// radial data centred on its terminal and the annulus inside the domain.
    fn check_series(&self, p: &RadialParams) -> Result<(), ModelError> {
        p.validate()?;
        let bad = |m: &str| Err(ModelError::Invalid(format!("series reference: {m}")));
        if self.dim() != 2 {
            return bad("needs a 2D domain");
        }
        let f = &self.forest;
        if f.num_nodes() != 2 || f.num_edges() != 1 {
            return bad("needs a single two-node tree");
        }
        let e = f.edges()[0];
        let (root, term) = (f.node(e.tail), f.node(e.head));
        let (Some(pn0), NodeKind::Terminal { anchor }) = (root.kind.dirichlet_value(), &term.kind) else {
            return bad("tree must be Dirichlet root -> terminal");
        };
        if pn0 != p.pn0 || e.conductivity != p.kn {
            return bad("root pressure or edge conductivity differs from parameters");
        }
        if self.kd.iter().any(|&k| k != p.kd) {
            return bad("permeability must be isotropic and equal to kd");
        }
        let t = &self.transfers[0];
        if t.compartment.is_some() || t.profile.r0 != p.r0 || t.profile.r1 != p.r1 || t.profile.kt0 != p.kt0 {
            return bad("transfer profile differs from parameters");
        }
        match &self.source {
            SourceSpec::Annulus { center, r2, r3, rd0 }
                if center == anchor && *r2 == p.r2 && *r3 == p.r3 && *rd0 == p.rd0 => {}
            _ => return bad("source must be the annulus around the terminal"),
        }
        if self.node_sources.iter().any(|&(_, v)| v != 0.0) {
            return bad("node sources must vanish");
        }
        for a in 0..2 {
            if anchor[a] - p.r3 < self.grid.lower[a] || anchor[a] + p.r3 > self.grid.upper[a] {
                return bad("annulus must lie inside the domain");
            }
        }
        Ok(())
    }

    /// Discretize at resolution `1/h = inv_h` with `points` Gauss points per axis.
    pub fn discretize(&self, inv_h: usize, points: usize) -> Result<Problem, ModelError> {
        self.validate()?;
        let grid = self.grid.build(inv_h)?;
        let forest = self.forest.clone();
        let kd = CoefficientField::uniform_kd(&grid, &self.kd);

        let mut transfers: Vec<&TransferSpec> = self.transfers.iter().collect();
        transfers.sort_by_key(|t| t.terminal);
        let mut supports = Vec::with_capacity(transfers.len());
        for t in transfers {
            let NodeKind::Terminal { anchor } = &forest.node(t.terminal).kind else {
                unreachable!("validated above");
            };
            let geometry = SupportGeometry { anchor: anchor.clone(), compartment: t.compartment };
            supports.push(build_support(&grid, t.terminal, &geometry, &t.profile, points)?);
        }

        let source = integrate_source(&grid, &self.source, points);
        let mut node_source = vec![0.0; forest.num_nodes()];
        for &(id, v) in &self.node_sources {
            node_source[id] += v;
        }
        let coefficients = CoefficientField::new(&grid, &forest, kd, supports, source, node_source)?;
        Ok(Problem { grid, forest, coefficients })
    }
}

/// ∫_τ rD per cell by tensor Gauss quadrature.
pub fn integrate_source(grid: &CartesianGrid, source: &SourceSpec, points: usize) -> Vec<f64> {
    match source {
        SourceSpec::None => vec![0.0; grid.num_cells()],
        SourceSpec::Annulus { center, r3, .. } => {
            let rule = BoxRule::new(grid.dim(), points);
            let h = grid.spacing().to_vec();
            (0..grid.num_cells())
                .map(|c| {
                    let lo = grid.cell_lower(c);
                    // skip cells that cannot reach the annulus
                    let gap: f64 = (0..center.len())
                        .map(|a| {
                            let near = center[a].clamp(lo[a], lo[a] + h[a]);
                            (near - center[a]).powi(2)
                        })
                        .sum::<f64>()
                        .sqrt();
                    if gap >= *r3 {
                        0.0
                    } else {
                        rule.integrate(&lo, &h, |x| source.density(x))
                    }
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling_examples() {
        assert_eq!(scaled_coefficient(4.0).unwrap(), 2.0);
        assert_eq!(scaled_coefficient(0.0).unwrap(), 0.0);
        // kT(0.15) of the decaying profile is 7/27
        let ks = scaled_coefficient(7.0 / 27.0).unwrap();
        assert!((ks - 0.509_175_077_217_315_6).abs() < 1e-15);
        assert!(matches!(scaled_coefficient(-1.0), Err(ModelError::NegativeTransfer(_))));
        assert!(scale_transfer(&[1.0, -0.5]).is_err());
    }

    proptest::proptest! {
        #[test]
        fn squaring_recovers_transfer(kt in proptest::collection::vec(0.0f64..1e3, 1..20)) {
            let ks = scale_transfer(&kt).unwrap();
            for (a, b) in kt.iter().zip(&ks) {
                proptest::prop_assert!((b * b - a).abs() <= 4.0 * f64::EPSILON * a.max(f64::MIN_POSITIVE));
            }
        }
    }
}
