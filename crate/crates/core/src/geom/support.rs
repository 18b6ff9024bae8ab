use crate::geom::{CartesianGrid, GeomError, NodeId};
use crate::model::scaled_coefficient;
use crate::quadrature::BoxRule;

/// Radial transfer profile: `kt0` inside `r0`, decaying as
/// `kt0·a0²(r1² − r²)/r²` up to `r1`, zero beyond. With `r0 == r1` this is a
/// plain indicator of the disc.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferProfile {
    pub kt0: f64,
    pub r0: f64,
    pub r1: f64,
}

impl TransferProfile {
    pub fn new(kt0: f64, r0: f64, r1: f64) -> Result<Self, GeomError> {
        if !(kt0 > 0.0) || !(r0 > 0.0) || !(r1 >= r0) || !r1.is_finite() {
            return Err(GeomError::InvalidValue(format!("transfer profile kt0={kt0} r0={r0} r1={r1}")));
        }
        Ok(Self { kt0, r0, r1 })
    }

    /// a0² = r0²/(r1² − r0²); infinite for the indicator profile.
    pub fn a0_squared(&self) -> f64 {
        if self.r0 == self.r1 {
            f64::INFINITY
        } else {
            self.r0 * self.r0 / (self.r1 * self.r1 - self.r0 * self.r0)
        }
    }

    /// Transfer permeability kT(r).
    pub fn transfer(&self, r: f64) -> f64 {
        if r <= self.r0 {
            self.kt0
        } else if r <= self.r1 {
            self.kt0 * self.a0_squared() * (self.r1 * self.r1 - r * r) / (r * r)
        } else {
            0.0
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Below,
    Above,
}

/// Half-space restriction `x[axis] < threshold` (Below) or `> threshold` (Above).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Compartment {
    pub axis: usize,
    pub side: Side,
    pub threshold: f64,
}

impl Compartment {
    pub fn contains(&self, x: &[f64]) -> bool {
        match self.side {
            Side::Below => x[self.axis] < self.threshold,
            Side::Above => x[self.axis] > self.threshold,
        }
    }
}

/// Where a terminal's transfer field lives: distance is measured from
/// `anchor` over the first `anchor.len()` axes only.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportGeometry {
    pub anchor: Vec<f64>,
    pub compartment: Option<Compartment>,
}

impl SupportGeometry {
    pub fn radial(anchor: Vec<f64>) -> Self {
        Self { anchor, compartment: None }
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        self.anchor.iter().zip(x).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt()
    }
}

/// Cells carrying a terminal's scaled transfer coefficient.
///
/// Stores the cell integrals ∫_τ kS dx, which is all the discretization uses.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportRegion {
    pub terminal: NodeId,
    pub cells: Vec<usize>,
    pub ks_integral: Vec<f64>,
}

impl SupportRegion {
    /// Support from an explicit per-cell table of kS integrals. Zero entries are dropped.
    pub fn from_cells(terminal: NodeId, cells: Vec<usize>, ks_integral: Vec<f64>) -> Result<Self, GeomError> {
        if cells.len() != ks_integral.len() {
            return Err(GeomError::InvalidValue("support cells and values differ in length".into()));
        }
        if ks_integral.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(GeomError::InvalidValue(format!("negative kS on support of terminal {terminal}")));
        }
        let (cells, ks_integral): (Vec<_>, Vec<_>) =
            cells.into_iter().zip(ks_integral).filter(|(_, v)| *v > 0.0).unzip();
        let region = Self { terminal, cells, ks_integral };
        if region.total() <= 0.0 {
            return Err(GeomError::EmptySupport(terminal));
        }
        Ok(region)
    }

    /// c_{kS} = ∫_B kS dx.
    pub fn total(&self) -> f64 {
        self.ks_integral.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Cell-mean kS values.
    pub fn ks_mean(&self, grid: &CartesianGrid) -> Vec<f64> {
        let vol = grid.cell_volume();
        self.ks_integral.iter().map(|v| v / vol).collect()
    }
}

/// Evaluate kS = √kT by tensor Gauss quadrature on every cell near the anchor.
pub fn build_support(
    grid: &CartesianGrid,
    terminal: NodeId,
    geometry: &SupportGeometry,
    profile: &TransferProfile,
    points_per_axis: usize,
) -> Result<SupportRegion, GeomError> {
    let dim = grid.dim();
    let m = geometry.anchor.len();
    if m == 0 || m > dim {
        return Err(GeomError::InvalidValue(format!("anchor of terminal {terminal} has {m} coordinates")));
    }
    let upper = grid.upper();
    for a in 0..m {
        let x = geometry.anchor[a];
        if !(x >= grid.lower()[a] && x <= upper[a]) {
            return Err(GeomError::AnchorOutside(terminal));
        }
    }
    if m == dim {
        let inside = grid.locate(&geometry.anchor).and_then(|idx| grid.active_cell(&idx));
        if inside.is_none() {
            return Err(GeomError::AnchorOutside(terminal));
        }
    }
    if let Some(c) = geometry.compartment {
        if c.axis >= dim {
            return Err(GeomError::InvalidValue(format!("compartment axis {} out of range", c.axis)));
        }
    }

    // index box covering the disc in the radial axes, everything elsewhere
    let h = grid.spacing();
    let shape = grid.shape();
    let mut lo = vec![0usize; dim];
    let mut hi: Vec<usize> = shape.to_vec();
    for a in 0..m {
        let l = ((geometry.anchor[a] - profile.r1 - grid.lower()[a]) / h[a]).floor();
        let u = ((geometry.anchor[a] + profile.r1 - grid.lower()[a]) / h[a]).floor() + 1.0;
        lo[a] = l.max(0.0) as usize;
        hi[a] = (u.max(0.0) as usize).min(shape[a]);
    }

    let rule = BoxRule::new(dim, points_per_axis);
    let mut cells = Vec::new();
    let mut values = Vec::new();
    let mut idx = lo.clone();
    if lo.iter().zip(&hi).any(|(l, h)| l >= h) {
        return Err(GeomError::EmptySupport(terminal));
    }
    loop {
        if let Some(cell) = grid.active_cell(&idx) {
            let cl = grid.cell_lower(cell);
            // nearest point of the cell to the anchor, radial axes only
            let gap: f64 = (0..m)
                .map(|a| {
                    let d = (geometry.anchor[a] - cl[a]).clamp(0.0, h[a]);
                    let near = cl[a] + d;
                    (near - geometry.anchor[a]).powi(2)
                })
                .sum::<f64>()
                .sqrt();
            if gap <= profile.r1 {
                let v = rule.integrate(&cl, h, |x| {
                    if geometry.compartment.is_some_and(|c| !c.contains(x)) {
                        return 0.0;
                    }
                    let kt = profile.transfer(geometry.distance(x));
                    scaled_coefficient(kt).expect("profile is non-negative")
                });
                if v > 0.0 {
                    cells.push(cell);
                    values.push(v);
                }
            }
        }
        // advance the multi-index over [lo, hi)
        let mut a = 0;
        loop {
            idx[a] += 1;
            if idx[a] < hi[a] {
                break;
            }
            idx[a] = lo[a];
            a += 1;
            if a == dim {
                return SupportRegion::from_cells(terminal, cells, values);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_values() {
        let p = TransferProfile::new(1.0, 0.1, 0.2).unwrap();
        assert!((p.a0_squared() - 1.0 / 3.0).abs() < 1e-15);
        // (1/3)(0.04 - 0.0225)/0.0225
        assert!((p.transfer(0.15) - 0.259_259_259_259_259_3).abs() < 1e-15);
        let below = p.transfer(0.1);
        let above = p.transfer(0.1 + 1e-12);
        assert!((below - above).abs() < 1e-10);
        assert_eq!(p.transfer(0.2), 0.0);
        assert_eq!(p.transfer(0.21), 0.0);
    }

    #[test]
    fn heaviside_profile() {
        let p = TransferProfile::new(1.0, 0.2, 0.2).unwrap();
        assert_eq!(p.transfer(0.2), 1.0);
        assert_eq!(p.transfer(0.2000001), 0.0);
        assert_eq!(p.transfer(0.0), 1.0);
    }

    #[test]
    fn indicator_support_is_piecewise_constant() {
        let g = CartesianGrid::brick(&[16, 16], &[-0.5, -0.5], &[0.5, 0.5]).unwrap();
        let p = TransferProfile::new(1.0, 0.2, 0.2).unwrap();
        let s = build_support(&g, 1, &SupportGeometry::radial(vec![0.0, 0.0]), &p, 2).unwrap();
        let vol = g.cell_volume();
        // full cells carry exactly kS·vol = vol
        let full = s.ks_integral.iter().filter(|v| (**v - vol).abs() < 1e-15).count();
        assert!(full > 0);
        assert!(s.ks_integral.iter().all(|v| *v <= vol + 1e-15));
        assert!(s.total() > 0.0);
    }

    #[test]
    fn compartment_restriction() {
        let g = CartesianGrid::brick(&[8, 8, 8, 2], &[0.0; 4], &[1.0; 4]).unwrap();
        let p = TransferProfile::new(1.0, 0.1, 0.2).unwrap();
        let geo = SupportGeometry {
            anchor: vec![0.63, 0.25, 0.5],
            compartment: Some(Compartment { axis: 3, side: Side::Above, threshold: 0.5 }),
        };
        let s = build_support(&g, 6, &geo, &p, 2).unwrap();
        assert!(s.cells.iter().all(|&c| g.cell_center(c)[3] > 0.5));
    }

    #[test]
    fn anchor_outside_rejected() {
        let g = CartesianGrid::brick(&[4, 4], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let p = TransferProfile::new(1.0, 0.1, 0.2).unwrap();
        let err = build_support(&g, 0, &SupportGeometry::radial(vec![1.5, 0.5]), &p, 2).unwrap_err();
        assert!(matches!(err, GeomError::AnchorOutside(0)));
    }

    #[test]
    fn empty_table_rejected() {
        assert!(matches!(SupportRegion::from_cells(3, vec![0, 1], vec![0.0, 0.0]), Err(GeomError::EmptySupport(3))));
    }
}
