//! Built-in benchmark configurations.

use crate::geom::{build_forest, Compartment, EdgeSpec, Node, NodeKind, Side, TransferProfile};
use crate::model::{AxisCells, CaseSpec, GridSpec, RadialParams, ReferenceKind, SourceSpec, TransferSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Case1Variant {
    /// Transfer decaying smoothly to zero at r1.
    A,
    /// Transfer switching off abruptly at r1.
    B,
}

/// Unit square centred at the origin, one Dirichlet root feeding one terminal
/// at the origin, and a sink annulus between r2 and r3.
pub fn case1(variant: Case1Variant) -> CaseSpec {
    let r0 = match variant {
        Case1Variant::A => 0.1,
        Case1Variant::B => 0.2,
    };
    let params = RadialParams { r0, r1: 0.2, r2: 0.3, r3: 0.4, kt0: 1.0, kd: 1.0, kn: 1.0, rd0: 1.0, pn0: 0.0 };
    let forest = build_forest(
        vec![
            Node { id: 0, kind: NodeKind::DirichletRoot { pressure: params.pn0 } },
            Node { id: 1, kind: NodeKind::Terminal { anchor: vec![0.0, 0.0] } },
        ],
        &[EdgeSpec::new(0, 1, params.kn)],
    )
    .expect("two-node tree is valid");
    let name = match variant {
        Case1Variant::A => "case1a",
        Case1Variant::B => "case1b",
    };
    CaseSpec {
        name: name.into(),
        grid: GridSpec { lower: vec![-0.5, -0.5], upper: vec![0.5, 0.5], cells: vec![AxisCells::Refined; 2] },
        forest,
        kd: vec![params.kd; 2],
        transfers: vec![TransferSpec {
            terminal: 1,
            profile: TransferProfile::new(params.kt0, params.r0, params.r1).expect("valid profile"),
            compartment: None,
        }],
        source: SourceSpec::Annulus { center: vec![0.0, 0.0], r2: params.r2, r3: params.r3, rd0: params.rd0 },
        node_sources: Vec::new(),
        reference: ReferenceKind::Series(params),
    }
}

pub const CASE2_ARTERIAL_ANCHORS: [[f64; 3]; 2] = [[0.43, 0.25, 0.5], [0.37, 0.75, 0.5]];
pub const CASE2_VENOUS_ANCHORS: [[f64; 3]; 2] = [[0.63, 0.25, 0.5], [0.57, 0.75, 0.5]];

/// Two-compartment model on the unit 4-cube: an arterial and a venous
/// Y-shaped tree, the fourth axis split into two cells.
///
/// Node ids: arterial root 0, junction 1, terminals 2 and 3; venous root 4,
/// junction 5, terminals 6 and 7.
pub fn case2() -> CaseSpec {
    let profile = TransferProfile::new(1.0, 0.1, 0.2).expect("valid profile");
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut transfers = Vec::new();
    for (tree, (pressure, anchors, side)) in
        [(1.0, CASE2_ARTERIAL_ANCHORS, Side::Below), (0.0, CASE2_VENOUS_ANCHORS, Side::Above)].into_iter().enumerate()
    {
        let base = 4 * tree;
        nodes.push(Node { id: base, kind: NodeKind::DirichletRoot { pressure } });
        nodes.push(Node { id: base + 1, kind: NodeKind::Interior });
        edges.push(EdgeSpec::new(base, base + 1, 1.0));
        for (k, anchor) in anchors.iter().enumerate() {
            let id = base + 2 + k;
            nodes.push(Node { id, kind: NodeKind::Terminal { anchor: anchor.to_vec() } });
            edges.push(EdgeSpec::new(base + 1, id, 1.0));
            transfers.push(TransferSpec {
                terminal: id,
                profile,
                compartment: Some(Compartment { axis: 3, side, threshold: 0.5 }),
            });
        }
    }
    let forest = build_forest(nodes, &edges).expect("Y-trees are valid");
    CaseSpec {
        name: "case2".into(),
        grid: GridSpec {
            lower: vec![0.0; 4],
            upper: vec![1.0; 4],
            cells: vec![AxisCells::Refined, AxisCells::Refined, AxisCells::Refined, AxisCells::Fixed(2)],
        },
        forest,
        kd: vec![1.0; 4],
        transfers,
        source: SourceSpec::None,
        node_sources: Vec::new(),
        reference: ReferenceKind::FineGrid { inv_h: 64 },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn radii(c: &CaseSpec) -> (f64, f64, f64, f64) {
        match c.reference {
            ReferenceKind::Series(p) => (p.r0, p.r1, p.r2, p.r3),
            _ => panic!("case 1 has a series reference"),
        }
    }

    #[test]
    fn case1_radii() {
        assert_eq!(radii(&case1(Case1Variant::A)), (0.1, 0.2, 0.3, 0.4));
        assert_eq!(radii(&case1(Case1Variant::B)), (0.2, 0.2, 0.3, 0.4));
    }

    #[test]
    fn case1_source_value() {
        let c = case1(Case1Variant::A);
        let v = c.source.density(&[0.35, 0.0]);
        assert!((v - 2.5e-3).abs() < 1e-15);
        assert_eq!(c.source.density(&[0.25, 0.0]), 0.0);
    }

    #[test]
    fn case1_variants_differ_only_in_r0() {
        let mut a = case1(Case1Variant::A);
        let b = case1(Case1Variant::B);
        assert_ne!(a, b);
        a.name = b.name.clone();
        a.transfers[0].profile.r0 = 0.2;
        if let ReferenceKind::Series(p) = &mut a.reference {
            p.r0 = 0.2;
        }
        assert_eq!(a, b);
        a.validate().unwrap();
    }

    #[test]
    fn case2_layout() {
        let c = case2();
        c.validate().unwrap();
        assert_eq!(c.forest.terminals().count(), 4);
        assert_eq!(c.forest.num_trees(), 2);
        assert_eq!(c.forest.node(2).kind, NodeKind::Terminal { anchor: vec![0.43, 0.25, 0.5] });
        assert_eq!(c.grid.shape(8).unwrap(), vec![8, 8, 8, 2]);
        let dirichlet: Vec<_> = c.forest.dirichlet_roots().collect();
        assert_eq!(dirichlet, vec![(0, 1.0), (4, 0.0)]);
    }

    #[test]
    fn case2_supports_stay_in_their_compartment() {
        let c = case2();
        let p = c.discretize(8, 2).unwrap();
        let mut arterial = 0;
        let mut venous = 0;
        for s in &p.coefficients.supports {
            let below = s.terminal < 4;
            for &cell in &s.cells {
                let x4 = p.grid.cell_center(cell)[3];
                assert_eq!(x4 < 0.5, below, "terminal {} leaks across compartments", s.terminal);
            }
            if below {
                arterial += s.len();
            } else {
                venous += s.len();
            }
        }
        assert!(arterial > 0 && venous > 0);
        // the two compartments partition the cells
        let lower = (0..p.grid.num_cells()).filter(|&c| p.grid.cell_center(c)[3] < 0.5).count();
        assert_eq!(2 * lower, p.grid.num_cells());
    }
}
