use std::collections::VecDeque;

use crate::geom::GeomError;
use crate::sparse::{CsrMatrix, TripletBuilder};

pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq)]
pub enum NodeKind {
    /// Root with prescribed pressure.
    DirichletRoot { pressure: f64 },
    /// Root whose inflow enters through the node source.
    NeumannRoot,
    Interior,
    /// Leaf exchanging fluid with the domain around `anchor`.
    Terminal { anchor: Vec<f64> },
}

impl NodeKind {
    pub fn is_root(&self) -> bool {
        matches!(self, NodeKind::DirichletRoot { .. } | NodeKind::NeumannRoot)
    }

    pub fn is_dirichlet(&self) -> bool {
        matches!(self, NodeKind::DirichletRoot { .. })
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self, NodeKind::Terminal { .. })
    }

    pub fn dirichlet_value(&self) -> Option<f64> {
        match self {
            NodeKind::DirichletRoot { pressure } => Some(*pressure),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeSpec {
    pub tail: NodeId,
    pub head: NodeId,
    pub conductivity: f64,
}

impl EdgeSpec {
    pub fn new(tail: NodeId, head: NodeId, conductivity: f64) -> Self {
        Self { tail, head, conductivity }
    }
}

/// An edge oriented from the root side (tail) to the terminal side (head).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub tail: NodeId,
    pub head: NodeId,
    pub conductivity: f64,
}

/// Validated collection of rooted trees.
///
/// Node ids are dense (`0..n`). Edges keep their input order but are
/// re-oriented so that every tail is closer to its tree's root than its head.
#[derive(Clone, Debug, PartialEq)]
pub struct Forest {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    tree_of: Vec<usize>,
    roots: Vec<NodeId>,
    degree: Vec<usize>,
    /// Column of each node in the pressure unknowns; `None` for Dirichlet roots.
    unknown: Vec<Option<usize>>,
    unknown_nodes: Vec<NodeId>,
}

impl Forest {
    pub fn empty() -> Self {
        Self {
            nodes: Vec::new(),
            edges: Vec::new(),
            tree_of: Vec::new(),
            roots: Vec::new(),
            degree: Vec::new(),
            unknown: Vec::new(),
            unknown_nodes: Vec::new(),
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_trees(&self) -> usize {
        self.roots.len()
    }

    pub fn tree_of(&self, id: NodeId) -> usize {
        self.tree_of[id]
    }

    pub fn root_of_tree(&self, tree: usize) -> NodeId {
        self.roots[tree]
    }

    pub fn degree(&self, id: NodeId) -> usize {
        self.degree[id]
    }

    pub fn terminals(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.kind.is_terminal())
    }

    pub fn dirichlet_roots(&self) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.nodes.iter().filter_map(|n| n.kind.dirichlet_value().map(|p| (n.id, p)))
    }

    pub fn has_dirichlet_root(&self) -> bool {
        self.dirichlet_roots().next().is_some()
    }

    /// Position of a node among the non-Dirichlet unknowns.
    pub fn unknown_index(&self, id: NodeId) -> Option<usize> {
        self.unknown[id]
    }

    /// Non-Dirichlet node ids in unknown order.
    pub fn unknown_nodes(&self) -> &[NodeId] {
        &self.unknown_nodes
    }

    pub fn num_unknowns(&self) -> usize {
        self.unknown_nodes.len()
    }

    /// Signed incidence with the Dirichlet root columns removed.
    pub fn incidence(&self) -> SignedIncidence {
        let mut b = TripletBuilder::new(self.edges.len(), self.unknown_nodes.len());
        for (l, e) in self.edges.iter().enumerate() {
            if let Some(c) = self.unknown[e.tail] {
                b.push(l, c, 1.0);
            }
            if let Some(c) = self.unknown[e.head] {
                b.push(l, c, -1.0);
            }
        }
        SignedIncidence { matrix: b.build(), columns: self.unknown_nodes.clone() }
    }
}

/// Edge × non-Dirichlet-node incidence: +1 at the tail, −1 at the head.
#[derive(Clone, Debug, PartialEq)]
pub struct SignedIncidence {
    pub matrix: CsrMatrix,
    /// Node id of each column.
    pub columns: Vec<NodeId>,
}

impl SignedIncidence {
    /// Discrete gradient of node values (given in column order).
    pub fn gradient(&self, p: &[f64]) -> Vec<f64> {
        self.matrix.mul_vec(p)
    }

    /// Discrete divergence of edge values.
    pub fn divergence(&self, q: &[f64]) -> Vec<f64> {
        self.matrix.mul_transpose_vec(q)
    }
}

/// Validate node and edge lists and build the forest.
pub fn build_forest(nodes: Vec<Node>, edges: &[EdgeSpec]) -> Result<Forest, GeomError> {
    let n = nodes.len();
    let mut sorted: Vec<Option<Node>> = vec![None; n];
    for node in nodes {
        if node.id >= n {
            return Err(GeomError::NonContiguousIds { id: node.id, count: n });
        }
        let id = node.id;
        if sorted[id].replace(node).is_some() {
            return Err(GeomError::DuplicateNode(id));
        }
    }
    let nodes: Vec<Node> = sorted.into_iter().map(|n| n.expect("all ids present")).collect();

    let mut adjacency: Vec<Vec<(NodeId, usize)>> = vec![Vec::new(); n];
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (l, e) in edges.iter().enumerate() {
        for id in [e.tail, e.head] {
            if id >= n {
                return Err(GeomError::UnknownNode(id));
            }
        }
        if !(e.conductivity > 0.0) || !e.conductivity.is_finite() {
            return Err(GeomError::NonPositiveConductivity { edge: l, value: e.conductivity });
        }
        let (a, b) = (find(&mut parent, e.tail), find(&mut parent, e.head));
        if a == b {
            return Err(GeomError::Cycle { edge: l, tail: e.tail, head: e.head });
        }
        parent[a] = b;
        adjacency[e.tail].push((e.head, l));
        adjacency[e.head].push((e.tail, l));
    }
    let degree: Vec<usize> = adjacency.iter().map(Vec::len).collect();

    for node in &nodes {
        let needs_leaf = node.kind.is_root() || node.kind.is_terminal();
        if needs_leaf && degree[node.id] != 1 {
            return Err(GeomError::BadDegree { node: node.id, degree: degree[node.id] });
        }
        if let NodeKind::DirichletRoot { pressure } = node.kind {
            if !pressure.is_finite() {
                return Err(GeomError::InvalidValue(format!("Dirichlet value of node {}", node.id)));
            }
        }
    }

    // one root per component; orient edges away from it
    let mut tree_of = vec![usize::MAX; n];
    let mut roots = Vec::new();
    let mut oriented: Vec<Option<Edge>> = vec![None; edges.len()];
    for root in nodes.iter().filter(|n| n.kind.is_root()) {
        if tree_of[root.id] != usize::MAX {
            return Err(GeomError::MultipleRoots { tree_root: roots[tree_of[root.id]], other: root.id });
        }
        let t = roots.len();
        roots.push(root.id);
        tree_of[root.id] = t;
        let mut queue = VecDeque::from([root.id]);
        while let Some(u) = queue.pop_front() {
            for &(v, l) in &adjacency[u] {
                if tree_of[v] == usize::MAX {
                    tree_of[v] = t;
                    oriented[l] = Some(Edge { tail: u, head: v, conductivity: edges[l].conductivity });
                    queue.push_back(v);
                } else if tree_of[v] == t && oriented[l].is_none() {
                    unreachable!("acyclic graph cannot revisit within a tree");
                } else if tree_of[v] != t {
                    return Err(GeomError::MultipleRoots { tree_root: roots[tree_of[v]], other: root.id });
                }
            }
        }
    }
    if let Some(orphan) = (0..n).find(|&i| tree_of[i] == usize::MAX) {
        return Err(GeomError::NoRoot(orphan));
    }
    let edges: Vec<Edge> = oriented.into_iter().map(|e| e.expect("every edge reached")).collect();
    debug_assert_eq!(edges.len() + roots.len(), n);

    let mut unknown = vec![None; n];
    let mut unknown_nodes = Vec::new();
    for node in &nodes {
        if !node.kind.is_dirichlet() {
            unknown[node.id] = Some(unknown_nodes.len());
            unknown_nodes.push(node.id);
        }
    }
    Ok(Forest { nodes, edges, tree_of, roots, degree, unknown, unknown_nodes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(id: usize, kind: NodeKind) -> Node {
        Node { id, kind }
    }

    fn terminal(id: usize) -> Node {
        node(id, NodeKind::Terminal { anchor: vec![0.0, 0.0] })
    }

    pub(crate) fn y_tree(root: NodeKind) -> Forest {
        build_forest(
            vec![node(0, root), node(1, NodeKind::Interior), terminal(2), terminal(3)],
            &[EdgeSpec::new(0, 1, 1.0), EdgeSpec::new(1, 2, 1.0), EdgeSpec::new(1, 3, 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn two_node_tree() {
        let f = build_forest(
            vec![node(0, NodeKind::DirichletRoot { pressure: 0.0 }), terminal(1)],
            &[EdgeSpec::new(0, 1, 1.0)],
        )
        .unwrap();
        assert_eq!(f.num_trees(), 1);
        assert_eq!(f.num_unknowns(), 1);
        let g = f.incidence();
        assert_eq!(g.matrix.to_dense(), vec![vec![-1.0]]);
    }

    #[test]
    fn y_tree_incidence() {
        let f = y_tree(NodeKind::DirichletRoot { pressure: 1.0 });
        let g = f.incidence().matrix;
        assert_eq!((g.nrows(), g.ncols()), (3, 3));
        assert_eq!(g.row(0).1, &[-1.0]);
        for l in 1..3 {
            let (_, v) = g.row(l);
            assert_eq!(v.len(), 2);
            assert_eq!(v.iter().sum::<f64>(), 0.0);
        }
    }

    #[test]
    fn neumann_rows_sum_to_zero_and_kill_constants() {
        let f = y_tree(NodeKind::NeumannRoot);
        let g = f.incidence();
        assert_eq!(g.matrix.ncols(), 4);
        assert!(g.gradient(&[1.0; 4]).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn reversed_edges_are_reoriented() {
        let f = build_forest(
            vec![node(0, NodeKind::NeumannRoot), node(1, NodeKind::Interior), terminal(2)],
            &[EdgeSpec::new(2, 1, 1.0), EdgeSpec::new(1, 0, 2.0)],
        )
        .unwrap();
        assert_eq!(f.edges()[0].tail, 1);
        assert_eq!(f.edges()[0].head, 2);
        assert_eq!(f.edges()[1].tail, 0);
        assert_eq!(f.edges()[1].conductivity, 2.0);
    }

    #[test]
    fn two_node_cycle_rejected() {
        let err = build_forest(
            vec![node(0, NodeKind::NeumannRoot), terminal(1)],
            &[EdgeSpec::new(0, 1, 1.0), EdgeSpec::new(1, 0, 1.0)],
        )
        .unwrap_err();
        assert!(matches!(err, GeomError::Cycle { .. }));
    }

    #[test]
    fn validation_errors() {
        let two_roots = build_forest(
            vec![node(0, NodeKind::NeumannRoot), node(1, NodeKind::Interior), node(2, NodeKind::NeumannRoot)],
            &[EdgeSpec::new(0, 1, 1.0), EdgeSpec::new(1, 2, 1.0)],
        );
        assert!(matches!(two_roots, Err(GeomError::MultipleRoots { .. })));

        let fat_terminal = build_forest(
            vec![node(0, NodeKind::NeumannRoot), terminal(1), terminal(2), terminal(3)],
            &[EdgeSpec::new(0, 1, 1.0), EdgeSpec::new(1, 2, 1.0), EdgeSpec::new(1, 3, 1.0)],
        );
        assert!(matches!(fat_terminal, Err(GeomError::BadDegree { node: 1, degree: 3 })));

        let bad_k = build_forest(vec![node(0, NodeKind::NeumannRoot), terminal(1)], &[EdgeSpec::new(0, 1, 0.0)]);
        assert!(matches!(bad_k, Err(GeomError::NonPositiveConductivity { .. })));

        let rootless = build_forest(
            vec![node(0, NodeKind::NeumannRoot), terminal(1), node(2, NodeKind::Interior), terminal(3)],
            &[EdgeSpec::new(0, 1, 1.0), EdgeSpec::new(2, 3, 1.0)],
        );
        assert!(matches!(rootless, Err(GeomError::NoRoot(_))));
    }

    #[test]
    fn edge_count_matches_trees() {
        let f = y_tree(NodeKind::NeumannRoot);
        assert_eq!(f.num_edges(), f.num_nodes() - f.num_trees());
    }
}
