//! Mixed-dimensional geometry: the forest of rooted trees, the Cartesian
//! grid of the porous domain, and the terminal support regions that couple
//! the two.

mod forest;
mod forest_io;
mod grid;
mod support;

pub use forest::{build_forest, Edge, EdgeSpec, Forest, Node, NodeId, NodeKind, SignedIncidence};
pub use forest_io::{parse_forest, parse_forest_lines, write_forest};
pub use grid::{BoundaryFace, CartesianGrid, Face};
pub use support::{build_support, Compartment, Side, SupportGeometry, SupportRegion, TransferProfile};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("edge {edge} ({tail} -> {head}) closes a cycle")]
    Cycle { edge: usize, tail: usize, head: usize },
    #[error("tree rooted at node {tree_root} has a second root at node {other}")]
    MultipleRoots { tree_root: usize, other: usize },
    #[error("node {0} belongs to a tree without a root")]
    NoRoot(usize),
    #[error("root/terminal node {node} has degree {degree}, expected 1")]
    BadDegree { node: usize, degree: usize },
    #[error("edge {edge} has non-positive conductivity {value}")]
    NonPositiveConductivity { edge: usize, value: f64 },
    #[error("edge references unknown node {0}")]
    UnknownNode(usize),
    #[error("node id {id} out of range for {count} nodes")]
    NonContiguousIds { id: usize, count: usize },
    #[error("node {0} listed twice")]
    DuplicateNode(usize),
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error("anchor of terminal {0} lies outside the active domain")]
    AnchorOutside(usize),
    #[error("support of terminal {0} has zero total kS")]
    EmptySupport(usize),
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}
