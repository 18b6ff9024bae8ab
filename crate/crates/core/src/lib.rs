//! Mixed-dimensional flow: rooted-tree networks coupled to an n-dimensional
//! Cartesian porous domain through distributed terminal transfer.

pub mod assembly;
pub mod geom;
pub mod harness;
pub mod model;
pub mod quadrature;
pub mod reference;
pub mod solve;
pub mod sparse;
