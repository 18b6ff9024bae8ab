//! Closed-form radial reference solution and the Bessel functions it needs.

pub mod bessel;
mod radial;

pub use bessel::{bessel, bessel_derivative, bessel_i, bessel_j, bessel_y, BesselKind};
pub use radial::{solve_constants, volume_balance_qn, RadialSolution};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReferenceError {
    #[error("Bessel evaluation outside the series box: order {nu}, argument {x}")]
    BesselDomain { nu: f64, x: f64 },
    #[error("constants system is singular (condition number {condition:.3e})")]
    Singular { condition: f64 },
    #[error("invalid radial parameters: {0}")]
    Params(String),
}
