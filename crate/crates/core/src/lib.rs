//! Simulation and boundary output tracking for a direct contact membrane
//! distillation (DCMD) plant.
//!
//! The plant is modeled as two temperature fields (feed and permeate) on the
//! rectangle `(0,1) x (0,L)`, each obeying an advection-diffusion equation and
//! coupled through a Robin flux law on the membrane edge. On top of the plant
//! model the crate provides:
//!
//! - implicit (backward Euler) time stepping with mixed Dirichlet / flux /
//!   coupled-Robin boundary conditions ([`pde`]),
//! - the stationary solution and settling-rate estimation ([`steady`]),
//! - an output-tracking control loop built from an extended state observer,
//!   a servomechanism and a one-sided boundary feedback law ([`adrc`]),
//! - numerical verification of the operator structure: weighted symmetry,
//!   dissipativity, and the co-current diagonalizing change of variables
//!   ([`spectral`]),
//! - a TOML scenario format with a small analytic-expression language
//!   ([`scenario`]).

pub mod adrc;
pub mod error;
pub mod expr;
pub mod fields;
pub mod grid;
pub mod pde;
pub mod scenario;
pub mod spectral;
pub mod steady;

pub use error::{Error, Result};
pub use fields::{BoundarySignal, FieldPair, Orientation, PhysicalParams};
pub use grid::{BoundarySegment, Grid, SegmentTag};
