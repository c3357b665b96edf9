//! Space discretization and implicit time stepping for the coupled system.

pub mod assemble;
pub mod bc;
pub mod linsolve;
pub mod mms;
pub mod stepping;

pub use assemble::{assemble, assemble_with, AdvectionScheme, AssemblyOptions, DiscreteOperator};
pub use bc::{BcKind, BcSpec, BoundaryData, SegmentBc};
pub use linsolve::{solve_linear, BiCgStab, CsrBuilder, CsrMatrix, SolveStats, DEFAULT_RTOL};
pub use stepping::{step_backward_euler, BackwardEulerStepper, SourceFn};
