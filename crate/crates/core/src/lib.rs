//! Hybridizable discontinuous Galerkin solver for 2D linear elasticity with
//! strongly symmetric stress.

// NaN-rejecting comparisons are written `!(x <= tol)` on purpose, and
// index loops mirror the component formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod error;
pub mod fespace;
pub mod global;
pub mod local;
pub mod manufactured;
pub mod material;
pub mod mesh;
pub mod postproc;
pub mod problem;
pub mod study;

pub use config::{MaterialKind, RunConfig};
pub use error::{HdgError, Result};
pub use local::{ElementContext, ElementOperators, LocalBlocks, LocalOptions, TraceVariant};
pub use manufactured::ExactSolution;
pub use material::{ComplianceTensor, MaterialMode};
pub use mesh::{Mesh, MeshFamily, MeshKind};
