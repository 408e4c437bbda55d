//! Scaled and unscaled dual-descent augmented Lagrangian methods for
//! block-structured nonconvex problems with equality constraints.
//!
//! The crate provides the solvers ([`sdd`], [`udd_affine`], [`udd_nonlinear`]),
//! classic baselines ([`baselines`]), closed-form proximal operators ([`prox`]),
//! a gallery of instances with known constants ([`gallery`]) and a harness
//! that turns every descent and boundedness inequality into a runtime
//! monitor ([`monitor`], [`harness`]).

pub mod baselines;
pub mod error;
pub mod gallery;
pub mod harness;
pub mod linalg;
pub mod monitor;
pub mod problem;
pub mod prox;
pub mod sdd;
pub mod trace;
pub mod udd_affine;
pub mod udd_nonlinear;

pub use error::{Error, Result};
pub use problem::{BlockStructure, BlockVector, ExtReal, ProblemInstance};
