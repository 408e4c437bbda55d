//! Run, sweep and verification drivers behind the command-line tool.

pub mod config;
pub mod run;
pub mod sweep;
pub mod verify;

pub use config::{LoadedProblem, ProblemSource, RunConfig, SolverKind, SolverParams};
pub use run::{execute, exit_code_for, solve, RunReport, SolverRun, Summary};
pub use sweep::{rate_sweep, RateReport, RateRow};
pub use verify::{
    prox_grid_check, prox_inputs, scalar_kernels, verify_suite, Scope, VerifyReport, GALLERY_UDD_VARRHO,
};
