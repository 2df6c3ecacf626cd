//! Dynamic economic dispatch with valve-point effect.
//!
//! The solver pipeline mirrors the two-step hybrid method: a piecewise-linear
//! MILP without transmission loss is solved by an internal branch-and-bound
//! to a preset optimality gap, and its dispatch warm starts a primal-dual
//! interior-point refinement of the differentiable NLP reformulation, where
//! quadratic transmission loss enters the power balance.
//!
//! Modules:
//! - [`model`]: problem data types and validation
//! - [`cost`]: valve-point cost, derivatives, chord tables
//! - [`feasibility`]: schedule audit and balance-violation metric
//! - [`milp`]: the piecewise-linear MILP builder
//! - [`simplex`]: bounded-variable revised simplex with warm starts
//! - [`bnb`]: branch and bound over segment selector binaries
//! - [`ipm`]: the NLP reformulation and its interior-point solver
//! - [`hybrid`]: the two-step driver and single-step baselines
//! - [`io`]: instance/schedule file formats, MPS export, run reports

pub mod bnb;
pub mod cost;
pub mod error;
pub mod feasibility;
pub mod hybrid;
pub mod io;
pub mod ipm;
pub mod milp;
pub mod model;
pub mod simplex;
pub mod sparselp;

pub use error::DedError;
pub use model::{Instance, Schedule, UnitParams};
