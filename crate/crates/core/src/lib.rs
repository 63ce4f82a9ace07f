//! Semi-analytical series solutions of the aggregation and the coupled
//! aggregation-breakage population balance equations.
//!
//! The crate builds accelerated homotopy analysis iterates in closed form on
//! exponential-polynomials ([`expoly`]), chooses the convergence-control
//! parameter by minimizing a discrete squared residual ([`hopt`]), and checks
//! the results against exact solutions ([`analytic`]), a finite-volume
//! reference ([`fvm`]) and a priori error bounds ([`bounds`]).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aham;
pub mod analytic;
pub mod bounds;
pub mod error;
pub mod expoly;
pub mod fvm;
pub mod hopt;
pub mod kernels;
pub mod norms;
pub mod pbe_ops;
pub mod quad;
pub mod registry;
pub mod special;

pub use aham::{
    evaluate_solution, iterate, iterate_aham, iterate_classic, solution_moment, Mode, ProblemSpec,
    SeriesSolution,
};
pub use analytic::{exact_constant, exact_moments, exact_product, exact_sum, BinaryBreakageExact, ExactId};
pub use bounds::{apriori_bound, empirical_vs_bound, gamma_aggregation, gamma_cabe, theta, BoundReport, ContractionParams};
pub use error::{Error, Result};
pub use fvm::{build_grid, fvm_snapshots, fvm_solve, fvm_solve_with, CellSolution, GridKind, SizeGrid};
pub use hopt::{e_of_h, optimize_h, optimize_h_with, residual, OptimizerReport, OptimizerSettings, ResidualGrid};
pub use expoly::{ExpPoly, ExpPolyTerm, Exponent, TimeField};
pub use kernels::{BreakageSpec, SeparableKernel};
pub use pbe_ops::OperatorSplit;
pub use norms::{error_norm, ErrorGrid};
pub use registry::{all_examples, example, Example};
