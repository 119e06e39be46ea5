//! Monotone finite-difference discretization of the obstacle problem for the
//! integral fractional Laplacian on a bounded interval.
//!
//! The pipeline is: build a [`mesh::Mesh`], compute [`mesh::NodeMetrics`],
//! assemble the dense [`operator::DiscreteOperator`], then solve the discrete
//! complementarity problem `min(Lu - f, u - psi) = 0` with one of the solvers
//! in [`solver`]. The [`harness`] module reproduces the convergence and
//! iteration-count studies, and [`cli`] wraps everything behind a
//! configuration-file driven command line.

// negated comparisons in argument checks also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod harness;
pub mod kernel;
pub mod mesh;
pub mod operator;
pub mod solver;

pub use error::{Error, Result};
pub use kernel::FractionalOrder;
pub use mesh::{Mesh, NodeMetrics};
pub use operator::DiscreteOperator;
pub use solver::{ObstacleInstance, SolverResult};
