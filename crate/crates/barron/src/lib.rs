//! Sparse trigonometric expansions, Barron norms and a preconditioned gradient
//! flow for second-order elliptic problems on `[0,1]^d`, with extraction of
//! two-layer cosine and ReLU networks from the flow iterates.
//!
//! The main entry points:
//!
//! * [`expansion::TrigExpansion`] for exact algebra on sine/cosine series;
//! * [`problem::EllipticProblem`] for coefficients, constants and the operator;
//! * [`flow::solve`] for the preconditioned flow with certificates;
//! * [`network`] for Monte Carlo extraction of two-layer networks;
//! * [`oracle`] for independent Galerkin and finite-difference reference solvers;
//! * [`cli`] for the command-line front end.

pub mod cli;
pub mod error;
pub mod expansion;
pub mod fixtures;
pub mod flow;
pub mod io;
pub mod network;
pub mod oracle;
pub mod problem;
pub mod problem_file;
pub mod quadrature;
pub mod trig;

pub use error::{Error, Result};
pub use expansion::{Boundary, TrigExpansion};
pub use problem::EllipticProblem;
