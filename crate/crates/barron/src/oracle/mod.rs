//! Independent reference solvers used to check the flow: a spectral Galerkin
//! method, a finite-difference scheme, and a discrete Poincare constant.

pub mod fd;
pub mod galerkin;
pub mod poincare;

pub use fd::{fd_solve, FdSolution};
pub use galerkin::{galerkin_solve, solve_at_cutoff, GalerkinConfig, GalerkinSolution};
pub use poincare::{poincare_check, PoincareReport};
