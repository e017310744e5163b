//! Discrete Poincare constant of the Dirichlet Laplacian by inverse iteration.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expansion::{Boundary, TrigExpansion};
use crate::problem::EllipticProblem;

use super::fd::{assemble, cg, dot, Grid};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoincareReport {
    pub d: usize,
    pub n: usize,
    pub lambda_1: f64,
    /// `1 / sqrt(lambda_1)`.
    pub constant: f64,
    /// `1 / (pi sqrt d)`.
    pub predicted: f64,
    /// Cosine of the angle between the eigenvector and `prod_i sin(pi x_i)` on the grid.
    pub correlation: f64,
    pub iterations: usize,
}

pub fn poincare_check(d: usize, n: usize) -> Result<PoincareReport> {
    let zero = TrigExpansion::zero(d);
    let mut lap = EllipticProblem::isotropic(Boundary::Dirichlet, 1.0, zero);
    lap.c = TrigExpansion::zero(d);
    let grid = Grid { d, n, bc: Boundary::Dirichlet };
    let (a, _) = assemble(&lap, grid);
    let m = a.n;
    let mut v = vec![1.0 / (m as f64).sqrt(); m];
    let mut av = vec![0.0; m];
    let mut lambda = f64::INFINITY;
    let mut iterations = 0;
    for it in 1..=200 {
        let (w, _) = cg(&a, &v, 1e-14, 50 * m.max(100))?;
        let norm = dot(&w, &w).sqrt();
        v = w.iter().map(|x| x / norm).collect();
        a.mul(&v, &mut av);
        let next = dot(&v, &av);
        iterations = it;
        let done = ((next - lambda) / next).abs() < 1e-14;
        lambda = next;
        if done {
            break;
        }
        if it == 200 {
            return Err(Error::NoConvergence("inverse iteration".into()));
        }
    }
    let s: Vec<f64> = (0..m).map(|r| grid.point(r).iter().map(|x| (PI * x).sin()).product()).collect();
    let correlation = dot(&v, &s).abs() / dot(&s, &s).sqrt();
    Ok(PoincareReport {
        d,
        n,
        lambda_1: lambda,
        constant: 1.0 / lambda.sqrt(),
        predicted: 1.0 / (PI * (d as f64).sqrt()),
        correlation,
        iterations,
    })
}
