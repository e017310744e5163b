//! Conservative second-order finite differences.
//!
//! Dirichlet problems use the vertex grid with boundary nodes eliminated;
//! Neumann problems use a cell-centred grid with even reflection at the walls.
//! Coefficients are evaluated from their trigonometric formulas, including at
//! reflected points, which keeps the discrete operator symmetric.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expansion::{Boundary, TrigExpansion};
use crate::problem::EllipticProblem;

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Csr {
    /// Assemble from unsorted triplets; duplicates are summed.
    pub fn from_triplets(n: usize, mut t: Vec<(usize, usize, f64)>) -> Self {
        t.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(t.len());
        let mut vals: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in t {
            if last == Some((r, c)) {
                *vals.last_mut().expect("entry exists") += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Csr { n, row_ptr, cols, vals }
    }

    pub fn mul(&self, x: &[f64], y: &mut [f64]) {
        for r in 0..self.n {
            let mut s = 0.0;
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.vals[p] * x[self.cols[p]];
            }
            y[r] = s;
        }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[range.clone()].binary_search(&c) {
            Ok(i) => self.vals[range.start + i],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|r| self.get(r, r)).collect()
    }

    /// Largest `|a_rc - a_cr|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.n {
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                worst = worst.max((self.vals[p] - self.get(self.cols[p], r)).abs());
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CgStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients from a zero start.
pub fn cg(a: &Csr, b: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, CgStats)> {
    let n = a.n;
    let dinv: Vec<f64> = a.diagonal().iter().map(|&d| if d != 0.0 { 1.0 / d } else { 1.0 }).collect();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        return Ok((x, CgStats { iterations: 0, relative_residual: 0.0 }));
    }
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=max_iter {
        a.mul(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rel = dot(&r, &r).sqrt() / bnorm;
        if rel < tol {
            return Ok((x, CgStats { iterations: it, relative_residual: rel }));
        }
        for i in 0..n {
            z[i] = r[i] * dinv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NoConvergence(format!("CG stopped after {max_iter} iterations")))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Grid geometry shared by assembly and post-processing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub d: usize,
    /// Intervals (Dirichlet) or cells (Neumann) per axis.
    pub n: usize,
    pub bc: Boundary,
}

impl Grid {
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Unknowns per axis.
    pub fn side(&self) -> usize {
        match self.bc {
            Boundary::Dirichlet => self.n - 1,
            Boundary::Neumann => self.n,
        }
    }

    pub fn unknowns(&self) -> usize {
        self.side().pow(self.d as u32)
    }

    /// Axis index of unknown `r`.
    pub fn multi(&self, r: usize, out: &mut [usize]) {
        let s = self.side();
        let mut r = r;
        for o in out.iter_mut() {
            *o = r % s;
            r /= s;
        }
    }

    fn coord(&self, i: i64) -> f64 {
        let h = self.h();
        match self.bc {
            Boundary::Dirichlet => (i + 1) as f64 * h,
            Boundary::Neumann => (i as f64 + 0.5) * h,
        }
    }

    pub fn point(&self, r: usize) -> Vec<f64> {
        let mut m = vec![0; self.d];
        self.multi(r, &mut m);
        m.iter().map(|&i| self.coord(i as i64)).collect()
    }

    /// Map a shifted axis index to an unknown index, `None` for Dirichlet walls.
    fn wrap(&self, i: i64) -> Option<usize> {
        let s = self.side() as i64;
        match self.bc {
            Boundary::Dirichlet => (0..s).contains(&i).then_some(i as usize),
            Boundary::Neumann => Some(i.clamp(0, s - 1) as usize),
        }
    }

    fn linear(&self, m: &[usize]) -> usize {
        let s = self.side();
        m.iter().rev().fold(0, |acc, &v| acc * s + v)
    }
}

/// Discrete operator and load on the grid.
pub fn assemble(problem: &EllipticProblem, grid: Grid) -> (Csr, Vec<f64>) {
    let d = problem.d;
    let h = grid.h();
    let h2 = h * h;
    let n_unk = grid.unknowns();
    let mut trip = Vec::with_capacity(n_unk * (1 + 2 * d + 4 * d * (d - 1)));
    let mut rhs = vec![0.0; n_unk];
    let mut mi = vec![0usize; d];
    let mut nb = vec![0usize; d];
    let mut x = vec![0.0; d];

    // unknown index after shifting axis `ax[k]` by `sh[k]`
    let shift = |mi: &[usize], nb: &mut Vec<usize>, moves: &[(usize, i64)]| -> Option<usize> {
        nb.copy_from_slice(mi);
        for &(axis, s) in moves {
            nb[axis] = grid.wrap(mi[axis] as i64 + s)?;
        }
        Some(grid.linear(nb))
    };

    for r in 0..n_unk {
        grid.multi(r, &mut mi);
        for l in 0..d {
            x[l] = grid.coord(mi[l] as i64);
        }
        rhs[r] = problem.f.eval(&x);
        trip.push((r, r, problem.c.eval(&x)));
        for i in 0..d {
            let aii = problem.a_ij(i, i);
            for s in [-1i64, 1] {
                let mut xf = x.clone();
                xf[i] += s as f64 * h / 2.0;
                let a = aii.eval(&xf) / h2;
                trip.push((r, r, a));
                if let Some(c) = shift(&mi, &mut nb, &[(i, s)]) {
                    trip.push((r, c, -a));
                }
            }
            for j in 0..d {
                if j == i {
                    continue;
                }
                let aij = problem.a_ij(i, j);
                if aij.is_empty() {
                    continue;
                }
                for si in [-1i64, 1] {
                    let mut xa = x.clone();
                    xa[i] += si as f64 * h;
                    let a = aij.eval(&xa) / (4.0 * h2);
                    for sj in [-1i64, 1] {
                        if let Some(c) = shift(&mi, &mut nb, &[(i, si), (j, sj)]) {
                            trip.push((r, c, -(si * sj) as f64 * a));
                        }
                    }
                }
            }
        }
    }
    (Csr::from_triplets(n_unk, trip), rhs)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdSolution {
    pub grid: Grid,
    #[serde(skip)]
    pub values: Vec<f64>,
    pub cg: CgStats,
}

impl FdSolution {
    /// Discrete relative L2 distance to an expansion sampled on the grid.
    pub fn relative_l2_to(&self, g: &TrigExpansion) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (r, &v) in self.values.iter().enumerate() {
            let e = g.eval(&self.grid.point(r));
            num += (v - e).powi(2);
            den += e * e;
        }
        (num / den).sqrt()
    }
}

pub fn fd_solve(problem: &EllipticProblem, n: usize, tol: f64) -> Result<FdSolution> {
    problem.check_structure()?;
    if n < 16 {
        return Err(Error::Precondition(format!("grid needs at least 16 intervals per axis, got {n}")));
    }
    if problem.d > 3 {
        return Err(Error::Precondition(format!("finite differences support d <= 3, got {}", problem.d)));
    }
    let grid = Grid { d: problem.d, n, bc: problem.bc };
    let (a, b) = assemble(problem, grid);
    let (values, cg) = cg(&a, &b, tol, 50 * a.n.max(100))?;
    Ok(FdSolution { grid, values, cg })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn csr_merges_duplicates() {
        let m = Csr::from_triplets(2, vec![(0, 0, 1.0), (1, 0, 2.0), (0, 0, 3.0), (0, 1, -1.0)]);
        assert_eq!(m.get(0, 0), 4.0);
        assert_eq!(m.get(1, 0), 2.0);
        assert_eq!(m.get(1, 1), 0.0);
        let mut y = [0.0; 2];
        m.mul(&[1.0, 1.0], &mut y);
        assert_eq!(y, [3.0, 2.0]);
    }

    #[test]
    fn operators_are_symmetric() {
        for bc in [Boundary::Dirichlet, Boundary::Neumann] {
            for d in [1, 2, 3] {
                let p = fixtures::random_problem(d, bc, 7);
                let (a, _) = assemble(&p, Grid { d, n: 6, bc });
                assert!(a.asymmetry() < 1e-12, "{bc} d={d}: {}", a.asymmetry());
            }
        }
    }

    #[test]
    fn cg_solves_laplacian() {
        let f = fixtures::sine_mode(&[1]).scale(1.0 + std::f64::consts::PI.powi(2));
        let p = EllipticProblem::isotropic(Boundary::Dirichlet, 1.0, f);
        let s = fd_solve(&p, 256, 1e-12).unwrap();
        assert!(s.relative_l2_to(&fixtures::sine_mode(&[1])) < 1e-4);
    }
}
