//! Spectral Galerkin reference solver.
//!
//! The stiffness matrix is assembled from closed-form one-dimensional triple
//! integrals, so it shares no code with the operator application used by the
//! flow. The cutoff doubles until the discrete energy stops moving.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expansion::{Boundary, TrigExpansion};
use crate::problem::EllipticProblem;
use crate::trig::{coord_triple, BasisKey, Parity};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GalerkinConfig {
    /// Starting cutoff; `None` picks one from the data.
    pub start_cutoff: Option<u32>,
    /// Stop when the energy changes by less than this between cutoffs.
    pub energy_tol: f64,
    /// Largest number of unknowns a single solve may use.
    pub max_unknowns: usize,
}

impl Default for GalerkinConfig {
    fn default() -> Self {
        GalerkinConfig {
            start_cutoff: None,
            energy_tol: 1e-10,
            max_unknowns: 6000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GalerkinSolution {
    #[serde(skip)]
    pub solution: TrigExpansion,
    pub cutoff: u32,
    pub unknowns: usize,
    pub energy: f64,
    /// Energy drop at the last refinement.
    pub energy_change: f64,
    /// `sqrt(2 * energy_change / lambda_min)`, an estimate of the H1 distance
    /// between the last two cutoffs.
    pub h1_tail: f64,
    /// False when the unknown cap stopped refinement before the tolerance.
    pub converged: bool,
}

/// All admissible indices with every component at most `n`.
fn index_set(d: usize, n: u32, bc: Boundary) -> Vec<Vec<u32>> {
    let lo = match bc {
        Boundary::Dirichlet => 1,
        Boundary::Neumann => 0,
    };
    let mut out = Vec::new();
    let mut cur = vec![lo; d];
    if n < lo {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut l = 0;
        loop {
            if l == d {
                return out;
            }
            cur[l] += 1;
            if cur[l] <= n {
                break;
            }
            cur[l] = lo;
            l += 1;
        }
    }
}

fn unknown_count(d: usize, n: u32, bc: Boundary) -> usize {
    let per = match bc {
        Boundary::Dirichlet => n as usize,
        Boundary::Neumann => n as usize + 1,
    };
    per.checked_pow(d as u32).unwrap_or(usize::MAX)
}

/// One-dimensional factor of a basis function or its derivative.
#[derive(Clone, Copy)]
struct Factor {
    par: Parity,
    freq: u32,
    scale: f64,
}

fn factor(par: Parity, k: u32, differentiate: bool) -> Factor {
    if !differentiate {
        return Factor { par, freq: k, scale: 1.0 };
    }
    let w = PI * k as f64;
    match par {
        Parity::Sin => Factor { par: Parity::Cos, freq: k, scale: w },
        Parity::Cos => Factor { par: Parity::Sin, freq: k, scale: -w },
    }
}

/// Dense stiffness matrix and load vector for the index set.
fn assemble(problem: &EllipticProblem, idx: &[Vec<u32>]) -> (DMatrix<f64>, DVector<f64>) {
    let d = problem.d;
    let base = match problem.bc {
        Boundary::Dirichlet => Parity::Sin,
        Boundary::Neumann => Parity::Cos,
    };
    let n = idx.len();
    let mut m = DMatrix::<f64>::zeros(n, n);

    // (coefficient, derivative slots) pairs: A_ij pairs d_j u with d_i v; c pairs u with v.
    let mut blocks: Vec<(&TrigExpansion, Option<(usize, usize)>)> = vec![(&problem.c, None)];
    for i in 0..d {
        for j in 0..d {
            let a = problem.a_ij(i, j);
            if !a.is_empty() {
                blocks.push((a, Some((i, j))));
            }
        }
    }

    let lo = idx.first().map_or(0, |k| k[0]);
    let hi = idx.iter().map(|k| k[0]).max().unwrap_or(0);
    let side = (hi - lo + 1) as usize;
    let position = |k: &[u32]| k.iter().rev().fold(0usize, |acc, &v| acc * side + (v - lo) as usize);

    let mut cand: Vec<Vec<u32>> = vec![Vec::new(); d];
    let mut ctr = vec![0usize; d];
    let mut ku = vec![0u32; d];
    for (row, kv) in idx.iter().enumerate() {
        for (coef, slots) in &blocks {
            let deriv = |l: usize| match slots {
                Some((i, j)) => (l == *j, l == *i),
                None => (false, false),
            };
            for (key, a) in coef.iter() {
                // Integrands of admissible problems have an even number of sine
                // factors per coordinate, so only |kv +- t| can pair with kv.
                for l in 0..d {
                    let (du, dv) = deriv(l);
                    let pu = factor(base, 1, du).par;
                    let pv = factor(base, 1, dv).par;
                    let sines = [key.parity(l), pu, pv].iter().filter(|&&p| p == Parity::Sin).count();
                    let t = key.freq(l);
                    let c = &mut cand[l];
                    c.clear();
                    if sines % 2 == 0 {
                        for v in [kv[l] + t, kv[l].abs_diff(t)] {
                            if v >= lo && v <= hi && !c.contains(&v) {
                                c.push(v);
                            }
                        }
                    } else {
                        c.extend(lo..=hi);
                    }
                }
                if cand.iter().any(|c| c.is_empty()) {
                    continue;
                }
                ctr.iter_mut().for_each(|c| *c = 0);
                'combos: loop {
                    for l in 0..d {
                        ku[l] = cand[l][ctr[l]];
                    }
                    let col = position(&ku);
                    if col >= row {
                        let mut w = a;
                        for l in 0..d {
                            let (du, dv) = deriv(l);
                            let fu = factor(base, ku[l], du);
                            let fv = factor(base, kv[l], dv);
                            w *= fu.scale * fv.scale;
                            if w == 0.0 {
                                break;
                            }
                            w *= coord_triple(key.parity(l), key.freq(l), fu.par, fu.freq, fv.par, fv.freq);
                            if w == 0.0 {
                                break;
                            }
                        }
                        m[(row, col)] += w;
                    }
                    let mut l = 0;
                    loop {
                        if l == d {
                            break 'combos;
                        }
                        ctr[l] += 1;
                        if ctr[l] < cand[l].len() {
                            break;
                        }
                        ctr[l] = 0;
                        l += 1;
                    }
                }
            }
        }
    }
    for row in 0..n {
        for col in row + 1..n {
            m[(col, row)] = m[(row, col)];
        }
    }

    let par = problem.bc.parity(d);
    let rhs = DVector::from_iterator(
        n,
        idx.iter().map(|k| {
            let key = BasisKey::new(&par, &crate::trig::MultiIndex(k.clone())).expect("valid index");
            problem.f.coeff(&key) * key.l2_norm_sq()
        }),
    );
    (m, rhs)
}

/// Solve at a fixed cutoff. Returns the solution and its discrete energy.
pub fn solve_at_cutoff(problem: &EllipticProblem, cutoff: u32) -> Result<(TrigExpansion, f64, usize)> {
    problem.check_structure()?;
    let idx = index_set(problem.d, cutoff, problem.bc);
    let (m, rhs) = assemble(problem, &idx);
    let chol = Cholesky::new(m).ok_or(Error::NotPositiveDefinite)?;
    let x = chol.solve(&rhs);
    let energy = -0.5 * rhs.dot(&x);
    let par = problem.bc.parity(problem.d);
    let sol = TrigExpansion::from_terms(
        problem.d,
        idx.iter().zip(x.iter()).map(|(k, &c)| {
            (
                BasisKey::new(&par, &crate::trig::MultiIndex(k.clone())).expect("valid index"),
                c,
            )
        }),
    );
    Ok((sol, energy, idx.len()))
}

/// Refine the cutoff until the energy settles or the unknown cap is reached.
pub fn galerkin_solve(problem: &EllipticProblem, cfg: &GalerkinConfig) -> Result<GalerkinSolution> {
    let d = problem.d;
    let data_freq = problem
        .a
        .iter()
        .chain([&problem.c, &problem.f])
        .map(|e| e.max_freq())
        .max()
        .unwrap_or(0);
    let mut n = cfg.start_cutoff.unwrap_or((problem.f.max_freq() + 1).max(data_freq).max(2));
    if unknown_count(d, n, problem.bc) > cfg.max_unknowns {
        return Err(Error::Precondition(format!(
            "cutoff {n} already exceeds the cap of {} unknowns",
            cfg.max_unknowns
        )));
    }
    let (mut sol, mut energy, mut unknowns) = solve_at_cutoff(problem, n)?;
    loop {
        let mut next = n * 2;
        let mut capped = false;
        if unknown_count(d, next, problem.bc) > cfg.max_unknowns {
            while next > n + 1 && unknown_count(d, next, problem.bc) > cfg.max_unknowns {
                next -= 1;
            }
            capped = true;
            if next == n || unknown_count(d, next, problem.bc) > cfg.max_unknowns {
                return Ok(GalerkinSolution {
                    solution: sol,
                    cutoff: n,
                    unknowns,
                    energy,
                    energy_change: f64::NAN,
                    h1_tail: f64::NAN,
                    converged: false,
                });
            }
        }
        let (s2, e2, u2) = solve_at_cutoff(problem, next)?;
        let change = (energy - e2).abs();
        let tail = (2.0 * change / problem.lambda_min()).sqrt();
        let done = change < cfg.energy_tol;
        sol = s2;
        energy = e2;
        unknowns = u2;
        n = next;
        if done || capped {
            return Ok(GalerkinSolution {
                solution: sol,
                cutoff: n,
                unknowns,
                energy,
                energy_change: change,
                h1_tail: tail,
                converged: done,
            });
        }
    }
}
