//! Second-order elliptic problems `-div(A grad u) + c u = f` on the unit cube
//! with trigonometric coefficients.
//!
//! Families: `A_ii` and `c` are pure cosine, `A_ij` (i != j) has sine at `i`
//! and `j` and cosine elsewhere, and `f` lives in the solution family of the
//! boundary condition. Under these rules the operator maps the solution family
//! into itself, which keeps every flow iterate exact and sparse.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expansion::{Boundary, TrigExpansion};
use crate::quadrature::Halton;
use crate::trig::ParityVector;

/// Declared ellipticity and boundedness constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bounds {
    pub a_min: f64,
    pub a_max: f64,
    pub c_min: f64,
    pub c_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EllipticProblem {
    pub d: usize,
    pub bc: Boundary,
    /// Row-major `d x d` coefficient matrix.
    pub a: Vec<TrigExpansion>,
    pub c: TrigExpansion,
    pub f: TrigExpansion,
    pub bounds: Bounds,
}

/// Every derived constant the guarantees depend on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantLedger {
    pub d: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub alpha: f64,
    pub beta: f64,
    pub ell_a: f64,
    pub ell_c: f64,
    pub ell_f: f64,
    pub p_d: f64,
    pub q_d: f64,
    pub f_hminus1_upper: f64,
}

/// Step count and neuron budgets for a target accuracy. Budgets are whole
/// numbers but can exceed any machine integer, so they are kept as `f64`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NeuronBudget {
    pub eps: f64,
    pub steps: usize,
    pub cosine: f64,
    pub relu: f64,
}

/// Result of the sampling audit in [`EllipticProblem::validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub samples: usize,
    pub observed_a_min: f64,
    pub observed_a_max: f64,
    pub observed_c_min: f64,
    pub observed_c_max: f64,
}

/// Absolute slack allowed when comparing sampled values with declared bounds.
pub const AUDIT_TOL: f64 = 1e-12;

pub const DEFAULT_AUDIT_SAMPLES: usize = 10_000;

pub fn q_of_d(d: usize) -> f64 {
    let d = d as f64;
    256.0 * d * d + 128.0 * d + 4.0
}

impl EllipticProblem {
    /// `A = I`, `c = c0` with the given right-hand side.
    pub fn isotropic(bc: Boundary, c0: f64, f: TrigExpansion) -> Self {
        let d = f.dim();
        let mut a = vec![TrigExpansion::zero(d); d * d];
        for i in 0..d {
            a[i * d + i] = TrigExpansion::constant(d, 1.0);
        }
        EllipticProblem {
            d,
            bc,
            a,
            c: TrigExpansion::constant(d, c0),
            f,
            bounds: Bounds {
                a_min: 1.0,
                a_max: 1.0,
                c_min: c0,
                c_max: c0,
            },
        }
    }

    pub fn a_ij(&self, i: usize, j: usize) -> &TrigExpansion {
        &self.a[i * self.d + j]
    }

    pub fn lambda_min(&self) -> f64 {
        self.bounds.a_min.min(self.bounds.c_min)
    }

    pub fn lambda_max(&self) -> f64 {
        self.bounds.a_max.max(self.bounds.c_max)
    }

    pub fn alpha_star(&self) -> f64 {
        let (l, u) = (self.lambda_min(), self.lambda_max());
        l / (2.0 * u * u)
    }

    pub fn beta_star(&self) -> f64 {
        let (l, u) = (self.lambda_min(), self.lambda_max());
        (1.0 - l * l / (4.0 * u * u)).sqrt()
    }

    /// Largest weight-1 norm among the coefficient entries.
    pub fn ell_a(&self) -> f64 {
        self.a.iter().map(|e| e.weighted_l1(1)).fold(0.0, f64::max)
    }

    /// Growth factor of the weight-2 norm per flow step with step size `alpha`.
    pub fn growth_factor(&self, alpha: f64) -> f64 {
        let d = self.d as f64;
        (2.0 + PI) / (2.0 * PI) * alpha * self.ell_a() * d * d + alpha * self.c.weighted_l1(2) + 1.0
    }

    pub fn constants(&self) -> ConstantLedger {
        let alpha = self.alpha_star();
        ConstantLedger {
            d: self.d,
            lambda_min: self.lambda_min(),
            lambda_max: self.lambda_max(),
            alpha,
            beta: self.beta_star(),
            ell_a: self.ell_a(),
            ell_c: self.c.weighted_l1(2),
            ell_f: self.f.weighted_l1(0),
            p_d: self.growth_factor(alpha),
            q_d: q_of_d(self.d),
            f_hminus1_upper: self.f.hminus1_upper(self.bc),
        }
    }

    fn check_eps(&self, eps: f64) -> Result<()> {
        let hi = 2.0 / self.lambda_min();
        if !(eps > 0.0 && eps < hi) {
            return Err(Error::Precondition(format!("eps = {eps} is outside the admissible range (0, 2/lambda_min) = (0, {hi})")));
        }
        Ok(())
    }

    /// Number of flow steps that certifies `||u_T - u*||_{H1} <= eps`.
    pub fn steps_for(&self, eps: f64) -> Result<usize> {
        self.check_eps(eps)?;
        let h = self.f.hminus1_upper(self.bc);
        if h == 0.0 {
            return Ok(0);
        }
        let num = h.ln() + (eps * self.lambda_min() / 2.0).ln().abs();
        let t = (num / self.beta_star().ln().abs()).ceil();
        Ok(if t > 0.0 { t as usize } else { 0 })
    }

    pub fn neuron_budget(&self, eps: f64) -> Result<NeuronBudget> {
        let steps = self.steps_for(eps)?;
        let k = self.constants();
        let p = k.p_d;
        let geom = if p == 1.0 {
            steps as f64
        } else {
            (p.powi(steps as i32) - 1.0) / (p - 1.0)
        };
        let cosine = (k.alpha * k.ell_f * geom / eps).powi(2).ceil();
        Ok(NeuronBudget {
            eps,
            steps,
            cosine,
            relu: (k.q_d * cosine).ceil(),
        })
    }

    /// Structural checks: dimensions, symmetry, and basis families.
    pub fn check_structure(&self) -> Result<()> {
        let d = self.d;
        if self.a.len() != d * d {
            return Err(Error::InvalidProblem(format!("A has {} entries, expected {}", self.a.len(), d * d)));
        }
        for e in self.a.iter().chain([&self.c, &self.f]) {
            if e.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: e.dim() });
            }
            if !e.is_finite() {
                return Err(Error::InvalidProblem("non-finite coefficient".into()));
            }
        }
        let b = &self.bounds;
        if !(b.a_min > 0.0 && b.c_min > 0.0 && b.a_min <= b.a_max && b.c_min <= b.c_max) {
            return Err(Error::InvalidProblem(format!("declared bounds {b:?} are not ordered and positive")));
        }
        let cos = ParityVector::all_cos(d);
        for i in 0..d {
            for j in 0..d {
                let e = self.a_ij(i, j);
                if e != self.a_ij(j, i) {
                    return Err(Error::InvalidProblem(format!("A is not symmetric at ({}, {})", i + 1, j + 1)));
                }
                let fam = if i == j { cos.clone() } else { ParityVector::mixed(d, i, j) };
                if !e.is_family(&fam) {
                    return Err(Error::InvalidProblem(format!(
                        "A[{}][{}] must use the {fam} family",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        if !self.c.is_family(&cos) {
            return Err(Error::InvalidProblem("c must be a pure cosine series".into()));
        }
        if !self.f.is_family(&self.bc.parity(d)) {
            return Err(Error::InvalidProblem(format!(
                "f must be a pure {} series for {} conditions",
                if self.bc == Boundary::Dirichlet { "sine" } else { "cosine" },
                self.bc
            )));
        }
        Ok(())
    }

    /// Structural checks plus a low-discrepancy sampling audit of the declared
    /// bounds on `A(x)` eigenvalues and `c(x)`.
    pub fn validate(&self, samples: usize, seed: u64) -> Result<AuditReport> {
        self.check_structure()?;
        let d = self.d;
        let b = self.bounds;
        let halton = Halton::new(d, seed);
        let mut x = vec![0.0; d];
        let mut rep = AuditReport {
            samples,
            observed_a_min: f64::INFINITY,
            observed_a_max: 0.0,
            observed_c_min: f64::INFINITY,
            observed_c_max: f64::NEG_INFINITY,
        };
        for s in 0..samples as u64 {
            halton.point(s, &mut x);
            let m = DMatrix::from_fn(d, d, |i, j| self.a_ij(i, j).eval(&x));
            let eig = SymmetricEigen::new(m).eigenvalues;
            let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = eig.iter().map(|v| v.abs()).fold(0.0, f64::max);
            let cv = self.c.eval(&x);
            rep.observed_a_min = rep.observed_a_min.min(lo);
            rep.observed_a_max = rep.observed_a_max.max(hi);
            rep.observed_c_min = rep.observed_c_min.min(cv);
            rep.observed_c_max = rep.observed_c_max.max(cv);
            let at = || format!("{x:?}");
            if lo < b.a_min - AUDIT_TOL {
                return Err(Error::Audit(format!("smallest eigenvalue of A is {lo} < a_min = {} at {}", b.a_min, at())));
            }
            if hi > b.a_max + AUDIT_TOL {
                return Err(Error::Audit(format!("|A| = {hi} > a_max = {} at {}", b.a_max, at())));
            }
            if cv < b.c_min - AUDIT_TOL || cv > b.c_max + AUDIT_TOL {
                return Err(Error::Audit(format!(
                    "c = {cv} outside [{}, {}] at {}",
                    b.c_min,
                    b.c_max,
                    at()
                )));
            }
        }
        Ok(rep)
    }

    /// `L u = -sum_i d_i (sum_j A_ij d_j u) + c u`, exactly.
    pub fn apply_operator(&self, u: &TrigExpansion) -> Result<TrigExpansion> {
        let d = self.d;
        let du: Vec<TrigExpansion> = (0..d).map(|j| u.derivative(j)).collect::<Result<_>>()?;
        let mut out = self.c.multiply(u)?;
        for i in 0..d {
            let mut flux = TrigExpansion::zero(d);
            for (j, duj) in du.iter().enumerate() {
                let a = self.a_ij(i, j);
                if a.is_empty() || duj.is_empty() {
                    continue;
                }
                flux = flux.add(&a.multiply(duj)?);
            }
            out = TrigExpansion::lincomb(1.0, &out, -1.0, &flux.derivative(i)?);
        }
        Ok(out)
    }

    /// `(I - Delta)^{-1} (L u - f)`, the Sobolev gradient of the energy.
    pub fn residual(&self, u: &TrigExpansion) -> Result<TrigExpansion> {
        self.apply_operator(u)?.sub(&self.f).inv_shifted_laplacian(self.bc)
    }

    /// `a(u, v) = int grad v . A grad u + c u v`.
    pub fn bilinear(&self, u: &TrigExpansion, v: &TrigExpansion) -> Result<f64> {
        let d = self.d;
        let du: Vec<TrigExpansion> = (0..d).map(|j| u.derivative(j)).collect::<Result<_>>()?;
        let dv: Vec<TrigExpansion> = (0..d).map(|j| v.derivative(j)).collect::<Result<_>>()?;
        let mut acc = self.c.multiply(u)?.l2_inner(v);
        for i in 0..d {
            for j in 0..d {
                let a = self.a_ij(i, j);
                if !a.is_empty() {
                    acc += a.multiply(&du[j])?.l2_inner(&dv[i]);
                }
            }
        }
        Ok(acc)
    }

    /// `E(u) = a(u, u) / 2 - (f, u)`.
    pub fn energy(&self, u: &TrigExpansion) -> Result<f64> {
        Ok(0.5 * self.bilinear(u, u)? - self.f.l2_inner(u))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trig::{BasisKey, MultiIndex};
    use approx::assert_abs_diff_eq;

    fn s1() -> TrigExpansion {
        TrigExpansion::single(&ParityVector::all_sin(1), &MultiIndex(vec![1]), 1.0).unwrap()
    }

    fn single_mode() -> EllipticProblem {
        EllipticProblem::isotropic(Boundary::Dirichlet, 1.0, s1().scale(1.0 + PI * PI))
    }

    #[test]
    fn single_mode_constants() {
        let k = single_mode().constants();
        assert_eq!(k.alpha, 0.5);
        assert_abs_diff_eq!(k.beta, 3f64.sqrt() / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(k.ell_f, 2.0 * (1.0 + PI * PI), epsilon = 1e-12);
        assert_abs_diff_eq!(k.p_d, (2.0 + PI) / (4.0 * PI) + 1.5, epsilon = 1e-14);
    }

    #[test]
    fn step_size_for_wider_spectrum() {
        let mut p = single_mode();
        p.bounds.c_max = 2.0;
        assert_eq!(p.alpha_star(), 0.125);
        assert_abs_diff_eq!(p.beta_star(), 15f64.sqrt() / 4.0, epsilon = 1e-15);
    }

    #[test]
    fn operator_on_single_mode() {
        let p = single_mode();
        let lu = p.apply_operator(&s1()).unwrap();
        assert_eq!(lu.len(), 1);
        assert_abs_diff_eq!(lu.coeff(&s1().terms()[0].0), 1.0 + PI * PI, epsilon = 1e-12);
        assert!(p.residual(&s1()).unwrap().max_abs_coef() < 1e-15);
    }

    #[test]
    fn eps_range_is_enforced() {
        let p = single_mode();
        assert!(matches!(p.steps_for(2.5), Err(Error::Precondition(_))));
        assert!(matches!(p.neuron_budget(0.0), Err(Error::Precondition(_))));
        assert!(p.steps_for(12.0 / 10.0).is_ok());
    }

    #[test]
    fn steps_cover_single_mode_decay() {
        // the exact error after t steps is 2^{-t} sqrt((1 + pi^2) / 2)
        let t = single_mode().steps_for(1e-3).unwrap();
        let needed = (((1.0 + PI * PI) / 2.0f64).sqrt() / 1e-3).log2().ceil() as usize;
        assert_eq!(needed, 12);
        assert!(t >= needed);
    }

    #[test]
    fn validate_accepts_and_rejects() {
        let mut p = single_mode();
        p.c = TrigExpansion::from_terms(
            1,
            [
                (BasisKey::new(&ParityVector::all_cos(1), &MultiIndex(vec![0])).unwrap(), 1.0),
                (BasisKey::new(&ParityVector::all_cos(1), &MultiIndex(vec![1])).unwrap(), 0.5),
            ],
        );
        p.bounds.c_min = 0.5;
        p.bounds.c_max = 1.5;
        let rep = p.validate(DEFAULT_AUDIT_SAMPLES, 0).unwrap();
        assert!(rep.observed_c_min >= 0.5 && rep.observed_c_max <= 1.5);
        p.bounds.c_min = 0.9;
        assert!(matches!(p.validate(1000, 0), Err(Error::Audit(_))));
    }

    #[test]
    fn wrong_family_is_rejected() {
        let mut p = single_mode();
        p.f = TrigExpansion::constant(1, 1.0);
        assert!(matches!(p.check_structure(), Err(Error::InvalidProblem(_))));
    }

    #[test]
    fn energy_of_solution() {
        // E(u*) = -a(u*, u*) / 2 = -(1 + pi^2) / 4 for the single mode.
        let p = single_mode();
        assert_abs_diff_eq!(p.energy(&s1()).unwrap(), -(1.0 + PI * PI) / 4.0, epsilon = 1e-13);
    }
}
