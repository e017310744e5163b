//! The preconditioned flow `u_{t+1} = u_t - alpha (I - Delta)^{-1} (L u_t - f)`
//! from `u_0 = 0`, with per-step accounting and the two a-posteriori checks:
//! the weight-2 norm recursion and the contraction of the H1 error.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expansion::TrigExpansion;
use crate::io::fmt_real;
use crate::problem::EllipticProblem;

pub const DEFAULT_PRUNE_REL: f64 = 1e-14;

/// Residual growth (relative to the first residual) treated as divergence.
const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    pub eps: f64,
    /// Step size; `None` uses the certified value.
    pub alpha: Option<f64>,
    /// Cap on the step count; `None` runs the certified count.
    pub max_steps: Option<usize>,
    /// Pruning threshold relative to the largest coefficient.
    pub prune_rel: f64,
    /// Stop once the residual certifies half the target accuracy.
    pub early_stop: bool,
}

impl FlowConfig {
    pub fn new(eps: f64) -> Self {
        FlowConfig {
            eps,
            alpha: None,
            max_steps: None,
            prune_rel: DEFAULT_PRUNE_REL,
            early_stop: false,
        }
    }
}

/// One row of the trace, describing `u_t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub t: usize,
    pub h1_error: Option<f64>,
    pub barron_norm_w2: f64,
    pub support_size: usize,
    /// Weight-2 mass pruned while forming `u_t`.
    pub pruned_mass: f64,
    pub energy: f64,
    /// H1 norm of the Sobolev gradient at `u_t`.
    pub residual_h1: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowTrace {
    pub alpha: f64,
    pub planned_steps: usize,
    pub records: Vec<StepRecord>,
    /// Step at which the residual test stopped the run, if it did.
    pub early_stop_at: Option<usize>,
    #[serde(skip)]
    pub solution: TrigExpansion,
}

impl FlowTrace {
    pub fn final_record(&self) -> &StepRecord {
        self.records.last().expect("trace has at least u_0")
    }

    pub fn cumulative_pruned(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.records
            .iter()
            .map(|r| {
                acc += r.pruned_mass;
                acc
            })
            .collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["t", "h1_error", "barron_norm_w2", "support_size", "pruned_mass", "energy"])?;
        for r in &self.records {
            w.write_record([
                r.t.to_string(),
                r.h1_error.map(fmt_real).unwrap_or_default(),
                fmt_real(r.barron_norm_w2),
                r.support_size.to_string(),
                fmt_real(r.pruned_mass),
                fmt_real(r.energy),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// One flow step from `u`. Returns the pruned iterate and the pruned mass.
pub fn step(problem: &EllipticProblem, u: &TrigExpansion, alpha: f64, prune_rel: f64) -> Result<(TrigExpansion, f64)> {
    let r = problem.residual(u)?;
    let next = TrigExpansion::lincomb(1.0, u, -alpha, &r);
    let (next, rep) = next.prune(prune_rel * next.max_abs_coef());
    Ok((next, rep.barron_mass))
}

/// Run the flow, recording every iterate. `reference` enables the H1 error
/// column; `observer` sees each iterate as it is produced.
pub fn solve_with(
    problem: &EllipticProblem,
    cfg: &FlowConfig,
    reference: Option<&TrigExpansion>,
    mut observer: impl FnMut(usize, &TrigExpansion),
) -> Result<FlowTrace> {
    let planned = problem.steps_for(cfg.eps)?;
    let steps = cfg.max_steps.map_or(planned, |m| m.min(planned));
    let alpha = cfg.alpha.unwrap_or_else(|| problem.alpha_star());
    let stop_level = cfg.eps * problem.lambda_min() / 2.0;

    let mut u = TrigExpansion::zero(problem.d);
    let mut pruned = 0.0;
    let mut records = Vec::with_capacity(steps + 1);
    let mut first_residual = None;
    let mut early_stop_at = None;
    for t in 0..=steps {
        observer(t, &u);
        let lu_minus_f = problem.apply_operator(&u)?.sub(&problem.f);
        let r = lu_minus_f.inv_shifted_laplacian(problem.bc)?;
        let rn = r.h1_norm();
        // E(u) = (Lu, u) / 2 - (f, u) = (Lu - f, u) / 2 - (f, u) / 2
        let energy = 0.5 * lu_minus_f.l2_inner(&u) - 0.5 * problem.f.l2_inner(&u);
        records.push(StepRecord {
            t,
            h1_error: reference.map(|r| u.sub(r).h1_norm()),
            barron_norm_w2: u.weighted_l1(2),
            support_size: u.len(),
            pruned_mass: pruned,
            energy,
            residual_h1: rn,
        });
        let r0 = *first_residual.get_or_insert(rn);
        if !rn.is_finite() || (r0 > 0.0 && rn > DIVERGENCE_FACTOR * r0) {
            return Err(Error::Diverged { step: t, residual: rn });
        }
        if t == steps {
            break;
        }
        if cfg.early_stop && rn < stop_level {
            early_stop_at = Some(t);
            break;
        }
        let next = TrigExpansion::lincomb(1.0, &u, -alpha, &r);
        let (next, rep) = next.prune(cfg.prune_rel * next.max_abs_coef());
        pruned = rep.barron_mass;
        u = next;
    }
    Ok(FlowTrace {
        alpha,
        planned_steps: planned,
        records,
        early_stop_at,
        solution: u,
    })
}

pub fn solve(problem: &EllipticProblem, cfg: &FlowConfig, reference: Option<&TrigExpansion>) -> Result<FlowTrace> {
    solve_with(problem, cfg, reference, |_, _| {})
}

/// Outcome of an a-posteriori check over a trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub checked: usize,
    pub first_violation: Option<usize>,
    /// Smallest `bound - observed` over all checked steps.
    pub min_margin: f64,
}

impl CheckReport {
    fn new(name: &str) -> Self {
        CheckReport {
            name: name.to_string(),
            passed: true,
            checked: 0,
            first_violation: None,
            min_margin: f64::INFINITY,
        }
    }

    fn record(&mut self, t: usize, observed: f64, bound: f64) {
        self.checked += 1;
        let m = bound - observed;
        self.min_margin = self.min_margin.min(m);
        if !(m >= 0.0) {
            self.passed = false;
            self.first_violation.get_or_insert(t);
        }
    }
}

/// Relative rounding allowance on computed norms.
const ROUNDING: f64 = 1e-12;

/// `||u_{t+1}||_{B2} <= p ||u_t||_{B2} + alpha ell_f / 2` at every step, and the
/// unrolled form `||u_t||_{B2} <= sum_{s<t} p^s alpha ell_f / 2`, each plus the
/// mass pruned so far.
pub fn check_recursion(trace: &FlowTrace, problem: &EllipticProblem) -> CheckReport {
    let p = problem.growth_factor(trace.alpha);
    let drive = trace.alpha * problem.f.weighted_l1(0) / 2.0;
    let cum = trace.cumulative_pruned();
    let mut rep = CheckReport::new("barron_recursion");
    let mut unrolled = 0.0;
    for w in trace.records.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let one_step = p * a.barron_norm_w2 + drive + b.pruned_mass;
        rep.record(b.t, b.barron_norm_w2, one_step * (1.0 + ROUNDING));
        unrolled = p * unrolled + drive;
        rep.record(b.t, b.barron_norm_w2, (unrolled + cum[b.t]) * (1.0 + ROUNDING));
    }
    rep
}

/// Contraction `e_{t+1} <= beta e_t` and the a-priori chain
/// `e_t <= (||f||_{H-1} / lambda_min) beta^t`, where `e_t` is measured against
/// a reference of accuracy `oracle_err`. `slack` is an extra absolute allowance.
pub fn check_contraction(
    trace: &FlowTrace,
    problem: &EllipticProblem,
    oracle_err: f64,
    slack: f64,
) -> CheckReport {
    let beta = problem.beta_star();
    let scale = problem.f.hminus1_upper(problem.bc) / problem.lambda_min();
    let cum = trace.cumulative_pruned();
    let mut rep = CheckReport::new("h1_contraction");
    for (i, r) in trace.records.iter().enumerate() {
        let Some(e) = r.h1_error else { continue };
        let prior = scale * beta.powi(r.t as i32) + oracle_err + cum[i] + slack;
        rep.record(r.t, e, prior * (1.0 + ROUNDING));
        if i > 0 {
            if let Some(prev) = trace.records[i - 1].h1_error {
                let bound = beta * prev + (1.0 + beta) * oracle_err + r.pruned_mass + slack;
                rep.record(r.t, e, bound * (1.0 + ROUNDING));
            }
        }
    }
    rep
}

/// Write the constant ledger and the trace side by side.
pub fn write_ledger(path: &Path, problem: &EllipticProblem, eps: f64) -> Result<()> {
    #[derive(Serialize)]
    struct Ledger {
        constants: crate::problem::ConstantLedger,
        budget: crate::problem::NeuronBudget,
    }
    let ledger = Ledger {
        constants: problem.constants(),
        budget: problem.neuron_budget(eps)?,
    };
    let mut f = std::fs::File::create(path)?;
    f.write_all(crate::io::to_json(&ledger)?.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::Boundary;
    use crate::trig::{MultiIndex, ParityVector};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn s1() -> TrigExpansion {
        TrigExpansion::single(&ParityVector::all_sin(1), &MultiIndex(vec![1]), 1.0).unwrap()
    }

    #[test]
    fn single_mode_closed_form() {
        let p = EllipticProblem::isotropic(Boundary::Dirichlet, 1.0, s1().scale(1.0 + PI * PI));
        let key = s1().terms()[0].0.clone();
        let mut cfg = FlowConfig::new(1e-3);
        cfg.max_steps = Some(40);
        let trace = solve_with(&p, &cfg, Some(&s1()), |t, u| {
            let exact = 1.0 - 0.5f64.powi(t as i32);
            assert_abs_diff_eq!(u.coeff(&key), exact, epsilon = 1e-12);
        })
        .unwrap();
        for r in &trace.records {
            let exact = 0.5f64.powi(r.t as i32) * ((1.0 + PI * PI) / 2.0).sqrt();
            assert_abs_diff_eq!(r.h1_error.unwrap(), exact, epsilon = 1e-12);
        }
        assert!(check_recursion(&trace, &p).passed);
        assert!(check_contraction(&trace, &p, 0.0, 0.0).passed);
    }

    #[test]
    fn early_stop_certifies_half_eps() {
        let p = EllipticProblem::isotropic(Boundary::Dirichlet, 1.0, s1().scale(1.0 + PI * PI));
        let mut cfg = FlowConfig::new(1e-3);
        cfg.early_stop = true;
        let trace = solve(&p, &cfg, Some(&s1())).unwrap();
        let stop = trace.early_stop_at.expect("stops before the certified count");
        assert!(stop < trace.planned_steps);
        assert!(trace.final_record().h1_error.unwrap() < 0.5e-3);
    }

    #[test]
    fn wrong_constants_diverge() {
        // declaring lambda bounds far too small makes alpha huge
        let mut p = EllipticProblem::isotropic(Boundary::Dirichlet, 1.0, s1().scale(1.0 + PI * PI));
        p.bounds.a_min = 1e-3;
        p.bounds.a_max = 1e-2;
        p.bounds.c_min = 1e-3;
        p.bounds.c_max = 1e-2;
        let cfg = FlowConfig::new(1.0);
        assert!(matches!(solve(&p, &cfg, None), Err(Error::Diverged { .. })));
    }
}
