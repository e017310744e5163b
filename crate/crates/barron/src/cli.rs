//! Command-line front end: `solve`, `extract`, `verify` and `bench`.
//!
//! Exit codes: 0 success, 1 usage error, 2 I/O or parse error, 3 violated
//! precondition, 4 failed assumption audit, 5 failed check. Artifacts go to
//! `--out`, else `$BARRON_OUT`, else `./barron-out`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::expansion::{Boundary, TrigExpansion};
use crate::fixtures;
use crate::flow::{self, check_contraction, check_recursion, FlowConfig, FlowTrace, DEFAULT_PRUNE_REL};
use crate::io::{fmt_real, to_json};
use crate::network::{
    audit_relu_boxes, best_of_draws, build_measure, build_relu_net, relu_net_h1_error, Activation, Normalization,
    TwoLayerNet,
};
use crate::oracle::{fd_solve, galerkin_solve, poincare_check, GalerkinConfig};
use crate::problem::{EllipticProblem, DEFAULT_AUDIT_SAMPLES};
use crate::problem_file::read_problem;
use crate::trig::ParityVector;

pub const OUT_ENV: &str = "BARRON_OUT";
const DEFAULT_OUT: &str = "barron-out";

#[derive(Debug, Parser)]
#[command(name = "barron", version, about = "Preconditioned flow solver and network extraction for elliptic problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the flow on a problem file and write the trace, ledger and solution.
    Solve(SolveArgs),
    /// Extract cosine and/or ReLU networks from a flow solution or expansion file.
    Extract(ExtractArgs),
    /// Run the invariant suite and write a pass/fail report.
    Verify(VerifyArgs),
    /// Time the main stages on a few problems.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleKind {
    Galerkin,
    Fd,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationChoice {
    Cosine,
    Relu,
    Both,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FlowArgs {
    /// Target H1 accuracy; must lie in (0, 2/lambda_min).
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    /// Step size; defaults to the optimal one.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Cap on the number of flow steps.
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Relative coefficient threshold for pruning iterates.
    #[arg(long, default_value_t = DEFAULT_PRUNE_REL)]
    pub prune_tol: f64,
    /// Stop once the residual certifies the target accuracy.
    #[arg(long)]
    pub early_stop: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolveArgs {
    /// Problem file.
    #[arg(long)]
    pub problem: PathBuf,
    #[command(flatten)]
    pub flow: FlowArgs,
    /// Reference solver for the H1 error column.
    #[arg(long, value_enum, default_value_t = OracleKind::None)]
    pub oracle: OracleKind,
    /// Seed for the coefficient audit.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory; falls back to $BARRON_OUT, then ./barron-out.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExtractArgs {
    /// Problem file; the flow is run first and its final iterate is used.
    #[arg(long, conflicts_with = "expansion", required_unless_present = "expansion")]
    pub problem: Option<PathBuf>,
    /// Expansion file to extract from directly.
    #[arg(long)]
    pub expansion: Option<PathBuf>,
    #[command(flatten)]
    pub flow: FlowArgs,
    #[arg(long, value_enum, default_value_t = ActivationChoice::Both)]
    pub activation: ActivationChoice,
    /// Neurons per network; defaults to the cosine budget capped at 1024.
    #[arg(long)]
    pub k: Option<usize>,
    /// ReLU interpolation points per side; defaults to ceil(sqrt k).
    #[arg(long)]
    pub m: Option<usize>,
    /// Independent draws; the best one is kept.
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory; falls back to $BARRON_OUT, then ./barron-out.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    /// Problem file to check instead of the built-in fixtures.
    #[arg(long)]
    pub problem: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    #[arg(long, value_enum, default_value_t = OracleKind::Galerkin)]
    pub oracle: OracleKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory; falls back to $BARRON_OUT, then ./barron-out.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BenchArgs {
    /// Problem file to time instead of the built-in fixtures.
    #[arg(long)]
    pub problem: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    #[arg(long, default_value_t = 256)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory; falls back to $BARRON_OUT, then ./barron-out.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

/// Parse arguments, run the command and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let res = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Extract(a) => cmd_extract(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::Parse { .. } | Error::Json(_) | Error::Csv(_) => 2,
        Error::Precondition(_)
        | Error::DimensionMismatch { .. }
        | Error::FrequencyOverflow(_)
        | Error::MixedFamily(..)
        | Error::ParityMismatch { .. }
        | Error::NoStationaryPoint => 3,
        Error::InvalidProblem(_) | Error::Audit(_) | Error::Diverged { .. } | Error::NotPositiveDefinite => 4,
        Error::NoConvergence(_) => 5,
    }
}

/// `--out`, then `$BARRON_OUT`, then `./barron-out`; created if missing.
pub fn out_dir(flag: &Option<PathBuf>) -> Result<PathBuf> {
    let dir = flag
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn load_problem(path: &Path) -> Result<EllipticProblem> {
    read_problem(path).map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        Error::Parse { line, msg } => Error::Parse {
            line,
            msg: format!("{}: {msg}", path.display()),
        },
        other => other,
    })
}

fn write_json(path: &Path, v: &impl Serialize) -> Result<()> {
    let mut s = to_json(v)?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

fn flow_config(a: &FlowArgs) -> FlowConfig {
    let mut cfg = FlowConfig::new(a.eps);
    cfg.alpha = a.alpha;
    cfg.max_steps = a.max_steps;
    cfg.prune_rel = a.prune_tol;
    cfg.early_stop = a.early_stop;
    cfg
}

fn validated(problem: &EllipticProblem, seed: u64, eps: f64) -> Result<Value> {
    let audit = problem.validate(DEFAULT_AUDIT_SAMPLES, seed)?;
    // fail on the eps range before any work is done
    problem.steps_for(eps)?;
    Ok(serde_json::to_value(audit)?)
}

pub fn cmd_solve(a: &SolveArgs) -> Result<i32> {
    let problem = load_problem(&a.problem)?;
    let audit = validated(&problem, a.seed, a.flow.eps)?;
    let dir = out_dir(&a.out)?;
    let gal = match a.oracle {
        OracleKind::Galerkin => Some(galerkin_solve(&problem, &GalerkinConfig::default())?),
        _ => None,
    };
    let trace = flow::solve(&problem, &flow_config(&a.flow), gal.as_ref().map(|g| &g.solution))?;
    trace.write_csv(&dir.join("trace.csv"))?;
    flow::write_ledger(&dir.join("ledger.json"), &problem, a.flow.eps)?;
    std::fs::write(dir.join("solution.txt"), trace.solution.to_text())?;

    let mut checks = vec![check_recursion(&trace, &problem)];
    let mut oracle = Value::Null;
    if let Some(g) = &gal {
        let tail = if g.h1_tail.is_finite() { g.h1_tail } else { 0.0 };
        checks.push(check_contraction(&trace, &problem, tail, 1e-8));
        oracle = json!({ "kind": "galerkin", "solve": g, "final_h1_error": trace.final_record().h1_error });
    } else if a.oracle == OracleKind::Fd {
        let n = if problem.d <= 2 { 128 } else { 32 };
        let s = fd_solve(&problem, n, 1e-12)?;
        oracle = json!({ "kind": "fd", "grid": s.grid.n, "cg": s.cg, "relative_l2": s.relative_l2_to(&trace.solution) });
    }
    let passed = checks.iter().all(|c| c.passed);
    let report = json!({
        "command": "solve",
        "config": a,
        "audit": audit,
        "alpha": trace.alpha,
        "planned_steps": trace.planned_steps,
        "steps_run": trace.records.len() - 1,
        "early_stop_at": trace.early_stop_at,
        "final": trace.final_record(),
        "oracle": oracle,
        "checks": checks,
        "passed": passed,
    });
    write_json(&dir.join("report.json"), &report)?;
    Ok(if passed { 0 } else { 5 })
}

#[derive(Debug, Clone, Serialize)]
struct TrialRow {
    activation: &'static str,
    trial: usize,
    k: usize,
    m: Option<usize>,
    h1_error: f64,
}

fn write_trials(path: &Path, rows: &[TrialRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["activation", "trial", "k", "m", "h1_error"])?;
    for r in rows {
        w.write_record([
            r.activation.to_string(),
            r.trial.to_string(),
            r.k.to_string(),
            r.m.map(|m| m.to_string()).unwrap_or_default(),
            fmt_real(r.h1_error),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Offset-only network for a target with no oscillating part.
fn constant_net(g: &TrigExpansion, activation: Activation) -> TwoLayerNet {
    TwoLayerNet {
        activation,
        d: g.dim(),
        normalization: Normalization::Mean,
        offset: g.as_constant().unwrap_or(0.0),
        neurons: vec![],
    }
}

pub fn cmd_extract(a: &ExtractArgs) -> Result<i32> {
    let (g, budget, source) = match (&a.problem, &a.expansion) {
        (Some(p), _) => {
            let problem = load_problem(p)?;
            validated(&problem, a.seed, a.flow.eps)?;
            let trace = flow::solve(&problem, &flow_config(&a.flow), None)?;
            (trace.solution, Some(problem.neuron_budget(a.flow.eps)?), "problem")
        }
        (None, Some(e)) => {
            let text = std::fs::read_to_string(e)
                .map_err(|io| Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", e.display()))))?;
            (TrigExpansion::from_text(&text)?, None, "expansion")
        }
        (None, None) => return Err(Error::Precondition("either --problem or --expansion is required".into())),
    };
    let k = a
        .k
        .unwrap_or_else(|| budget.map_or(256, |b| b.cosine.clamp(1.0, 1024.0) as usize));
    if k == 0 {
        return Err(Error::Precondition("k must be positive".into()));
    }
    let m = a.m.unwrap_or((k as f64).sqrt().ceil() as usize).max(1);
    let trials = a.trials.max(1);
    let dir = out_dir(&a.out)?;
    let mut rows = Vec::new();
    let mut summary = json!({
        "command": "extract",
        "config": a,
        "source": source,
        "target_barron_norm_w2": g.weighted_l1(2),
        "k": k,
        "budget": budget,
    });
    let mut passed = true;

    if matches!(a.activation, ActivationChoice::Cosine | ActivationChoice::Both) {
        let (net, best, mean) = match build_measure(&g) {
            Ok(mu) => {
                let (net, s) = best_of_draws(&g, &mu, k, trials, a.seed);
                for (t, e) in s.errors.iter().enumerate() {
                    rows.push(TrialRow { activation: "cosine", trial: t, k, m: None, h1_error: *e });
                }
                (net, s.best_error, s.mean_error)
            }
            Err(_) => (constant_net(&g, Activation::Cosine), 0.0, 0.0),
        };
        std::fs::write(dir.join("cosine_net.txt"), net.to_text())?;
        summary["cosine"] = json!({
            "best_h1_error": best,
            "mean_h1_error": mean,
            "within_budget": budget.map(|b| (k as f64) <= b.cosine),
            "meets_eps": budget.map(|_| best <= a.flow.eps),
        });
    }

    if matches!(a.activation, ActivationChoice::Relu | ActivationChoice::Both) {
        let mut best: Option<(TwoLayerNet, f64)> = None;
        let mut errs = Vec::with_capacity(trials);
        if g.iter().all(|(key, _)| key.is_zero_index()) {
            best = Some((constant_net(&g, Activation::Relu), 0.0));
            errs.push(0.0);
        } else {
            for t in 0..trials {
                let net = build_relu_net(&g, k, m, a.seed, t as u64)?;
                let e = relu_net_h1_error(&net, &g, a.seed).value;
                rows.push(TrialRow { activation: "relu", trial: t, k, m: Some(m), h1_error: e });
                errs.push(e);
                if best.as_ref().is_none_or(|b| e < b.1) {
                    best = Some((net, e));
                }
            }
        }
        let (net, e) = best.expect("at least one trial");
        let boxes = audit_relu_boxes(&net, &g);
        passed &= boxes.passed;
        std::fs::write(dir.join("relu_net.txt"), net.to_text())?;
        summary["relu"] = json!({
            "m": m,
            "best_h1_error": e,
            "mean_h1_error": errs.iter().sum::<f64>() / errs.len() as f64,
            "within_budget": budget.map(|b| (k as f64) <= b.relu),
            "box_audit": boxes,
        });
    }
    summary["passed"] = json!(passed);
    write_trials(&dir.join("trials.csv"), &rows)?;
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(if passed { 0 } else { 5 })
}

/// One line of the verification report.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyCheck {
    pub name: String,
    pub passed: bool,
    /// `bound - observed`; negative when the check fails.
    pub margin: f64,
    pub detail: Value,
}

impl VerifyCheck {
    fn bound(name: impl Into<String>, observed: f64, bound: f64, detail: Value) -> Self {
        let margin = bound - observed;
        VerifyCheck {
            name: name.into(),
            passed: margin >= 0.0,
            margin,
            detail,
        }
    }
}

/// Problems the default suite runs on.
pub fn verify_fixtures(seed: u64) -> Vec<(String, EllipticProblem)> {
    let mut v = vec![("single_mode_d1".to_string(), fixtures::single_mode_problem(&[1]).0)];
    for bc in [Boundary::Dirichlet, Boundary::Neumann] {
        for d in [1, 2] {
            v.push((format!("random_{bc}_d{d}"), fixtures::random_problem(d, bc, seed)));
        }
    }
    v
}

fn product_checks(seed: u64) -> VerifyCheck {
    let mut worst = f64::INFINITY;
    let mut pointwise: f64 = 0.0;
    for s in 0..20 {
        let g = fixtures::random_expansion(&ParityVector::all_sin(2), 4, 3, seed * 1000 + 2 * s);
        let h = fixtures::random_expansion(&ParityVector::all_cos(2), 4, 3, seed * 1000 + 2 * s + 1);
        let gh = g.multiply(&h).expect("same dimension");
        for n in 0..=2 {
            let m = g.weighted_l1(n) * h.weighted_l1(n) - gh.weighted_l1(n);
            worst = worst.min(m + 1e-12 * gh.weighted_l1(n));
        }
        for x in [[0.13, 0.71], [0.5, 0.25], [0.93, 0.07]] {
            pointwise = pointwise.max((gh.eval(&x) - g.eval(&x) * h.eval(&x)).abs());
        }
    }
    let mut c = VerifyCheck::bound("product_norm", 0.0, worst, json!({ "pointwise_max_err": pointwise }));
    c.passed &= pointwise <= 1e-10;
    c
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<i32> {
    let problems = match &a.problem {
        Some(p) => vec![(p.display().to_string(), load_problem(p)?)],
        None => verify_fixtures(a.seed),
    };
    let dir = out_dir(&a.out)?;
    let mut checks: Vec<VerifyCheck> = Vec::new();
    let mut audit_failed = false;
    for (name, p) in &problems {
        match validated(p, a.seed, a.eps) {
            Ok(audit) => checks.push(VerifyCheck { name: format!("audit:{name}"), passed: true, margin: 0.0, detail: audit }),
            Err(e @ (Error::Audit(_) | Error::InvalidProblem(_))) => {
                audit_failed = true;
                checks.push(VerifyCheck {
                    name: format!("audit:{name}"),
                    passed: false,
                    margin: f64::NEG_INFINITY,
                    detail: json!(e.to_string()),
                });
                continue;
            }
            Err(e) => return Err(e),
        }
        let gal = match a.oracle {
            OracleKind::Galerkin => Some(galerkin_solve(p, &GalerkinConfig::default())?),
            _ => None,
        };
        let trace: FlowTrace = flow::solve(p, &FlowConfig::new(a.eps), gal.as_ref().map(|g| &g.solution))?;
        for r in std::iter::once(check_recursion(&trace, p)).chain(gal.as_ref().map(|g| {
            let tail = if g.h1_tail.is_finite() { g.h1_tail } else { 0.0 };
            check_contraction(&trace, p, tail, 1e-8)
        })) {
            checks.push(VerifyCheck {
                name: format!("{}:{name}", r.name),
                passed: r.passed,
                margin: r.min_margin,
                detail: json!({ "checked": r.checked, "first_violation": r.first_violation }),
            });
        }
        if let Some(g) = &gal {
            let e = trace.final_record().h1_error.unwrap_or(f64::NAN);
            checks.push(VerifyCheck::bound(
                format!("final_error:{name}"),
                e,
                a.eps,
                json!({ "steps": trace.planned_steps }),
            ));
            if p.d <= 2 && a.oracle != OracleKind::None {
                let n = 64;
                let s = fd_solve(p, n, 1e-12)?;
                let disc = s.relative_l2_to(&g.solution);
                let bound = 1e-5f64.max(10.0 / (n * n) as f64);
                checks.push(VerifyCheck::bound(format!("oracle_agreement:{name}"), disc, bound, json!({ "grid": n })));
            }
        }
    }
    checks.push(product_checks(a.seed));
    for (d, n, tol) in [(1, 256, 1e-4), (2, 64, 1e-3)] {
        let r = poincare_check(d, n)?;
        let rel = (r.constant - r.predicted).abs() / r.predicted;
        let mut c = VerifyCheck::bound(format!("poincare:d{d}"), rel, tol, serde_json::to_value(&r)?);
        c.passed &= r.correlation >= 0.999;
        checks.push(c);
    }
    let passed = checks.iter().all(|c| c.passed);
    for c in &checks {
        println!("[{}] {} (margin {})", if c.passed { "PASS" } else { "FAIL" }, c.name, fmt_real(c.margin));
    }
    write_json(
        &dir.join("verify.json"),
        &json!({ "command": "verify", "config": a, "checks": checks, "passed": passed }),
    )?;
    Ok(if audit_failed {
        4
    } else if passed {
        0
    } else {
        5
    })
}

pub fn cmd_bench(a: &BenchArgs) -> Result<i32> {
    let problems = match &a.problem {
        Some(p) => vec![(p.display().to_string(), load_problem(p)?)],
        None => (1..=3)
            .map(|d| (format!("random_dirichlet_d{d}"), fixtures::random_problem(d, Boundary::Dirichlet, a.seed)))
            .collect(),
    };
    let dir = out_dir(&a.out)?;
    let mut w = csv::Writer::from_path(dir.join("timings.csv"))?;
    w.write_record(["problem", "stage", "seconds"])?;
    let time = |w: &mut csv::Writer<std::fs::File>, name: &str, stage: &str, t0: Instant| -> Result<()> {
        let s = t0.elapsed().as_secs_f64();
        println!("{name:<24} {stage:<12} {s:>10.4} s");
        w.write_record([name, stage, &fmt_real(s)])?;
        Ok(())
    };
    for (name, p) in &problems {
        let t0 = Instant::now();
        validated(p, a.seed, a.eps)?;
        time(&mut w, name, "validate", t0)?;
        let t0 = Instant::now();
        let trace = flow::solve(p, &FlowConfig::new(a.eps), None)?;
        time(&mut w, name, "flow", t0)?;
        let t0 = Instant::now();
        galerkin_solve(p, &GalerkinConfig::default())?;
        time(&mut w, name, "galerkin", t0)?;
        if p.d <= 3 {
            let t0 = Instant::now();
            fd_solve(p, if p.d == 3 { 24 } else { 64 }, 1e-10)?;
            time(&mut w, name, "fd", t0)?;
        }
        let g = &trace.solution;
        if let Ok(mu) = build_measure(g) {
            let t0 = Instant::now();
            best_of_draws(g, &mu, a.k, 1, a.seed);
            time(&mut w, name, "cosine_net", t0)?;
        }
        let t0 = Instant::now();
        let m = (a.k as f64).sqrt().ceil() as usize;
        let net = build_relu_net(g, a.k, m, a.seed, 0)?;
        time(&mut w, name, "relu_net", t0)?;
        // tensor quadrature of a large target is minutes in 3D
        if p.d <= 2 {
            let t0 = Instant::now();
            relu_net_h1_error(&net, g, a.seed);
            time(&mut w, name, "relu_error", t0)?;
        }
    }
    w.flush()?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_table() {
        assert_eq!(exit_code(&Error::Precondition(String::new())), 3);
        assert_eq!(exit_code(&Error::Audit(String::new())), 4);
        assert_eq!(exit_code(&Error::parse(1, "x")), 2);
    }

    #[test]
    fn usage_errors_return_one() {
        assert_eq!(run(["barron", "frobnicate"]), 1);
        assert_eq!(run(["barron", "--help"]), 0);
    }
}
