//! The flow on `-u'' + u = (1 + pi^2) sin(pi x)`: every step halves the error.
//!
//! ```not_rust
//! cargo run --example single_mode_flow
//! ```

use barron::fixtures::single_mode_problem;
use barron::flow::{self, FlowConfig};

fn main() -> barron::Result<()> {
    let (problem, exact) = single_mode_problem(&[1]);
    let c = problem.constants();
    println!("alpha = {}, beta = {:.6}, p(d) = {:.6}", c.alpha, c.beta, c.p_d);

    let mut cfg = FlowConfig::new(1e-6);
    cfg.max_steps = Some(12);
    let trace = flow::solve(&problem, &cfg, Some(&exact))?;
    println!("{:>3} {:>14} {:>10} {:>12}", "t", "h1_error", "ratio", "B2 norm");
    let mut prev = None;
    for r in &trace.records {
        let e = r.h1_error.unwrap();
        let ratio = prev.map(|p: f64| format!("{:.6}", e / p)).unwrap_or_default();
        println!("{:>3} {:>14.6e} {:>10} {:>12.6}", r.t, e, ratio, r.barron_norm_w2);
        prev = Some(e);
    }
    Ok(())
}
