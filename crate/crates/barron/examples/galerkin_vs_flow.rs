//! Solve a random variable-coefficient problem three ways and compare:
//! the flow, spectral Galerkin, and finite differences.
//!
//! ```not_rust
//! cargo run --release --example galerkin_vs_flow
//! ```

use barron::expansion::Boundary;
use barron::fixtures::random_problem;
use barron::flow::{self, check_contraction, check_recursion, FlowConfig};
use barron::oracle::{fd_solve, galerkin_solve, GalerkinConfig};

fn main() -> barron::Result<()> {
    let problem = random_problem(2, Boundary::Dirichlet, 4);
    problem.validate(4000, 0)?;
    let eps = 1e-4;

    let g = galerkin_solve(&problem, &GalerkinConfig::default())?;
    println!("galerkin: cutoff {}, {} unknowns, converged {}", g.cutoff, g.unknowns, g.converged);

    let trace = flow::solve(&problem, &FlowConfig::new(eps), Some(&g.solution))?;
    let last = trace.final_record();
    println!(
        "flow: {} steps, {} terms, H1 distance to galerkin {:.3e}",
        trace.planned_steps,
        last.support_size,
        last.h1_error.unwrap()
    );
    println!("{:?}", check_recursion(&trace, &problem));
    println!("{:?}", check_contraction(&trace, &problem, 1e-10, 0.0));

    let fd = fd_solve(&problem, 64, 1e-12)?;
    println!("fd n=64: relative L2 distance to galerkin {:.3e}", fd.relative_l2_to(&g.solution));
    Ok(())
}
