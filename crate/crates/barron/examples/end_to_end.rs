//! Solve, extract a cosine network inside the neuron budget, and measure it
//! against the exact solution.
//!
//! ```not_rust
//! cargo run --example end_to_end
//! ```

use barron::fixtures::single_mode_problem;
use barron::flow::{self, FlowConfig};
use barron::network::{best_of_draws, build_measure, build_relu_net, cosine_net_h1_error, relu_net_h1_error};

fn main() -> barron::Result<()> {
    let eps = 0.05;
    let (problem, exact) = single_mode_problem(&[1]);
    let budget = problem.neuron_budget(eps)?;
    println!("steps {}, cosine budget {:.3e}, relu budget {:.3e}", budget.steps, budget.cosine, budget.relu);

    let u = flow::solve(&problem, &FlowConfig::new(eps), None)?.solution;
    let (net, _) = best_of_draws(&u, &build_measure(&u)?, 16, 5, 0);
    println!("cosine net, k = 16: error {:.3e}", cosine_net_h1_error(&net, &exact));

    let relu = build_relu_net(&u, 256, 16, 0, 0)?;
    println!("relu net, k = 256: error {:.3e}", relu_net_h1_error(&relu, &exact, 0).value);
    Ok(())
}
