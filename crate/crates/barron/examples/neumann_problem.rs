//! Load a Neumann problem from a file, check its bounds, and solve it.
//!
//! ```not_rust
//! cargo run --release --example neumann_problem
//! ```

use std::path::Path;

use barron::flow::{self, FlowConfig};
use barron::oracle::{galerkin_solve, GalerkinConfig};
use barron::problem_file::read_problem;

fn main() -> barron::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/neumann_d2.problem");
    let problem = read_problem(&path)?;
    let audit = problem.validate(4000, 0)?;
    println!(
        "observed a in [{:.4}, {:.4}], c in [{:.4}, {:.4}]",
        audit.observed_a_min, audit.observed_a_max, audit.observed_c_min, audit.observed_c_max
    );

    let reference = galerkin_solve(&problem, &GalerkinConfig::default())?.solution;
    let trace = flow::solve(&problem, &FlowConfig::new(1e-3), Some(&reference))?;
    for r in trace.records.iter().step_by(10) {
        println!("t = {:>3}: error {:.4e}, energy {:.8}", r.t, r.h1_error.unwrap(), r.energy);
    }
    println!("final: {:.4e}", trace.final_record().h1_error.unwrap());
    Ok(())
}
