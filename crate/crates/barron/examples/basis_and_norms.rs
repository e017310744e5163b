//! Build sparse trigonometric expansions, multiply them, and read off Barron norms.
//!
//! ```not_rust
//! cargo run --example basis_and_norms
//! ```

use barron::expansion::Boundary;
use barron::trig::{BasisKey, MultiIndex, ParityVector};
use barron::TrigExpansion;

fn main() -> barron::Result<()> {
    let ss = ParityVector::parse("ss").unwrap();
    let cc = ParityVector::parse("cc").unwrap();
    let g = TrigExpansion::from_terms(
        2,
        [
            (BasisKey::new(&ss, &MultiIndex(vec![1, 1]))?, 1.0),
            (BasisKey::new(&ss, &MultiIndex(vec![2, 1]))?, -0.5),
        ],
    );
    let h = TrigExpansion::from_terms(
        2,
        [
            (BasisKey::new(&cc, &MultiIndex(vec![0, 0]))?, 1.0),
            (BasisKey::new(&cc, &MultiIndex(vec![1, 0]))?, 0.25),
        ],
    );

    let gh = g.multiply(&h)?;
    println!("g h has {} terms:\n{}", gh.len(), gh.to_text());
    for n in 0..=2 {
        println!(
            "weight {n}: |gh| = {:.6}  <=  |g| |h| = {:.6}",
            gh.barron_norm(n)?,
            g.barron_norm(n)? * h.barron_norm(n)?
        );
    }

    let x = [0.3, 0.7];
    println!("gh(x) = {:.15}, g(x) h(x) = {:.15}", gh.eval(&x), g.eval(&x) * h.eval(&x));

    let v = g.inv_shifted_laplacian(Boundary::Dirichlet)?;
    println!("B2((I - Lap)^-1 g) = {:.6}, B0(g) / 2 = {:.6}", v.barron_norm(2)?, g.barron_norm(0)? / 2.0);
    println!("H1 norm of g = {:.6}, L2 norm = {:.6}", g.h1_norm(), g.l2_norm());
    Ok(())
}
