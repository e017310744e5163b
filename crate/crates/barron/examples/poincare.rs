//! Estimate the Poincare constant of the unit cube on a grid.
//!
//! ```not_rust
//! cargo run --release --example poincare
//! ```

use barron::oracle::poincare_check;

fn main() -> barron::Result<()> {
    for (d, n) in [(1, 256), (2, 64)] {
        let r = poincare_check(d, n)?;
        println!(
            "d = {d}, n = {n}: C_P = {:.8}, predicted {:.8}, correlation {:.6}",
            r.constant, r.predicted, r.correlation
        );
    }
    Ok(())
}
