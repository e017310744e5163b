//! Sample cosine networks from a target expansion and watch the H1 error
//! fall like `k^-1/2`.
//!
//! ```not_rust
//! cargo run --release --example cosine_network
//! ```

use barron::network::{best_of_draws, build_measure, cosine_net_h1_error, sample_cosine_net};
use barron::TrigExpansion;

fn main() -> barron::Result<()> {
    let g = TrigExpansion::from_text("# dim = 2\nss (1,1) 1\nss (2,1) -0.5\ncc (0,3) 0.2\n")?;
    let mu = build_measure(&g)?;
    let b2 = g.weighted_l1(2);
    println!("{} atoms, B2 = {b2:.4}", mu.atoms.len());

    let seeds = 100;
    for k in [4, 16, 64, 256, 1024] {
        let mean = (0..seeds).map(|s| cosine_net_h1_error(&sample_cosine_net(&mu, k, s, 0), &g)).sum::<f64>()
            / seeds as f64;
        println!("k = {k:>4}: mean error {mean:.4e}, B2 / sqrt(k) = {:.4e}", b2 / (k as f64).sqrt());
    }

    let (net, summary) = best_of_draws(&g, &mu, 64, 20, 0);
    println!("best of 20 draws at k = 64: {:.4e} (mean {:.4e})", summary.best_error, summary.mean_error);
    println!("N(0.3, 0.6) = {:.6}, g(0.3, 0.6) = {:.6}", net.eval(&[0.3, 0.6]), g.eval(&[0.3, 0.6]));
    Ok(())
}
