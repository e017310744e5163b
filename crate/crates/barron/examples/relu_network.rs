//! Interpolate a ridge profile with ReLUs, then build and audit full ReLU networks.
//!
//! ```not_rust
//! cargo run --release --example relu_network
//! ```

use std::f64::consts::PI;

use barron::network::relu::interp_h1_error;
use barron::network::{audit_relu_boxes, build_relu_net, relu_interp_1d, relu_net_h1_error, RidgeProfile};
use barron::TrigExpansion;

fn main() -> barron::Result<()> {
    let profile = RidgeProfile {
        lambda: PI,
        phase: -PI / 2.0,
        amplitude: 1.0,
    };
    for m in [4, 8, 16, 32] {
        let it = relu_interp_1d(profile, m, 1)?;
        println!(
            "m = {m:>2}: interpolation error {:.4e} (bound {:.4e})",
            interp_h1_error(&it, &profile),
            10f64.sqrt() * PI * PI / m as f64
        );
    }

    let g = TrigExpansion::from_text("# dim = 2\nss (1,1) 1\n")?;
    for k in [64, 256, 1024] {
        let m = (k as f64).sqrt().ceil() as usize;
        let net = build_relu_net(&g, k, m, 0, 0)?;
        let audit = audit_relu_boxes(&net, &g);
        let err = relu_net_h1_error(&net, &g, 0);
        println!(
            "k = {k:>4}, m = {m:>2}: {} neurons, error {:.4e}, boxes {}",
            net.k(),
            err.value,
            if audit.passed { "hold" } else { "violated" }
        );
    }
    Ok(())
}
