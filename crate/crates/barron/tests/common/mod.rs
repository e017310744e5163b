#![allow(dead_code)]

use barron::trig::{BasisKey, MultiIndex, ParityVector};
use barron::TrigExpansion;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn term(p: &str, k: &[u32], c: f64) -> (BasisKey, f64) {
    let p = ParityVector::parse(p).expect("parity string");
    (BasisKey::new(&p, &MultiIndex(k.to_vec())).expect("valid key"), c)
}

pub fn expansion(d: usize, terms: &[(&str, &[u32], f64)]) -> TrigExpansion {
    TrigExpansion::from_terms(d, terms.iter().map(|(p, k, c)| term(p, k, *c)))
}

/// Targets with several distinct ridge directions, so sampling error is never
/// identically zero.
pub fn network_targets() -> Vec<(&'static str, TrigExpansion)> {
    vec![
        ("s1_s3_d1", expansion(1, &[("s", &[1], 1.0), ("s", &[3], 0.5)])),
        ("s11_d2", expansion(2, &[("ss", &[1, 1], 1.0)])),
        ("c12_c01_d2", expansion(2, &[("cc", &[1, 2], 1.0), ("cc", &[0, 1], 0.3)])),
        ("s111_s211_d3", expansion(3, &[("sss", &[1, 1, 1], 1.0), ("sss", &[2, 1, 1], -0.5)])),
        (
            "cos_mix_d3",
            expansion(3, &[("ccc", &[1, 1, 0], 1.0), ("ccc", &[0, 1, 2], 0.5), ("ccc", &[2, 0, 0], 0.25)]),
        ),
    ]
}

pub fn random_point(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(0.0..1.0)).collect()
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
