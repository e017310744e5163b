//! Reproducible test problems.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expansion::{Boundary, TrigExpansion};
use crate::problem::{Bounds, EllipticProblem};
use crate::trig::{BasisKey, MultiIndex, Parity, ParityVector};

pub fn sine_mode(k: &[u32]) -> TrigExpansion {
    TrigExpansion::single(&ParityVector::all_sin(k.len()), &MultiIndex(k.to_vec()), 1.0).expect("valid index")
}

pub fn cosine_mode(k: &[u32]) -> TrigExpansion {
    TrigExpansion::single(&ParityVector::all_cos(k.len()), &MultiIndex(k.to_vec()), 1.0).expect("valid index")
}

/// `A = I`, `c = 1`, `f = (1 + pi^2 |k|^2) S_k`, whose solution is `S_k`.
pub fn single_mode_problem(k: &[u32]) -> (EllipticProblem, TrigExpansion) {
    let u = sine_mode(k);
    let w = 1.0 + PI * PI * k.iter().map(|&v| (v * v) as f64).sum::<f64>();
    (EllipticProblem::isotropic(Boundary::Dirichlet, 1.0, u.scale(w)), u)
}

fn key(p: &ParityVector, k: Vec<u32>) -> BasisKey {
    BasisKey::new(p, &MultiIndex(k)).expect("valid index")
}

fn random_index(rng: &mut ChaCha8Rng, d: usize, lo: u32, hi: u32) -> Vec<u32> {
    (0..d).map(|_| rng.random_range(lo..=hi)).collect()
}

/// A random admissible problem with small variable coefficients around the
/// identity. Declared bounds come from Gershgorin discs, so they are valid
/// everywhere though not tight.
pub fn random_problem(d: usize, bc: Boundary, seed: u64) -> EllipticProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((d as u64) << 1) | (bc == Boundary::Neumann) as u64);
    let cos = ParityVector::all_cos(d);
    let mut a = vec![TrigExpansion::zero(d); d * d];
    let mut diag_lo = vec![1.0; d];
    let mut diag_hi = vec![1.0; d];
    let mut radius = vec![0.0; d];
    for i in 0..d {
        let mut terms = vec![(key(&cos, vec![0; d]), 1.0)];
        for _ in 0..2 {
            let mut k = random_index(&mut rng, d, 0, 1);
            k[rng.random_range(0..d)] = rng.random_range(1..=2);
            let amp = rng.random_range(-0.08..0.08);
            diag_lo[i] -= f64::abs(amp);
            diag_hi[i] += f64::abs(amp);
            terms.push((key(&cos, k), amp));
        }
        a[i * d + i] = TrigExpansion::from_terms(d, terms);
    }
    for i in 0..d {
        for j in i + 1..d {
            let mut k = random_index(&mut rng, d, 0, 1);
            k[i] = rng.random_range(1..=2);
            k[j] = rng.random_range(1..=2);
            let amp: f64 = rng.random_range(-0.05..0.05);
            let e = TrigExpansion::from_terms(d, [(key(&ParityVector::mixed(d, i, j), k), amp)]);
            radius[i] += amp.abs();
            radius[j] += amp.abs();
            a[i * d + j] = e.clone();
            a[j * d + i] = e;
        }
    }
    let c0 = rng.random_range(0.5..1.5);
    let mut c_terms = vec![(key(&cos, vec![0; d]), c0)];
    let mut spread = 0.0;
    for _ in 0..2 {
        let mut k = random_index(&mut rng, d, 0, 1);
        k[rng.random_range(0..d)] = rng.random_range(1..=2);
        let amp: f64 = rng.random_range(-0.1..0.1);
        spread += amp.abs();
        c_terms.push((key(&cos, k), amp));
    }
    let fam = bc.parity(d);
    let lo = if bc == Boundary::Dirichlet { 1 } else { 0 };
    let mut f_terms = Vec::new();
    for _ in 0..3 {
        f_terms.push((key(&fam, random_index(&mut rng, d, lo, 2)), rng.random_range(-1.0..1.0)));
    }
    let a_min = (0..d).map(|i| diag_lo[i] - radius[i]).fold(f64::INFINITY, f64::min);
    let a_max = (0..d).map(|i| diag_hi[i] + radius[i]).fold(0.0, f64::max);
    EllipticProblem {
        d,
        bc,
        a,
        c: TrigExpansion::from_terms(d, c_terms),
        f: TrigExpansion::from_terms(d, f_terms),
        bounds: Bounds {
            a_min,
            a_max,
            c_min: c0 - spread,
            c_max: c0 + spread,
        },
    }
}

/// A random expansion of one family with frequencies in `0..=max_freq`.
pub fn random_expansion(p: &ParityVector, terms: usize, max_freq: u32, seed: u64) -> TrigExpansion {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = p.dim();
    let v: Vec<_> = (0..terms)
        .map(|_| {
            let k: Vec<u32> = p
                .0
                .iter()
                .map(|&q| {
                    let lo = (q == Parity::Sin) as u32;
                    rng.random_range(lo..=max_freq.max(lo))
                })
                .collect();
            (key(p, k), rng.random_range(-1.0..1.0))
        })
        .collect();
    TrigExpansion::from_terms(d, v)
}
