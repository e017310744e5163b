//! Quadrature and low-discrepancy points on the unit cube.

use gauss_quad::GaussLegendre;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// An integral estimate; `std_error` is set only for randomized rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: Option<f64>,
}

/// Gauss-Legendre nodes and weights mapped to `[a, b]`.
pub fn gauss_legendre(order: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(order.max(1).try_into().expect("order >= 1"));
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    rule.as_node_weight_pairs().iter().map(|&(x, w)| (m + h * x, h * w)).collect()
}

/// Composite rule with `panels` equal panels of `order` nodes each.
pub fn composite_gl(a: f64, b: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let base = gauss_legendre(order, 0.0, 1.0);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        out.extend(base.iter().map(|&(x, w)| (lo + h * x, h * w)));
    }
    out
}

/// Composite rule whose panels break at the given points (sorted, inside `(a, b)`).
pub fn breakpoint_gl(a: f64, b: f64, breaks: &[f64], max_panel: f64, order: usize) -> Vec<(f64, f64)> {
    let mut cuts = vec![a];
    cuts.extend(breaks.iter().copied().filter(|&t| t > a && t < b));
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let len = w[1] - w[0];
        if len <= 0.0 {
            continue;
        }
        let panels = ((len / max_panel).ceil() as usize).max(1);
        out.extend(composite_gl(w[0], w[1], panels, order));
    }
    out
}

/// Tensor product of a one-dimensional rule on `[0,1]^d`.
pub fn tensor_integrate(d: usize, rule: &[(f64, f64)], mut f: impl FnMut(&[f64]) -> f64) -> f64 {
    let n = rule.len();
    let mut idx = vec![0usize; d];
    let mut x = vec![0.0; d];
    let mut acc = 0.0;
    loop {
        let mut w = 1.0;
        for l in 0..d {
            x[l] = rule[idx[l]].0;
            w *= rule[idx[l]].1;
        }
        acc += w * f(&x);
        let mut l = 0;
        loop {
            if l == d {
                return acc;
            }
            idx[l] += 1;
            if idx[l] < n {
                break;
            }
            idx[l] = 0;
            l += 1;
        }
    }
}

pub fn first_primes(n: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(n);
    let mut c = 2u32;
    while out.len() < n {
        if out.iter().take_while(|&&p| p * p <= c).all(|&p| !c.is_multiple_of(p)) {
            out.push(c);
        }
        c += 1;
    }
    out
}

/// Radical inverse of `i` in `base`.
pub fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % b) as f64;
        i /= b;
        f *= inv;
    }
    r
}

/// Halton sequence with a Cranley-Patterson shift drawn from `seed`.
#[derive(Debug, Clone)]
pub struct Halton {
    bases: Vec<u32>,
    shift: Vec<f64>,
}

impl Halton {
    pub fn new(d: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Halton {
            bases: first_primes(d),
            shift: (0..d).map(|_| rng.random::<f64>()).collect(),
        }
    }

    pub fn unshifted(d: usize) -> Self {
        Halton {
            bases: first_primes(d),
            shift: vec![0.0; d],
        }
    }

    /// The `i`-th point, strictly inside the unit cube.
    pub fn point(&self, i: u64, out: &mut [f64]) {
        for (l, o) in out.iter_mut().enumerate() {
            let v = (radical_inverse(i + 1, self.bases[l]) + self.shift[l]).fract();
            *o = v.clamp(1e-12, 1.0 - 1e-12);
        }
    }
}

/// Randomized QMC: `reps` independently shifted Halton rules of `n` points.
pub fn qmc_integrate(d: usize, n: usize, reps: usize, seed: u64, mut f: impl FnMut(&[f64]) -> f64) -> Estimate {
    let reps = reps.max(2);
    let mut x = vec![0.0; d];
    let means: Vec<f64> = (0..reps)
        .map(|r| {
            let h = Halton::new(d, seed.wrapping_add(r as u64));
            let mut s = 0.0;
            for i in 0..n as u64 {
                h.point(i, &mut x);
                s += f(&x);
            }
            s / n as f64
        })
        .collect();
    let mean = means.iter().sum::<f64>() / reps as f64;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    Estimate {
        value: mean,
        std_error: Some((var / reps as f64).sqrt()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gauss_rules_integrate_polynomials() {
        let r = gauss_legendre(5, 0.0, 2.0);
        let v: f64 = r.iter().map(|&(x, w)| w * x.powi(9)).sum();
        assert_abs_diff_eq!(v, 2f64.powi(10) / 10.0, epsilon = 1e-10);
        let c = breakpoint_gl(0.0, 1.0, &[0.3, 0.7], 0.1, 4);
        let v: f64 = c.iter().map(|&(x, w)| w * (x - 0.3).abs()).sum();
        assert_abs_diff_eq!(v, 0.5 * (0.09 + 0.49), epsilon = 1e-14);
    }

    #[test]
    fn tensor_rule_in_three_dims() {
        let r = gauss_legendre(6, 0.0, 1.0);
        let v = tensor_integrate(3, &r, |x| x[0] * x[1] * x[1] * x[2].powi(3));
        assert_abs_diff_eq!(v, 1.0 / 24.0, epsilon = 1e-14);
    }

    #[test]
    fn halton_points_are_inside_and_qmc_converges() {
        let h = Halton::new(4, 9);
        let mut x = [0.0; 4];
        for i in 0..1000 {
            h.point(i, &mut x);
            assert!(x.iter().all(|&v| v > 0.0 && v < 1.0));
        }
        let e = qmc_integrate(5, 4096, 8, 1, |x| x.iter().product());
        assert!((e.value - 1.0 / 32.0).abs() < 1e-3);
        assert!(e.std_error.unwrap() < 1e-3);
        assert_eq!(first_primes(5), vec![2, 3, 5, 7, 11]);
    }
}
