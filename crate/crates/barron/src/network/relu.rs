//! ReLU networks from trigonometric targets.
//!
//! Each nonconstant term of the target is split into ridge functions
//! `sc(pi |k| w . x)` along unit directions `w = s o k / |k|`. Every ridge
//! profile is replaced by its piecewise-linear interpolant on `[-sqrt d, sqrt d]`
//! written with `2m` ReLUs, and `k` ReLU pieces are then drawn i.i.d. from the
//! resulting convex combination (Maurey sampling).

use std::f64::consts::PI;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::Serialize;

use super::{stream_rng, Activation, Neuron, Normalization, TwoLayerNet};
use crate::error::{Error, Result};
use crate::expansion::{barron_weight, TrigExpansion};
use crate::quadrature::{breakpoint_gl, composite_gl, qmc_integrate, tensor_integrate, Estimate};
use crate::trig::Parity;

/// `z -> amplitude * cos(lambda z + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RidgeProfile {
    pub lambda: f64,
    pub phase: f64,
    pub amplitude: f64,
}

impl RidgeProfile {
    pub fn value(&self, z: f64) -> f64 {
        self.amplitude * (self.lambda * z + self.phase).cos()
    }

    pub fn slope(&self, z: f64) -> f64 {
        -self.amplitude * self.lambda * (self.lambda * z + self.phase).sin()
    }

    /// Bound on `|g|, |g'|, |g''|`.
    pub fn bound(&self) -> f64 {
        self.amplitude.abs() * 1f64.max(self.lambda).max(self.lambda * self.lambda)
    }

    /// Stationary point nearest to 0 (positive on ties), if one lies inside
    /// `(-half_width, half_width)`.
    pub fn stationary_point(&self, half_width: f64) -> Option<f64> {
        if self.lambda == 0.0 {
            return None;
        }
        // lambda z + phase = n pi
        let t = self.phase / PI;
        let mut best: Option<f64> = None;
        for n in [t.floor(), t.ceil()] {
            let z = (n * PI - self.phase) / self.lambda;
            best = match best {
                None => Some(z),
                Some(b) if z.abs() < b.abs() || (z.abs() == b.abs() && z > b) => Some(z),
                keep => keep,
            };
        }
        best.filter(|z| z.abs() < half_width)
    }
}

/// `c + sum_i a_i ReLU(eps_i z + b_i)` with `eps_i = +-1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReluInterp {
    pub c: f64,
    pub a: Vec<f64>,
    pub eps: Vec<f64>,
    pub b: Vec<f64>,
    /// The `B` used for the coefficient bounds.
    pub bound: f64,
    pub alpha: f64,
    pub half_width: f64,
}

impl ReluInterp {
    pub fn eval(&self, z: f64) -> f64 {
        self.c
            + self
                .a
                .iter()
                .zip(&self.eps)
                .zip(&self.b)
                .map(|((a, e), b)| a * (e * z + b).max(0.0))
                .sum::<f64>()
    }

    pub fn slope(&self, z: f64) -> f64 {
        self.a
            .iter()
            .zip(&self.eps)
            .zip(&self.b)
            .map(|((a, e), b)| if e * z + b > 0.0 { a * e } else { 0.0 })
            .sum()
    }

    pub fn l1(&self) -> f64 {
        self.a.iter().map(|a| a.abs()).sum()
    }

    /// `|c| <= B`, `|a_i| <= 4 sqrt(d) B / m`, `|b_i| <= sqrt d`, checked exactly.
    pub fn boxes_hold(&self, d: usize) -> bool {
        let m = (self.a.len() / 2).max(1) as f64;
        let sd = (d as f64).sqrt();
        self.c.abs() <= self.bound
            && self.a.iter().all(|a| a.abs() <= 4.0 * sd * self.bound / m)
            && self.b.iter().all(|b| b.abs() <= self.half_width)
    }

    /// Break points `z_i` of the interpolant.
    pub fn breaks(&self) -> Vec<f64> {
        self.eps.iter().zip(&self.b).map(|(e, b)| -b / e).collect()
    }
}

/// Piecewise-linear interpolation of `g` on the grid `-h = z_0 < ... < z_m =
/// alpha < ... < z_2m = h`, in ReLU form.
pub fn interpolate_relu(g: impl Fn(f64) -> f64, alpha: f64, m: usize, half_width: f64, bound: f64) -> ReluInterp {
    let m = m.max(1);
    let h1 = (alpha + half_width) / m as f64;
    let h2 = (half_width - alpha) / m as f64;
    let z: Vec<f64> = (0..=2 * m)
        .map(|i| {
            if i < m {
                -half_width + i as f64 * h1
            } else if i == m {
                alpha
            } else if i == 2 * m {
                half_width
            } else {
                alpha + (i - m) as f64 * h2
            }
        })
        .collect();
    let gv: Vec<f64> = z.iter().map(|&t| g(t)).collect();
    let mut a = Vec::with_capacity(2 * m);
    let mut eps = Vec::with_capacity(2 * m);
    let mut b = Vec::with_capacity(2 * m);
    for i in 1..=m {
        let ai = if i < m {
            (gv[i - 1] - 2.0 * gv[i] + gv[i + 1]) / h1
        } else {
            (gv[m - 1] - gv[m]) / h1
        };
        a.push(ai);
        eps.push(-1.0);
        b.push(z[i]);
    }
    for i in m + 1..=2 * m {
        let ai = if i == m + 1 {
            (gv[m + 1] - gv[m]) / h2
        } else {
            (gv[i - 2] - 2.0 * gv[i - 1] + gv[i]) / h2
        };
        a.push(ai);
        eps.push(1.0);
        b.push(-z[i - 1]);
    }
    ReluInterp {
        c: gv[m],
        a,
        eps,
        b,
        bound,
        alpha,
        half_width,
    }
}

/// Interpolate a ridge profile on `[-sqrt d, sqrt d]` about its stationary point.
pub fn relu_interp_1d(profile: RidgeProfile, m: usize, d: usize) -> Result<ReluInterp> {
    let hw = (d as f64).sqrt();
    let bound = profile.bound();
    if profile.lambda == 0.0 {
        return Ok(ReluInterp {
            c: profile.value(0.0),
            a: vec![],
            eps: vec![],
            b: vec![],
            bound,
            alpha: 0.0,
            half_width: hw,
        });
    }
    let alpha = profile.stationary_point(hw).ok_or(Error::NoStationaryPoint)?;
    Ok(interpolate_relu(|z| profile.value(z), alpha, m, hw, bound))
}

/// H1 error of the interpolant on its interval, by breakpoint-aligned Gauss rules.
pub fn interp_h1_error(interp: &ReluInterp, profile: &RidgeProfile) -> f64 {
    let hw = interp.half_width;
    let panel = (PI / (4.0 * profile.lambda.max(1.0))).min(hw / 4.0);
    let rule = breakpoint_gl(-hw, hw, &interp.breaks(), panel, 8);
    rule.iter()
        .map(|&(z, w)| w * ((interp.eval(z) - profile.value(z)).powi(2) + (interp.slope(z) - profile.slope(z)).powi(2)))
        .sum::<f64>()
        .sqrt()
}

/// One dictionary direction: `q(w . x)` with weight `weight` in the convex combination.
#[derive(Debug, Clone, PartialEq)]
pub struct DictAtom {
    pub weight: f64,
    pub direction: Vec<f64>,
    pub profile: RidgeProfile,
}

/// Convex decomposition `g - a_0 = sum_j weight_j profile_j(w_j . x)`.
/// Returns `(a_0, A_g, atoms)`.
pub fn relu_dictionary(g: &TrigExpansion) -> (f64, f64, Vec<DictAtom>) {
    let d = g.dim();
    let mut a0 = 0.0;
    let mut mass = 0.0;
    for (key, a) in g.iter() {
        if key.is_zero_index() {
            a0 += a;
        } else {
            mass += a.abs() * barron_weight(key, 2);
        }
    }
    let mut atoms = Vec::new();
    for (key, a) in g.iter() {
        if key.is_zero_index() {
            continue;
        }
        let nz: Vec<usize> = (0..d).filter(|&l| key.freq(l) > 0).collect();
        let sines = (0..d).filter(|&l| key.parity(l) == Parity::Sin).count();
        let norm = key.freq_norm_sq().sqrt();
        let w2 = barron_weight(key, 2);
        // +-s give the same ridge function, so only s with a leading + is kept
        let combos = 1u64 << (nz.len() - 1);
        for mask in 0..combos {
            let mut dir = vec![0.0; d];
            let mut eps = if (sines / 2) % 2 == 1 { -1.0 } else { 1.0 };
            for (bit, &l) in nz.iter().enumerate() {
                let s = if bit > 0 && (mask >> (bit - 1)) & 1 == 1 { -1.0 } else { 1.0 };
                dir[l] = s * key.freq(l) as f64 / norm;
                if key.parity(l) == Parity::Sin {
                    eps *= s;
                }
            }
            let sign = eps * a.signum();
            atoms.push(DictAtom {
                weight: a.abs() * w2 / (combos as f64 * mass),
                direction: dir,
                profile: RidgeProfile {
                    lambda: PI * norm,
                    phase: if sines % 2 == 1 { -PI / 2.0 } else { 0.0 },
                    amplitude: sign * mass / w2,
                },
            });
        }
    }
    (a0, mass, atoms)
}

/// Maurey-sampled ReLU network with `k` neurons and `m` grid points per side,
/// drawn from stream `stream` of `seed`.
pub fn build_relu_net(g: &TrigExpansion, k: usize, m: usize, seed: u64, stream: u64) -> Result<TwoLayerNet> {
    if !g.is_finite() {
        return Err(Error::Precondition("target has non-finite coefficients".into()));
    }
    if k == 0 || m == 0 {
        return Err(Error::Precondition("k and m must be positive".into()));
    }
    let d = g.dim();
    let (a0, _, atoms) = relu_dictionary(g);
    let mut net = TwoLayerNet {
        activation: Activation::Relu,
        d,
        normalization: Normalization::Sum,
        offset: a0,
        neurons: Vec::new(),
    };
    if atoms.is_empty() {
        return Ok(net);
    }
    let interps: Vec<ReluInterp> = atoms
        .iter()
        .map(|at| relu_interp_1d(at.profile, m, d))
        .collect::<Result<_>>()?;
    let pieces: Vec<Option<WeightedIndex<f64>>> = interps
        .iter()
        .map(|it| WeightedIndex::new(it.a.iter().map(|a| a.abs())).ok())
        .collect();
    let outer = WeightedIndex::new(atoms.iter().map(|a| a.weight)).expect("positive weights");
    let mut rng = stream_rng(seed, stream);
    let inv_k = 1.0 / k as f64;
    let mut offset = 0.0;
    for _ in 0..k {
        let j = outer.sample(&mut rng);
        let it = &interps[j];
        offset += a0 + it.c;
        let (a, w, b) = match &pieces[j] {
            Some(dist) => {
                let i = dist.sample(&mut rng);
                let s = it.l1();
                let w: Vec<f64> = atoms[j].direction.iter().map(|v| it.eps[i] * v).collect();
                (s * it.a[i].signum() * inv_k, w, it.b[i])
            }
            None => (0.0, atoms[j].direction.clone(), 0.0),
        };
        net.neurons.push(Neuron { a, w, b });
    }
    net.offset = offset * inv_k;
    Ok(net)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxAudit {
    pub passed: bool,
    pub outer_l1: f64,
    pub outer_l1_bound: f64,
    pub max_direction_defect: f64,
    pub max_bias: f64,
    pub bias_bound: f64,
    pub offset: f64,
    pub offset_bound: f64,
}

/// Check the coefficient boxes against `8 sqrt(d) B`, `|w| = 1`, `sqrt d`, `2B`,
/// with `B` the weight-2 mass of the target.
pub fn audit_relu_boxes(net: &TwoLayerNet, g: &TrigExpansion) -> BoxAudit {
    let b = g.weighted_l1(2);
    let sd = (net.d as f64).sqrt();
    let outer_l1: f64 = net.neurons.iter().map(|n| n.a.abs()).sum::<f64>() * net.outer_scale();
    let max_direction_defect = net
        .neurons
        .iter()
        .map(|n| (n.w.iter().map(|v| v * v).sum::<f64>().sqrt() - 1.0).abs())
        .fold(0.0, f64::max);
    let max_bias = net.neurons.iter().map(|n| n.b.abs()).fold(0.0, f64::max);
    let mut a = BoxAudit {
        passed: false,
        outer_l1,
        outer_l1_bound: 8.0 * sd * b,
        max_direction_defect,
        max_bias,
        bias_bound: sd,
        offset: net.offset,
        offset_bound: 2.0 * b,
    };
    a.passed = a.outer_l1 <= a.outer_l1_bound
        && (net.neurons.is_empty() || a.max_direction_defect <= 1e-12)
        && a.max_bias <= a.bias_bound
        && a.offset.abs() <= a.offset_bound;
    a
}

/// `||net - g||_{H1}` for a ReLU network: kink-aligned Gauss rules in 1D,
/// composite tensor rules for `d <= 3`, randomized QMC beyond.
pub fn relu_net_h1_error(net: &TwoLayerNet, g: &TrigExpansion, seed: u64) -> Estimate {
    let net = net.merged();
    let d = net.d;
    let integrand = |x: &[f64]| {
        let (nv, ng) = net.eval_with_grad(x);
        let (gv, gg) = g.eval_with_grad(x);
        (nv - gv).powi(2) + ng.iter().zip(&gg).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
    };
    let freq = g.max_freq().max(1) as f64;
    match d {
        1 => {
            let breaks: Vec<f64> = net.neurons.iter().filter(|n| n.w[0] != 0.0).map(|n| -n.b / n.w[0]).collect();
            let rule = breakpoint_gl(0.0, 1.0, &breaks, 1.0 / (4.0 * freq), 8);
            let v: f64 = rule.iter().map(|&(x, w)| w * integrand(&[x])).sum();
            Estimate {
                value: v.max(0.0).sqrt(),
                std_error: None,
            }
        }
        2 | 3 => {
            // kinks are not aligned with the grid, so many low-order panels
            // beat few high-order ones
            let (lo, hi) = if d == 2 { (96, 256) } else { (24, 40) };
            let rule = composite_gl(0.0, 1.0, ((8.0 * freq) as usize).clamp(lo, hi), 3);
            let v = tensor_integrate(d, &rule, integrand);
            Estimate {
                value: v.max(0.0).sqrt(),
                std_error: None,
            }
        }
        _ => {
            let e = qmc_integrate(d, 1 << 13, 8, seed, integrand);
            let v = e.value.max(0.0).sqrt();
            // delta method for the square root
            let se = e.std_error.map(|s| if v > 0.0 { s / (2.0 * v) } else { s.sqrt() });
            Estimate { value: v, std_error: se }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{cosine_mode, sine_mode};
    use approx::assert_abs_diff_eq;

    fn sin_profile() -> RidgeProfile {
        RidgeProfile {
            lambda: PI,
            phase: -PI / 2.0,
            amplitude: 1.0,
        }
    }

    #[test]
    fn stationary_point_tie_goes_positive() {
        assert_abs_diff_eq!(sin_profile().stationary_point(1.0).unwrap(), 0.5, epsilon = 1e-15);
        let c = RidgeProfile {
            lambda: PI,
            phase: 0.0,
            amplitude: 1.0,
        };
        assert_eq!(c.stationary_point(1.0), Some(0.0));
    }

    #[test]
    fn interpolant_hits_grid_values() {
        let it = relu_interp_1d(sin_profile(), 8, 1).unwrap();
        assert_eq!(it.a.len(), 16);
        for i in 0..=8 {
            let z = -1.0 + i as f64 * 1.5 / 8.0;
            assert_abs_diff_eq!(it.eval(z), (PI * z).sin(), epsilon = 1e-13);
        }
        for i in 0..=8 {
            let z = 0.5 + i as f64 * 0.5 / 8.0;
            assert_abs_diff_eq!(it.eval(z), (PI * z).sin(), epsilon = 1e-13);
        }
        assert!(it.boxes_hold(1));
        let e = interp_h1_error(&it, &sin_profile());
        assert!(e <= 10f64.sqrt() * PI * PI / 8.0, "{e}");
    }

    #[test]
    fn affine_functions_are_reproduced() {
        let it = interpolate_relu(|z| 0.3 - 2.0 * z, 0.2, 5, 1.0, 2.0);
        for z in [-1.0, -0.4, 0.0, 0.7, 1.0] {
            assert_abs_diff_eq!(it.eval(z), 0.3 - 2.0 * z, epsilon = 1e-13);
            assert_abs_diff_eq!(it.slope(z + 1e-9), -2.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn dictionary_reproduces_target() {
        let g = TrigExpansion::lincomb(
            1.0,
            &crate::fixtures::random_expansion(&crate::trig::ParityVector::mixed(3, 0, 2), 4, 2, 5),
            0.0,
            &TrigExpansion::zero(3),
        );
        let (a0, _, atoms) = relu_dictionary(&g);
        for x in [[0.1, 0.2, 0.3], [0.7, 0.4, 0.95]] {
            let v: f64 = a0
                + atoms
                    .iter()
                    .map(|at| {
                        let z: f64 = at.direction.iter().zip(&x).map(|(w, x)| w * x).sum();
                        at.weight * at.profile.value(z)
                    })
                    .sum::<f64>();
            assert_abs_diff_eq!(v, g.eval(&x), epsilon = 1e-12);
        }
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_target_gives_offset_only() {
        let g = TrigExpansion::constant(2, 0.7);
        let net = build_relu_net(&g, 10, 3, 0, 0).unwrap();
        assert_eq!(net.k(), 0);
        assert_eq!(net.offset, 0.7);
        assert_eq!(relu_net_h1_error(&net, &g, 0).value, 0.0);
    }

    #[test]
    fn boxes_hold_for_cosine_target() {
        let g = cosine_mode(&[1, 2]).add(&TrigExpansion::constant(2, 0.5));
        let net = build_relu_net(&g, 64, 8, 1, 0).unwrap();
        let audit = audit_relu_boxes(&net, &g);
        assert!(audit.passed, "{audit:?}");
        let e = relu_net_h1_error(&net, &g, 0).value;
        assert!(e.is_finite());
        let s1 = build_relu_net(&sine_mode(&[1]), 16, 4, 2, 0).unwrap();
        assert!(audit_relu_boxes(&s1, &sine_mode(&[1])).passed);
    }
}
