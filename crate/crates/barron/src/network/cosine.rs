//! Cosine networks drawn from the exact frequency measure of a target.
//!
//! A target `g = sum_k a_k phi_k` is unfolded into complex exponentials,
//! `g = Re sum_w c_w e^{i pi w.x} = sum_w |c_w| cos(pi w.x + theta_w)`, and the
//! atoms `(Z, pi w, theta_w)` are drawn with probability `|c_w| / Z`, where
//! `Z = sum |c_w|`. Each draw is an unbiased one-neuron estimator of `g`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::Serialize;

use super::{stream_rng, Activation, Neuron, Normalization, TwoLayerNet};
use crate::error::{Error, Result};
use crate::expansion::TrigExpansion;
use crate::trig::{BasisKey, Parity};

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub weight: f64,
    /// Integer frequency `w`; the neuron frequency is `pi * w`.
    pub omega: Vec<i64>,
    pub frequency: Vec<f64>,
    pub phase: f64,
}

#[derive(Debug, Clone)]
pub struct SamplingMeasure {
    pub d: usize,
    /// `Z = sum |c_w|`, the outer weight shared by all atoms.
    pub amplitude: f64,
    pub atoms: Vec<Atom>,
    index: WeightedIndex<f64>,
}

/// Complex exponential coefficients `c_w` of an expansion.
pub fn exponential_coefficients(g: &TrigExpansion) -> BTreeMap<Vec<i64>, Complex64> {
    let d = g.dim();
    let mut out: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
    for (key, a) in g.iter() {
        let nz: Vec<usize> = (0..d).filter(|&l| key.freq(l) > 0).collect();
        for mask in 0..(1u64 << nz.len()) {
            let mut omega = vec![0i64; d];
            let mut c = Complex64::new(a, 0.0);
            for (bit, &l) in nz.iter().enumerate() {
                let s = if mask >> bit & 1 == 1 { -1.0 } else { 1.0 };
                omega[l] = (s * key.freq(l) as f64) as i64;
                c *= match key.parity(l) {
                    Parity::Cos => Complex64::new(0.5, 0.0),
                    Parity::Sin => Complex64::new(0.0, -0.5 * s),
                };
            }
            *out.entry(omega).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
    }
    out.retain(|_, c| c.norm() > 0.0);
    out
}

pub fn build_measure(g: &TrigExpansion) -> Result<SamplingMeasure> {
    if !g.is_finite() {
        return Err(Error::Precondition("target has non-finite coefficients".into()));
    }
    let coefs = exponential_coefficients(g);
    if coefs.is_empty() {
        return Err(Error::Precondition("the zero function has no sampling measure".into()));
    }
    let z: f64 = coefs.values().map(|c| c.norm()).sum();
    let atoms: Vec<Atom> = coefs
        .into_iter()
        .map(|(omega, c)| Atom {
            weight: c.norm() / z,
            frequency: omega.iter().map(|&w| PI * w as f64).collect(),
            omega,
            phase: c.im.atan2(c.re),
        })
        .collect();
    let index = WeightedIndex::new(atoms.iter().map(|a| a.weight)).expect("positive weights");
    Ok(SamplingMeasure {
        d: g.dim(),
        amplitude: z,
        atoms,
        index,
    })
}

impl SamplingMeasure {
    /// `E[a cos(w.x + b)]`, which equals the target.
    pub fn mean_value(&self, x: &[f64]) -> f64 {
        self.atoms
            .iter()
            .map(|a| {
                let z: f64 = a.frequency.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() + a.phase;
                a.weight * self.amplitude * z.cos()
            })
            .sum()
    }

    /// `E ||a cos(w.x + b)||_{H1}^2`; the expected squared error of a
    /// `k`-neuron draw is `(this - ||g||_{H1}^2) / k`.
    pub fn second_moment_h1(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| {
                let r = Ridge {
                    amp: self.amplitude,
                    w: a.frequency.clone(),
                    phase: a.phase,
                };
                a.weight * gram(&r, &r) * self.amplitude * self.amplitude
            })
            .sum()
    }
}

/// `k` independent draws; all randomness comes from `(seed, stream)`.
pub fn sample_cosine_net(mu: &SamplingMeasure, k: usize, seed: u64, stream: u64) -> TwoLayerNet {
    let mut rng = stream_rng(seed, stream);
    let neurons = (0..k)
        .map(|_| {
            let a = &mu.atoms[mu.index.sample(&mut rng)];
            Neuron {
                a: mu.amplitude,
                w: a.frequency.clone(),
                b: a.phase,
            }
        })
        .collect();
    TwoLayerNet {
        activation: Activation::Cosine,
        d: mu.d,
        normalization: Normalization::Mean,
        offset: 0.0,
        neurons,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DrawSummary {
    pub errors: Vec<f64>,
    pub best: usize,
    pub best_error: f64,
    pub mean_error: f64,
}

/// `trials` independent draws (stream `r` for trial `r`); keeps the one with
/// the smallest exact H1 error.
pub fn best_of_draws(
    g: &TrigExpansion,
    mu: &SamplingMeasure,
    k: usize,
    trials: usize,
    seed: u64,
) -> (TwoLayerNet, DrawSummary) {
    let trials = trials.max(1);
    let mut best: Option<(TwoLayerNet, usize, f64)> = None;
    let mut errors = Vec::with_capacity(trials);
    for r in 0..trials {
        let net = sample_cosine_net(mu, k, seed, r as u64);
        let e = cosine_net_h1_error(&net, g);
        errors.push(e);
        if best.as_ref().is_none_or(|b| e < b.2) {
            best = Some((net, r, e));
        }
    }
    let (net, idx, be) = best.expect("at least one trial");
    let mean = errors.iter().sum::<f64>() / trials as f64;
    (
        net,
        DrawSummary {
            errors,
            best: idx,
            best_error: be,
            mean_error: mean,
        },
    )
}

/// `amp * cos(w . x + phase)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ridge {
    pub amp: f64,
    pub w: Vec<f64>,
    pub phase: f64,
}

fn wrap_phase(p: f64) -> f64 {
    let mut q = p.rem_euclid(2.0 * PI);
    if q > PI {
        q -= 2.0 * PI;
    }
    q
}

impl Ridge {
    /// First nonzero frequency component positive, phase in `(-pi, pi]`;
    /// a zero frequency becomes the constant `amp cos(phase)` with phase 0.
    fn canonical(mut self) -> Ridge {
        match self.w.iter().find(|&&v| v != 0.0) {
            None => {
                self.amp *= self.phase.cos();
                self.phase = 0.0;
            }
            Some(&v) if v < 0.0 => {
                self.w.iter_mut().for_each(|x| *x = -*x);
                self.phase = wrap_phase(-self.phase);
            }
            _ => self.phase = wrap_phase(self.phase),
        }
        self
    }
}

/// `(e^{it} - 1) / (it)`, continuous at 0.
fn sinc_factor(t: f64) -> Complex64 {
    if t.abs() < 1e-5 {
        Complex64::new(1.0 - t * t / 6.0, t / 2.0 - t * t * t / 24.0)
    } else {
        (Complex64::new(0.0, t).exp() - 1.0) / Complex64::new(0.0, t)
    }
}

/// `int_{[0,1]^d} cos(w . x + phi) dx`.
pub fn cos_integral(w: impl Iterator<Item = f64>, phi: f64) -> f64 {
    let mut z = Complex64::new(phi.cos(), phi.sin());
    for t in w {
        z *= sinc_factor(t);
    }
    z.re
}

/// H1 inner product of two unit-amplitude ridge cosines.
fn gram(p: &Ridge, q: &Ridge) -> f64 {
    let sum = cos_integral(p.w.iter().zip(&q.w).map(|(a, b)| a + b), p.phase + q.phase);
    let diff = cos_integral(p.w.iter().zip(&q.w).map(|(a, b)| a - b), p.phase - q.phase);
    let uv: f64 = p.w.iter().zip(&q.w).map(|(a, b)| a * b).sum();
    0.5 * (sum + diff) + uv * 0.5 * (diff - sum)
}

/// `|| sum_r r.amp cos(r.w . x + r.phase) ||_{H1}^2` in closed form.
pub fn ridge_h1_norm_sq(ridges: Vec<Ridge>) -> f64 {
    let mut rs: Vec<Ridge> = ridges.into_iter().filter(|r| r.amp != 0.0).map(Ridge::canonical).collect();
    rs.sort_by(|p, q| {
        p.w.iter()
            .zip(&q.w)
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(p.phase.total_cmp(&q.phase))
    });
    let mut merged: Vec<Ridge> = Vec::with_capacity(rs.len());
    for r in rs {
        match merged.last_mut() {
            Some(l)
                if l.w.iter().zip(&r.w).all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + a.abs()))
                    && (l.phase - r.phase).abs() <= 1e-12 =>
            {
                l.amp += r.amp
            }
            _ => merged.push(r),
        }
    }
    merged.retain(|r| r.amp != 0.0);
    let mut acc = 0.0;
    for (i, p) in merged.iter().enumerate() {
        acc += p.amp * p.amp * gram(p, p);
        for q in &merged[i + 1..] {
            acc += 2.0 * p.amp * q.amp * gram(p, q);
        }
    }
    acc.max(0.0)
}

fn net_ridges(net: &TwoLayerNet) -> Vec<Ridge> {
    let s = net.outer_scale();
    let mut v: Vec<Ridge> = net
        .neurons
        .iter()
        .map(|n| Ridge {
            amp: s * n.a,
            w: n.w.clone(),
            phase: n.b,
        })
        .collect();
    if net.offset != 0.0 {
        v.push(Ridge {
            amp: net.offset,
            w: vec![0.0; net.d],
            phase: 0.0,
        });
    }
    v
}

fn target_ridges(g: &TrigExpansion, sign: f64) -> Vec<Ridge> {
    exponential_coefficients(g)
        .into_iter()
        .map(|(omega, c)| Ridge {
            amp: sign * c.norm(),
            w: omega.iter().map(|&w| PI * w as f64).collect(),
            phase: c.im.atan2(c.re),
        })
        .collect()
}

/// `||net - g||_{H1}` for a cosine network, in closed form.
pub fn cosine_net_h1_error(net: &TwoLayerNet, g: &TrigExpansion) -> f64 {
    let mut r = net_ridges(net);
    r.extend(target_ridges(g, -1.0));
    ridge_h1_norm_sq(r).sqrt()
}

/// Exact conversion of a cosine network with integer frequencies (in units
/// of pi) to an expansion. `None` if some frequency is not an integer.
pub fn cosine_net_to_expansion(net: &TwoLayerNet) -> Option<TrigExpansion> {
    let d = net.d;
    let mut terms = Vec::new();
    for r in net_ridges(net) {
        let om: Vec<i64> = r
            .w
            .iter()
            .map(|&w| {
                let v = w / PI;
                let n = v.round();
                ((v - n).abs() < 1e-9).then_some(n as i64)
            })
            .collect::<Option<_>>()?;
        // Re(e^{i phi} prod_l (cos th_l + i sin th_l)) with th_l = pi om_l x_l
        let nz: Vec<usize> = (0..d).filter(|&l| om[l] != 0).collect();
        for mask in 0..(1u64 << nz.len()) {
            let mut parts: Vec<(Parity, u32)> = vec![(Parity::Cos, 0); d];
            let mut sines = 0i32;
            let mut sign = 1.0;
            for (bit, &l) in nz.iter().enumerate() {
                let f = om[l].unsigned_abs() as u32;
                if mask >> bit & 1 == 1 {
                    parts[l] = (Parity::Sin, f);
                    sines += 1;
                    if om[l] < 0 {
                        sign = -sign;
                    }
                } else {
                    parts[l] = (Parity::Cos, f);
                }
            }
            let coef = r.amp * sign * (r.phase + sines as f64 * PI / 2.0).cos();
            terms.push((BasisKey::from_parts(parts), coef));
        }
    }
    Some(TrigExpansion::from_terms(d, terms))
}
