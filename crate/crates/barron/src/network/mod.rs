//! Two-layer networks extracted from trigonometric expansions.
//!
//! Cosine networks `(1/k) sum a_i cos(w_i . x + b_i)` are drawn from an exact
//! probability measure over frequencies ([`cosine`]); ReLU networks
//! `c + sum a_i ReLU(w_i . x + b_i)` go through one-dimensional interpolation
//! of ridge profiles and Maurey sampling ([`relu`]).

pub mod cosine;
pub mod relu;

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::io::{fmt_real, parse_real};

pub use cosine::{best_of_draws, build_measure, cosine_net_h1_error, sample_cosine_net, SamplingMeasure};
pub use relu::{audit_relu_boxes, build_relu_net, relu_interp_1d, relu_net_h1_error, BoxAudit, RidgeProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Cosine,
    Relu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Outer weights are divided by the neuron count.
    Mean,
    /// Outer weights are used as they are.
    Sum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Neuron {
    pub a: f64,
    pub w: Vec<f64>,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoLayerNet {
    pub activation: Activation,
    pub d: usize,
    pub normalization: Normalization,
    pub offset: f64,
    pub neurons: Vec<Neuron>,
}

/// Deterministic generator for draw number `stream` under a global seed.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl TwoLayerNet {
    pub fn k(&self) -> usize {
        self.neurons.len()
    }

    /// Multiplier applied to every outer weight.
    pub fn outer_scale(&self) -> f64 {
        match self.normalization {
            Normalization::Mean if !self.neurons.is_empty() => 1.0 / self.neurons.len() as f64,
            _ => 1.0,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_with_grad(x).0
    }

    /// Value and gradient. The ReLU gradient takes 0 at the kink.
    pub fn eval_with_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let s = self.outer_scale();
        let mut v = self.offset;
        let mut g = vec![0.0; self.d];
        for n in &self.neurons {
            let z: f64 = n.w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() + n.b;
            let (val, slope) = match self.activation {
                Activation::Cosine => (z.cos(), -z.sin()),
                Activation::Relu => {
                    if z > 0.0 {
                        (z, 1.0)
                    } else {
                        (0.0, 0.0)
                    }
                }
            };
            v += s * n.a * val;
            if slope != 0.0 {
                for (gi, wi) in g.iter_mut().zip(&n.w) {
                    *gi += s * n.a * slope * wi;
                }
            }
        }
        (v, g)
    }

    /// Combine neurons with identical `(w, b)` into one; preserves the function.
    pub fn merged(&self) -> TwoLayerNet {
        let s = self.outer_scale();
        let mut v: Vec<Neuron> = self
            .neurons
            .iter()
            .map(|n| Neuron { a: n.a * s, w: n.w.clone(), b: n.b })
            .collect();
        v.sort_by(|p, q| {
            p.w.iter()
                .zip(&q.w)
                .map(|(a, b)| a.total_cmp(b))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(p.b.total_cmp(&q.b))
        });
        let mut out: Vec<Neuron> = Vec::with_capacity(v.len());
        for n in v {
            match out.last_mut() {
                Some(l) if l.w == n.w && l.b == n.b => l.a += n.a,
                _ => out.push(n),
            }
        }
        out.retain(|n| n.a != 0.0);
        TwoLayerNet {
            activation: self.activation,
            d: self.d,
            normalization: Normalization::Sum,
            offset: self.offset,
            neurons: out,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let act = match self.activation {
            Activation::Cosine => "cosine",
            Activation::Relu => "relu",
        };
        let norm = match self.normalization {
            Normalization::Mean => "mean",
            Normalization::Sum => "sum",
        };
        writeln!(s, "activation {act}").unwrap();
        writeln!(s, "d {}", self.d).unwrap();
        writeln!(s, "k {}", self.k()).unwrap();
        writeln!(s, "normalization {norm}").unwrap();
        writeln!(s, "offset {}", fmt_real(self.offset)).unwrap();
        for n in &self.neurons {
            s.push_str(&fmt_real(n.a));
            for w in &n.w {
                s.push(' ');
                s.push_str(&fmt_real(*w));
            }
            s.push(' ');
            s.push_str(&fmt_real(n.b));
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let mut header = |name: &str| -> Result<(usize, String)> {
            let (no, l) = lines.next().ok_or_else(|| Error::parse(0, format!("missing `{name}` header")))?;
            let rest = l
                .trim()
                .strip_prefix(name)
                .ok_or_else(|| Error::parse(no + 1, format!("expected `{name}`")))?;
            Ok((no + 1, rest.trim().to_string()))
        };
        let (no, act) = header("activation")?;
        let activation = match act.as_str() {
            "cosine" => Activation::Cosine,
            "relu" => Activation::Relu,
            _ => return Err(Error::parse(no, "unknown activation")),
        };
        let (no, d) = header("d")?;
        let d: usize = d.parse().map_err(|_| Error::parse(no, "bad dimension"))?;
        let (no, k) = header("k")?;
        let k: usize = k.parse().map_err(|_| Error::parse(no, "bad neuron count"))?;
        let (no, norm) = header("normalization")?;
        let normalization = match norm.as_str() {
            "mean" => Normalization::Mean,
            "sum" => Normalization::Sum,
            _ => return Err(Error::parse(no, "unknown normalization")),
        };
        let (no, off) = header("offset")?;
        let offset = parse_real(&off).ok_or_else(|| Error::parse(no, "bad offset"))?;
        let mut neurons = Vec::with_capacity(k);
        for (no, l) in lines {
            let v: Vec<f64> = l
                .split_whitespace()
                .map(parse_real)
                .collect::<Option<_>>()
                .ok_or_else(|| Error::parse(no + 1, "bad number"))?;
            if v.len() != d + 2 {
                return Err(Error::parse(no + 1, format!("expected {} fields, found {}", d + 2, v.len())));
            }
            neurons.push(Neuron {
                a: v[0],
                w: v[1..=d].to_vec(),
                b: v[d + 1],
            });
        }
        if neurons.len() != k {
            return Err(Error::parse(0, format!("header says {k} neurons, found {}", neurons.len())));
        }
        Ok(TwoLayerNet {
            activation,
            d,
            normalization,
            offset,
            neurons,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn one_cosine() -> TwoLayerNet {
        TwoLayerNet {
            activation: Activation::Cosine,
            d: 1,
            normalization: Normalization::Mean,
            offset: 0.0,
            neurons: vec![Neuron { a: 1.0, w: vec![PI], b: 0.0 }],
        }
    }

    #[test]
    fn single_neuron_value_and_gradient() {
        let n = one_cosine();
        assert_eq!(n.eval(&[0.0]), 1.0);
        let (_, g) = n.eval_with_grad(&[0.5]);
        assert!((g[0] + PI).abs() < 1e-15);
    }

    #[test]
    fn text_roundtrip_is_bit_exact() {
        let net = TwoLayerNet {
            activation: Activation::Relu,
            d: 2,
            normalization: Normalization::Sum,
            offset: 1.0 / 3.0,
            neurons: vec![
                Neuron { a: -0.1, w: vec![0.6, 0.8], b: 0.3 },
                Neuron { a: 2.0f64.sqrt(), w: vec![-1.0, 0.0], b: -PI / 7.0 },
            ],
        };
        let back = TwoLayerNet::from_text(&net.to_text()).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn merging_keeps_the_function() {
        let mut net = one_cosine();
        net.neurons.push(Neuron { a: 3.0, w: vec![PI], b: 0.0 });
        net.neurons.push(Neuron { a: 1.0, w: vec![2.0 * PI], b: 0.5 });
        let m = net.merged();
        assert_eq!(m.k(), 2);
        for x in [0.1, 0.4, 0.9] {
            assert!((m.eval(&[x]) - net.eval(&[x])).abs() < 1e-14);
        }
    }
}
