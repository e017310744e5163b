//! Tensor-product sine/cosine basis on the unit cube.
//!
//! A basis function is `prod_i trig_i(pi * k_i * x_i)` where each `trig_i` is
//! `sin` or `cos`. The per-coordinate choice is a [`ParityVector`], the
//! frequencies a [`MultiIndex`]. Internally the pair is packed into a
//! [`BasisKey`] so expansions can hash and sort keys cheaply.

use std::f64::consts::PI;
use std::fmt;

use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Largest frequency a single coordinate may carry.
pub const MAX_FREQ: u32 = (1 << 31) - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Sin,
    Cos,
}

impl Parity {
    /// `sin` flips to `cos` under differentiation and vice versa.
    pub fn flip(self) -> Parity {
        match self {
            Parity::Sin => Parity::Cos,
            Parity::Cos => Parity::Sin,
        }
    }

    pub fn eval(self, theta: f64) -> f64 {
        match self {
            Parity::Sin => theta.sin(),
            Parity::Cos => theta.cos(),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Parity::Sin => 's',
            Parity::Cos => 'c',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<u32>);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignedIndex(pub Vec<i64>);

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParityVector(pub Vec<Parity>);

impl MultiIndex {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|&k| (k as f64) * (k as f64)).sum()
    }
}

impl ParityVector {
    pub fn all_sin(d: usize) -> Self {
        ParityVector(vec![Parity::Sin; d])
    }

    pub fn all_cos(d: usize) -> Self {
        ParityVector(vec![Parity::Cos; d])
    }

    /// Sine in coordinates `i` and `j`, cosine elsewhere.
    pub fn mixed(d: usize, i: usize, j: usize) -> Self {
        let mut p = vec![Parity::Cos; d];
        p[i] = Parity::Sin;
        p[j] = Parity::Sin;
        ParityVector(p)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn sin_count(&self) -> usize {
        self.0.iter().filter(|&&p| p == Parity::Sin).count()
    }

    pub fn parse(s: &str) -> Option<Self> {
        s.chars()
            .map(|c| match c {
                's' => Some(Parity::Sin),
                'c' => Some(Parity::Cos),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(ParityVector)
    }
}

impl fmt::Display for ParityVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

/// Evaluate a single basis function at `x`.
pub fn eval_basis(p: &ParityVector, k: &MultiIndex, x: &[f64]) -> f64 {
    p.0.iter()
        .zip(&k.0)
        .zip(x)
        .map(|((&par, &ki), &xi)| par.eval(PI * ki as f64 * xi))
        .product()
}

/// `||basis||^2` in L2 of the unit cube.
pub fn l2_basis_norm_sq(p: &ParityVector, k: &MultiIndex) -> f64 {
    p.0.iter()
        .zip(&k.0)
        .map(|(&par, &ki)| coord_l2_sq(par, ki))
        .product()
}

fn coord_l2_sq(par: Parity, k: u32) -> f64 {
    match (par, k) {
        (Parity::Sin, 0) => 0.0,
        (Parity::Cos, 0) => 1.0,
        _ => 0.5,
    }
}

/// Fold one signed frequency: `sin(-v) = -sin(v)`, `cos(-v) = cos(v)`, `sin(0) = 0`.
/// Returns `None` when the factor vanishes identically.
pub fn fold_coord(par: Parity, v: i64) -> Result<Option<(u32, f64)>> {
    let a = v.unsigned_abs();
    if a > MAX_FREQ as u64 {
        return Err(Error::FrequencyOverflow(v));
    }
    let a = a as u32;
    Ok(match par {
        Parity::Cos => Some((a, 1.0)),
        Parity::Sin if a == 0 => None,
        Parity::Sin => Some((a, if v < 0 { -1.0 } else { 1.0 })),
    })
}

/// Map a signed index to its canonical non-negative index and sign, or `None`
/// if the basis function is identically zero.
pub fn fold_signed(p: &ParityVector, s: &SignedIndex) -> Result<Option<(MultiIndex, f64)>> {
    if p.dim() != s.0.len() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: s.0.len(),
        });
    }
    let mut idx = Vec::with_capacity(p.dim());
    let mut sign = 1.0;
    for (&par, &v) in p.0.iter().zip(&s.0) {
        match fold_coord(par, v)? {
            None => return Ok(None),
            Some((a, sg)) => {
                idx.push(a);
                sign *= sg;
            }
        }
    }
    Ok(Some((MultiIndex(idx), sign)))
}

/// Packed `(parity, frequency)` pairs, one `u32` per coordinate:
/// `freq << 1 | is_sin`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisKey(SmallVec<[u32; 4]>);

#[inline]
fn pack(par: Parity, k: u32) -> u32 {
    (k << 1) | (par == Parity::Sin) as u32
}

impl BasisKey {
    pub fn new(p: &ParityVector, k: &MultiIndex) -> Result<Self> {
        if p.dim() != k.dim() {
            return Err(Error::DimensionMismatch {
                expected: p.dim(),
                got: k.dim(),
            });
        }
        let mut v = SmallVec::with_capacity(p.dim());
        for (&par, &ki) in p.0.iter().zip(&k.0) {
            if ki > MAX_FREQ {
                return Err(Error::FrequencyOverflow(ki as i64));
            }
            v.push(pack(par, ki));
        }
        Ok(BasisKey(v))
    }

    pub(crate) fn from_parts(parts: impl IntoIterator<Item = (Parity, u32)>) -> Self {
        BasisKey(parts.into_iter().map(|(p, k)| pack(p, k)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn parity(&self, i: usize) -> Parity {
        if self.0[i] & 1 == 1 {
            Parity::Sin
        } else {
            Parity::Cos
        }
    }

    #[inline]
    pub fn freq(&self, i: usize) -> u32 {
        self.0[i] >> 1
    }

    pub fn coords(&self) -> impl Iterator<Item = (Parity, u32)> + '_ {
        (0..self.dim()).map(|i| (self.parity(i), self.freq(i)))
    }

    pub fn parity_vector(&self) -> ParityVector {
        ParityVector(self.coords().map(|c| c.0).collect())
    }

    pub fn index(&self) -> MultiIndex {
        MultiIndex(self.coords().map(|c| c.1).collect())
    }

    /// True when every coordinate has the same parity as `other`.
    pub fn same_parity(&self, other: &BasisKey) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| (a ^ b) & 1 == 0)
    }

    pub fn has_parity(&self, p: &ParityVector) -> bool {
        self.dim() == p.dim() && self.coords().zip(&p.0).all(|((a, _), &b)| a == b)
    }

    /// `sum_i k_i^2`.
    pub fn freq_norm_sq(&self) -> f64 {
        self.coords().map(|(_, k)| (k as f64) * (k as f64)).sum()
    }

    pub fn is_zero_index(&self) -> bool {
        self.coords().all(|(_, k)| k == 0)
    }

    pub fn max_freq(&self) -> u32 {
        self.coords().map(|c| c.1).max().unwrap_or(0)
    }

    /// Identically zero basis function (a sine factor at frequency zero).
    pub fn vanishes(&self) -> bool {
        self.coords().any(|(p, k)| p == Parity::Sin && k == 0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.coords()
            .zip(x)
            .map(|((p, k), &xi)| p.eval(PI * k as f64 * xi))
            .product()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.coords().map(|(p, k)| coord_l2_sq(p, k)).product()
    }
}

impl fmt::Display for BasisKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (p, _) in self.coords() {
            write!(f, "{}", p.as_char())?;
        }
        write!(f, " (")?;
        for (i, (_, k)) in self.coords().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

/// Closed form of `int_0^1 trig(pi * n * x) dx` for a signed integer `n`.
pub fn coord_integral(par: Parity, n: i64) -> f64 {
    match par {
        Parity::Cos => {
            if n == 0 {
                1.0
            } else {
                0.0
            }
        }
        Parity::Sin => {
            if n % 2 == 0 {
                0.0
            } else {
                2.0 / (PI * n as f64)
            }
        }
    }
}

/// Product-to-sum for one coordinate:
/// `trig_a(pi a x) * trig_b(pi b x) = sum_r c_r trig_r(pi n_r x)` with signed `n_r`.
/// Returns the parity of the result and the two signed terms.
#[inline]
pub(crate) fn coord_product(pa: Parity, a: i64, pb: Parity, b: i64) -> (Parity, [(i64, f64); 2]) {
    match (pa, pb) {
        (Parity::Sin, Parity::Sin) => (Parity::Cos, [(a - b, 0.5), (a + b, -0.5)]),
        (Parity::Cos, Parity::Cos) => (Parity::Cos, [(a - b, 0.5), (a + b, 0.5)]),
        (Parity::Sin, Parity::Cos) => (Parity::Sin, [(a + b, 0.5), (a - b, 0.5)]),
        (Parity::Cos, Parity::Sin) => (Parity::Sin, [(a + b, 0.5), (a - b, -0.5)]),
    }
}

/// `int_0^1 trig_a(pi a x) trig_b(pi b x) dx`.
pub fn coord_inner(pa: Parity, a: u32, pb: Parity, b: u32) -> f64 {
    let (par, terms) = coord_product(pa, a as i64, pb, b as i64);
    terms.iter().map(|&(n, c)| c * coord_integral(par, n)).sum()
}

/// `int_0^1 trig_a trig_b trig_c dx`.
pub fn coord_triple(pa: Parity, a: u32, pb: Parity, b: u32, pc: Parity, c: u32) -> f64 {
    let (par, terms) = coord_product(pa, a as i64, pb, b as i64);
    let mut acc = 0.0;
    for &(n, w) in &terms {
        let (p2, t2) = coord_product(par, n, pc, c as i64);
        for &(m, w2) in &t2 {
            acc += w * w2 * coord_integral(p2, m);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn gl(f: impl Fn(f64) -> f64) -> f64 {
        // 64 panels of 8-point Gauss nodes on [0, 1].
        let rule = gauss_quad::GaussLegendre::new(8.try_into().unwrap());
        (0..64)
            .map(|p| {
                let a = p as f64 / 64.0;
                rule.integrate(a, a + 1.0 / 64.0, &f)
            })
            .sum()
    }

    #[test]
    fn basis_value_at_center() {
        let p = ParityVector(vec![Parity::Sin, Parity::Cos]);
        let k = MultiIndex(vec![1, 2]);
        assert_abs_diff_eq!(eval_basis(&p, &k, &[0.5, 0.5]), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn l2_norms_match_quadrature() {
        for par in [Parity::Sin, Parity::Cos] {
            for k in 0..5u32 {
                let q = gl(|x| par.eval(PI * k as f64 * x).powi(2));
                assert_abs_diff_eq!(coord_l2_sq(par, k), q, epsilon = 1e-13);
            }
        }
        let p = ParityVector(vec![Parity::Sin, Parity::Cos, Parity::Cos]);
        let k = MultiIndex(vec![2, 0, 3]);
        assert_eq!(l2_basis_norm_sq(&p, &k), 0.25);
    }

    #[test]
    fn fold_sin_negative() {
        let p = ParityVector::all_sin(2);
        let (k, s) = fold_signed(&p, &SignedIndex(vec![-1, 2])).unwrap().unwrap();
        assert_eq!(k, MultiIndex(vec![1, 2]));
        assert_eq!(s, -1.0);
        assert!(fold_signed(&p, &SignedIndex(vec![0, 2])).unwrap().is_none());
        let c = ParityVector::all_cos(2);
        let (k, s) = fold_signed(&c, &SignedIndex(vec![-3, 0])).unwrap().unwrap();
        assert_eq!((k, s), (MultiIndex(vec![3, 0]), 1.0));
    }

    #[test]
    fn fold_overflow_is_reported() {
        let p = ParityVector::all_cos(1);
        assert!(matches!(
            fold_signed(&p, &SignedIndex(vec![1 << 40])),
            Err(Error::FrequencyOverflow(_))
        ));
    }

    #[test]
    fn coordinate_integrals_match_quadrature() {
        let pars = [Parity::Sin, Parity::Cos];
        for &pa in &pars {
            for &pb in &pars {
                for &pc in &pars {
                    for a in 0..4u32 {
                        for b in 0..4u32 {
                            for c in 0..3u32 {
                                let q = gl(|x| {
                                    pa.eval(PI * a as f64 * x)
                                        * pb.eval(PI * b as f64 * x)
                                        * pc.eval(PI * c as f64 * x)
                                });
                                assert_abs_diff_eq!(coord_triple(pa, a, pb, b, pc, c), q, epsilon = 1e-13);
                            }
                            let q = gl(|x| pa.eval(PI * a as f64 * x) * pb.eval(PI * b as f64 * x));
                            assert_abs_diff_eq!(coord_inner(pa, a, pb, b), q, epsilon = 1e-13);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn key_roundtrip_and_display() {
        let p = ParityVector(vec![Parity::Sin, Parity::Cos]);
        let k = MultiIndex(vec![1, 2]);
        let key = BasisKey::new(&p, &k).unwrap();
        assert_eq!(key.parity_vector(), p);
        assert_eq!(key.index(), k);
        assert_eq!(key.to_string(), "sc (1,2)");
    }
}
