//! Sparse trigonometric expansions and their Barron-type norms.
//!
//! A [`TrigExpansion`] is a finite sum `sum_k a_k phi_k` over [`BasisKey`]s,
//! stored sorted with no zero coefficients. All algebra is exact up to
//! floating-point rounding: products use product-to-sum identities, the
//! shifted Laplacian is diagonal, and integrals are closed forms.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::io::{fmt_real, parse_real};
use crate::trig::{coord_inner, coord_integral, coord_product, fold_coord, BasisKey, MultiIndex, Parity, ParityVector};

/// Boundary condition, which also fixes the admissible basis family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Dirichlet,
    Neumann,
}

impl Boundary {
    /// Parity of the solution family: all-sine for Dirichlet, all-cosine for Neumann.
    pub fn parity(self, d: usize) -> ParityVector {
        match self {
            Boundary::Dirichlet => ParityVector::all_sin(d),
            Boundary::Neumann => ParityVector::all_cos(d),
        }
    }

    fn coord_parity(self) -> Parity {
        match self {
            Boundary::Dirichlet => Parity::Sin,
            Boundary::Neumann => Parity::Cos,
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Dirichlet => "dirichlet",
            Boundary::Neumann => "neumann",
        })
    }
}

impl FromStr for Boundary {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dirichlet" => Ok(Boundary::Dirichlet),
            "neumann" => Ok(Boundary::Neumann),
            other => Err(format!("unknown boundary condition `{other}`")),
        }
    }
}

/// Relative threshold under which wrong-parity terms are treated as rounding noise.
pub const PARITY_NOISE: f64 = 1e-12;

/// Outcome of [`TrigExpansion::prune`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct PruneReport {
    pub terms_removed: usize,
    /// `sum |a_k| (1 + pi^2 |k|^2)` over the removed terms.
    pub barron_mass: f64,
}

/// `1 + pi^n |k|^n` with `0^0 = 1`.
pub fn barron_weight(key: &BasisKey, n: u32) -> f64 {
    let r = key.freq_norm_sq().sqrt();
    1.0 + (PI * r).powi(n as i32)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrigExpansion {
    dim: usize,
    terms: Vec<(BasisKey, f64)>,
}

impl TrigExpansion {
    pub fn zero(dim: usize) -> Self {
        TrigExpansion { dim, terms: Vec::new() }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self::single(&ParityVector::all_cos(dim), &MultiIndex(vec![0; dim]), c).expect("valid key")
    }

    pub fn single(p: &ParityVector, k: &MultiIndex, coef: f64) -> Result<Self> {
        let key = BasisKey::new(p, k)?;
        Ok(Self::from_terms(p.dim(), [(key, coef)]))
    }

    /// Build from arbitrary terms, merging duplicate keys and dropping zeros.
    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (BasisKey, f64)>) -> Self {
        let mut v: Vec<(BasisKey, f64)> = terms.into_iter().collect();
        for (k, _) in &v {
            assert_eq!(k.dim(), dim, "term dimension does not match expansion");
        }
        v.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(BasisKey, f64)> = Vec::with_capacity(v.len());
        for (k, c) in v {
            match out.last_mut() {
                Some((lk, lc)) if *lk == k => *lc += c,
                _ => out.push((k, c)),
            }
        }
        out.retain(|(k, c)| *c != 0.0 && !k.vanishes());
        TrigExpansion { dim, terms: out }
    }

    fn from_map(dim: usize, map: FxHashMap<BasisKey, f64>) -> Self {
        let mut v: Vec<(BasisKey, f64)> = map.into_iter().filter(|(k, c)| *c != 0.0 && !k.vanishes()).collect();
        v.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        TrigExpansion { dim, terms: v }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(BasisKey, f64)] {
        &self.terms
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BasisKey, f64)> {
        self.terms.iter().map(|(k, c)| (k, *c))
    }

    pub fn coeff(&self, key: &BasisKey) -> f64 {
        match self.terms.binary_search_by(|(k, _)| k.cmp(key)) {
            Ok(i) => self.terms[i].1,
            Err(_) => 0.0,
        }
    }

    pub fn max_abs_coef(&self) -> f64 {
        self.terms.iter().fold(0.0, |m, (_, c)| m.max(c.abs()))
    }

    pub fn max_freq(&self) -> u32 {
        self.terms.iter().map(|(k, _)| k.max_freq()).max().unwrap_or(0)
    }

    /// `Some(c)` when the expansion is the constant function `c` (or zero).
    pub fn as_constant(&self) -> Option<f64> {
        match self.terms.as_slice() {
            [] => Some(0.0),
            [(k, c)] if k.is_zero_index() => Some(*c),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.terms.iter().all(|(_, c)| c.is_finite())
    }

    /// The shared parity vector, `None` for the zero expansion, or an error
    /// when terms of different families are mixed.
    pub fn family(&self) -> Result<Option<ParityVector>> {
        let Some((first, _)) = self.terms.first() else {
            return Ok(None);
        };
        for (k, _) in &self.terms[1..] {
            if !k.same_parity(first) {
                return Err(Error::MixedFamily(
                    first.parity_vector().to_string(),
                    k.parity_vector().to_string(),
                ));
            }
        }
        Ok(Some(first.parity_vector()))
    }

    /// True when every term has parity `p` (vacuously for zero).
    pub fn is_family(&self, p: &ParityVector) -> bool {
        self.terms.iter().all(|(k, _)| k.has_parity(p))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_terms(self.dim, self.terms.iter().map(|(k, c)| (k.clone(), c * s)))
    }

    /// `a * x + b * y` by a sorted merge.
    pub fn lincomb(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        assert_eq!(x.dim, y.dim, "dimension mismatch in linear combination");
        let mut out = Vec::with_capacity(x.len() + y.len());
        let (mut i, mut j) = (0, 0);
        while i < x.terms.len() || j < y.terms.len() {
            let ord = match (x.terms.get(i), y.terms.get(j)) {
                (Some(p), Some(q)) => p.0.cmp(&q.0),
                (Some(_), None) => std::cmp::Ordering::Less,
                _ => std::cmp::Ordering::Greater,
            };
            let (k, c) = match ord {
                std::cmp::Ordering::Less => {
                    i += 1;
                    (x.terms[i - 1].0.clone(), a * x.terms[i - 1].1)
                }
                std::cmp::Ordering::Greater => {
                    j += 1;
                    (y.terms[j - 1].0.clone(), b * y.terms[j - 1].1)
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                    (x.terms[i - 1].0.clone(), a * x.terms[i - 1].1 + b * y.terms[j - 1].1)
                }
            };
            if c != 0.0 {
                out.push((k, c));
            }
        }
        TrigExpansion { dim: x.dim, terms: out }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::lincomb(1.0, self, 1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::lincomb(1.0, self, -1.0, other)
    }

    /// Exact product via per-coordinate product-to-sum identities.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        if let Some(c) = other.as_constant() {
            return Ok(self.scale(c));
        }
        if let Some(c) = self.as_constant() {
            return Ok(other.scale(c));
        }
        let mut acc: FxHashMap<BasisKey, f64> = FxHashMap::default();
        acc.reserve(self.len() * other.len().min(64) * 2);
        let mut scratch = ProductScratch::new(self.dim);
        for (ka, a) in &self.terms {
            for (kb, b) in &other.terms {
                scratch.expand(ka, kb, a * b, &mut acc)?;
            }
        }
        Ok(Self::from_map(self.dim, acc))
    }

    /// Exact partial derivative in coordinate `i`.
    pub fn derivative(&self, i: usize) -> Result<Self> {
        if i >= self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: i + 1,
            });
        }
        let terms = self.terms.iter().filter_map(|(k, c)| {
            let (p, f) = (k.parity(i), k.freq(i));
            if f == 0 {
                return None;
            }
            let w = PI * f as f64;
            let coef = match p {
                Parity::Sin => c * w,
                Parity::Cos => -c * w,
            };
            let key = BasisKey::from_parts(k.coords().enumerate().map(|(l, (pl, fl))| {
                if l == i {
                    (pl.flip(), fl)
                } else {
                    (pl, fl)
                }
            }));
            Some((key, coef))
        });
        Ok(Self::from_terms(self.dim, terms.collect::<Vec<_>>()))
    }

    /// `(I - Delta)^{-1}` with the boundary condition's natural basis.
    ///
    /// Wrong-parity terms below [`PARITY_NOISE`] times the largest coefficient
    /// are dropped; larger ones are an error.
    pub fn inv_shifted_laplacian(&self, bc: Boundary) -> Result<Self> {
        let target = bc.coord_parity();
        let noise = PARITY_NOISE * self.max_abs_coef();
        let mut out = Vec::with_capacity(self.len());
        for (k, c) in &self.terms {
            if k.coords().all(|(p, _)| p == target) {
                out.push((k.clone(), c / (1.0 + PI * PI * k.freq_norm_sq())));
            } else if c.abs() > noise {
                return Err(Error::ParityMismatch {
                    key: k.to_string(),
                    bc: bc.to_string(),
                    coef: *c,
                });
            }
        }
        Ok(TrigExpansion { dim: self.dim, terms: out })
    }

    /// Barron norm `sum |a_k| (1 + pi^n |k|^n)`; requires a single family.
    pub fn barron_norm(&self, n: u32) -> Result<f64> {
        self.family()?;
        Ok(self.weighted_l1(n))
    }

    /// The same weighted sum without the family check. For mixed expansions it
    /// bounds the norm of any single-family regrouping by the triangle inequality.
    pub fn weighted_l1(&self, n: u32) -> f64 {
        self.terms.iter().map(|(k, c)| c.abs() * barron_weight(k, n)).fold(0.0, |s, v| s + v)
    }

    /// `(u, v)` in L2 of the unit cube, exact for any pair of families.
    pub fn l2_inner(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch in inner product");
        if let (Ok(Some(p)), Ok(Some(q))) = (self.family(), other.family()) {
            if p == q {
                return self.matched_inner(other);
            }
        }
        let groups_a = group_by_parity(self);
        let groups_b = group_by_parity(other);
        let mut acc = 0.0;
        for (pa, ta) in &groups_a {
            for (pb, tb) in &groups_b {
                if pa == pb {
                    for &i in ta {
                        let (k, c) = &self.terms[i];
                        acc += c * other.coeff(k) * k.l2_norm_sq();
                    }
                } else {
                    for &i in ta {
                        let (ka, ca) = &self.terms[i];
                        for &j in tb {
                            let (kb, cb) = &other.terms[j];
                            let mut w = ca * cb;
                            for ((p1, f1), (p2, f2)) in ka.coords().zip(kb.coords()) {
                                w *= coord_inner(p1, f1, p2, f2);
                                if w == 0.0 {
                                    break;
                                }
                            }
                            acc += w;
                        }
                    }
                }
            }
        }
        acc
    }

    fn matched_inner(&self, other: &Self) -> f64 {
        let (small, large) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        small
            .terms
            .iter()
            .map(|(k, c)| c * large.coeff(k) * k.l2_norm_sq())
            .fold(0.0, |s, v| s + v)
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_inner(self).max(0.0).sqrt()
    }

    pub fn h1_inner(&self, other: &Self) -> f64 {
        if let (Ok(Some(p)), Ok(Some(q))) = (self.family(), other.family()) {
            if p == q {
                // derivatives of one family stay mutually orthogonal
                let (small, large) = if self.len() <= other.len() { (self, other) } else { (other, self) };
                return small
                    .terms
                    .iter()
                    .map(|(k, c)| c * large.coeff(k) * k.l2_norm_sq() * (1.0 + PI * PI * k.freq_norm_sq()))
                    .fold(0.0, |s, v| s + v);
            }
        }
        let mut acc = self.l2_inner(other);
        for i in 0..self.dim {
            let a = self.derivative(i).expect("index in range");
            let b = other.derivative(i).expect("index in range");
            acc += a.l2_inner(&b);
        }
        acc
    }

    pub fn h1_norm(&self) -> f64 {
        self.h1_inner(self).max(0.0).sqrt()
    }

    /// Upper bound on the dual norm. For Dirichlet data the Poincare constant
    /// `1 / (pi sqrt d)` applies; Neumann test functions include constants, so
    /// only `||f||_{L2}` is a valid bound there.
    pub fn hminus1_upper(&self, bc: Boundary) -> f64 {
        match bc {
            Boundary::Dirichlet => self.l2_norm() / (PI * (self.dim as f64).sqrt()),
            Boundary::Neumann => self.l2_norm(),
        }
    }

    /// `int_{[0,1]^d} g`.
    pub fn integral(&self) -> f64 {
        self.terms
            .iter()
            .map(|(k, c)| c * k.coords().map(|(p, f)| coord_integral(p, f as i64)).product::<f64>())
            .fold(0.0, |s, v| s + v)
    }

    /// Remove terms with `|a_k| < tol`.
    pub fn prune(&self, tol: f64) -> (Self, PruneReport) {
        let mut report = PruneReport::default();
        let mut kept = Vec::with_capacity(self.len());
        for (k, c) in &self.terms {
            if c.abs() < tol {
                report.terms_removed += 1;
                report.barron_mass += c.abs() * barron_weight(k, 2);
            } else {
                kept.push((k.clone(), *c));
            }
        }
        (TrigExpansion { dim: self.dim, terms: kept }, report)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim, "point dimension mismatch");
        let tab = TrigTable::new(x, self.max_freq());
        self.terms.iter().map(|(k, c)| c * tab.basis(k)).fold(0.0, |s, v| s + v)
    }

    /// Value and gradient at `x`.
    pub fn eval_with_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        assert_eq!(x.len(), self.dim, "point dimension mismatch");
        let tab = TrigTable::new(x, self.max_freq());
        let mut v = 0.0;
        let mut g = vec![0.0; self.dim];
        let mut fac = vec![0.0; self.dim];
        let mut dfac = vec![0.0; self.dim];
        for (k, c) in &self.terms {
            for (l, (p, f)) in k.coords().enumerate() {
                let (s, co) = tab.sc(l, f);
                let w = PI * f as f64;
                match p {
                    Parity::Sin => {
                        fac[l] = s;
                        dfac[l] = w * co;
                    }
                    Parity::Cos => {
                        fac[l] = co;
                        dfac[l] = -w * s;
                    }
                }
            }
            v += c * fac.iter().product::<f64>();
            for i in 0..self.dim {
                let mut t = c * dfac[i];
                for (l, fl) in fac.iter().enumerate() {
                    if l != i {
                        t *= fl;
                    }
                }
                g[i] += t;
            }
        }
        (v, g)
    }

    /// One term per line, `parity (k1,...,kd) coefficient`, after a `# dim` header.
    pub fn to_text(&self) -> String {
        let mut s = format!("# dim = {}\n", self.dim);
        for (k, c) in &self.terms {
            s.push_str(&format!("{k} {}\n", fmt_real(*c)));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        parse_terms(text.lines().enumerate().map(|(i, l)| (i + 1, l)), None)
    }
}

/// Parse term lines; `dim` may come from the caller or a `# dim = d` header.
pub(crate) fn parse_terms<'a>(
    lines: impl Iterator<Item = (usize, &'a str)>,
    mut dim: Option<usize>,
) -> Result<TrigExpansion> {
    let mut terms = Vec::new();
    for (no, raw) in lines {
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(v) = rest.strip_prefix("dim") {
                let v = v.trim().trim_start_matches('=').trim();
                let d: usize = v.parse().map_err(|_| Error::parse(no, "bad dim header"))?;
                if dim.is_some_and(|x| x != d) {
                    return Err(Error::parse(no, "dim header disagrees with context"));
                }
                dim = Some(d);
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let (key, coef) = parse_term_line(no, line)?;
        match dim {
            Some(d) if d != key.dim() => {
                return Err(Error::parse(no, format!("term has dimension {}, expected {d}", key.dim())))
            }
            None => dim = Some(key.dim()),
            _ => {}
        }
        terms.push((key, coef));
    }
    let dim = dim.ok_or_else(|| Error::parse(0, "empty expansion without a dim header"))?;
    Ok(TrigExpansion::from_terms(dim, terms))
}

fn parse_term_line(no: usize, line: &str) -> Result<(BasisKey, f64)> {
    let open = line.find('(').ok_or_else(|| Error::parse(no, "missing `(`"))?;
    let close = line.find(')').ok_or_else(|| Error::parse(no, "missing `)`"))?;
    let par = ParityVector::parse(line[..open].trim()).ok_or_else(|| Error::parse(no, "bad parity string"))?;
    let idx = line[open + 1..close]
        .split(',')
        .map(|t| t.trim().parse::<u32>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::parse(no, format!("bad index: {e}")))?;
    let coef = parse_real(line[close + 1..].trim()).ok_or_else(|| Error::parse(no, "bad coefficient"))?;
    if par.dim() != idx.len() {
        return Err(Error::parse(no, "parity and index lengths differ"));
    }
    let key = BasisKey::new(&par, &MultiIndex(idx)).map_err(|e| Error::parse(no, e))?;
    Ok((key, coef))
}

impl fmt::Display for TrigExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn group_by_parity(g: &TrigExpansion) -> Vec<(ParityVector, Vec<usize>)> {
    let mut map: FxHashMap<ParityVector, Vec<usize>> = FxHashMap::default();
    for (i, (k, _)) in g.terms.iter().enumerate() {
        map.entry(k.parity_vector()).or_default().push(i);
    }
    let mut v: Vec<_> = map.into_iter().collect();
    v.sort_by(|a, b| a.0.cmp(&b.0));
    v
}

/// Reusable buffers for expanding one product of basis functions.
struct ProductScratch {
    options: Vec<SmallVec<[(Parity, u32, f64); 2]>>,
    counter: Vec<usize>,
}

impl ProductScratch {
    fn new(d: usize) -> Self {
        ProductScratch {
            options: vec![SmallVec::new(); d],
            counter: vec![0; d],
        }
    }

    fn expand(&mut self, ka: &BasisKey, kb: &BasisKey, coef: f64, acc: &mut FxHashMap<BasisKey, f64>) -> Result<()> {
        let d = ka.dim();
        for l in 0..d {
            let (par, terms) = coord_product(ka.parity(l), ka.freq(l) as i64, kb.parity(l), kb.freq(l) as i64);
            let opts = &mut self.options[l];
            opts.clear();
            for (n, w) in terms {
                if let Some((f, s)) = fold_coord(par, n)? {
                    match opts.iter_mut().find(|o| o.1 == f) {
                        Some(o) => o.2 += w * s,
                        None => opts.push((par, f, w * s)),
                    }
                }
            }
            opts.retain(|o| o.2 != 0.0);
            if opts.is_empty() {
                return Ok(());
            }
        }
        self.counter.iter_mut().for_each(|c| *c = 0);
        loop {
            let mut c = coef;
            for l in 0..d {
                c *= self.options[l][self.counter[l]].2;
            }
            let key = BasisKey::from_parts((0..d).map(|l| {
                let o = self.options[l][self.counter[l]];
                (o.0, o.1)
            }));
            *acc.entry(key).or_insert(0.0) += c;
            let mut l = 0;
            loop {
                if l == d {
                    return Ok(());
                }
                self.counter[l] += 1;
                if self.counter[l] < self.options[l].len() {
                    break;
                }
                self.counter[l] = 0;
                l += 1;
            }
        }
    }
}

/// Cached `sin(pi k x_l)`, `cos(pi k x_l)` for one point.
struct TrigTable {
    max: usize,
    sin: Vec<f64>,
    cos: Vec<f64>,
}

impl TrigTable {
    fn new(x: &[f64], max_freq: u32) -> Self {
        let max = max_freq as usize + 1;
        let mut sin = Vec::with_capacity(x.len() * max);
        let mut cos = Vec::with_capacity(x.len() * max);
        for &xi in x {
            for k in 0..max {
                let (s, c) = (PI * k as f64 * xi).sin_cos();
                sin.push(s);
                cos.push(c);
            }
        }
        TrigTable { max, sin, cos }
    }

    #[inline]
    fn sc(&self, l: usize, f: u32) -> (f64, f64) {
        let i = l * self.max + f as usize;
        (self.sin[i], self.cos[i])
    }

    #[inline]
    fn basis(&self, k: &BasisKey) -> f64 {
        k.coords()
            .enumerate()
            .map(|(l, (p, f))| {
                let (s, c) = self.sc(l, f);
                match p {
                    Parity::Sin => s,
                    Parity::Cos => c,
                }
            })
            .product()
    }
}
