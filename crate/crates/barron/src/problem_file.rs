//! Declarative problem files.
//!
//! ```text
//! [meta]
//! d = 1
//! bc = dirichlet
//! a_min = 1
//! a_max = 1
//! c_min = 1
//! c_max = 1
//!
//! [A.1.1]
//! c (0) 1
//!
//! [c]
//! c (0) 1
//!
//! [f]
//! s (1) 1.0869604401089358e1
//! ```
//!
//! Indices in `[A.i.j]` are 1-based. A missing diagonal entry is the constant 1
//! and a missing off-diagonal entry is 0. When only one of `[A.i.j]` and
//! `[A.j.i]` is given, it is used for both.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::expansion::{parse_terms, Boundary, TrigExpansion};
use crate::io::{fmt_real, parse_real};
use crate::problem::{Bounds, EllipticProblem};

enum Section {
    Meta,
    A(usize, usize),
    C,
    F,
}

pub fn parse_problem(text: &str) -> Result<EllipticProblem> {
    let mut meta: Vec<(usize, String, String)> = Vec::new();
    let mut blocks: Vec<(Section, usize, Vec<(usize, &str)>)> = Vec::new();
    let mut current: Option<usize> = None;
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::parse(no, "unterminated section header"))?
                .trim();
            let sec = match name {
                "meta" => Section::Meta,
                "c" => Section::C,
                "f" => Section::F,
                _ => {
                    let parts: Vec<&str> = name.split('.').collect();
                    match parts.as_slice() {
                        ["A", i, j] => {
                            let i: usize = i.parse().map_err(|_| Error::parse(no, "bad row index"))?;
                            let j: usize = j.parse().map_err(|_| Error::parse(no, "bad column index"))?;
                            if i == 0 || j == 0 {
                                return Err(Error::parse(no, "A indices are 1-based"));
                            }
                            Section::A(i - 1, j - 1)
                        }
                        _ => return Err(Error::parse(no, format!("unknown section `{name}`"))),
                    }
                }
            };
            blocks.push((sec, no, Vec::new()));
            current = Some(blocks.len() - 1);
            continue;
        }
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some(b) = current else {
            return Err(Error::parse(no, "content before the first section"));
        };
        if let Section::Meta = blocks[b].0 {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(no, "expected `key = value`"))?;
            meta.push((no, k.trim().to_string(), v.trim().to_string()));
        } else {
            blocks[b].2.push((no, raw));
        }
    }

    let get = |key: &str| -> Result<(usize, &str)> {
        meta.iter()
            .find(|(_, k, _)| k == key)
            .map(|(no, _, v)| (*no, v.as_str()))
            .ok_or_else(|| Error::parse(0, format!("[meta] is missing `{key}`")))
    };
    let real = |key: &str| -> Result<f64> {
        let (no, v) = get(key)?;
        parse_real(v).ok_or_else(|| Error::parse(no, format!("bad value for `{key}`")))
    };
    let (no, dv) = get("d")?;
    let d: usize = dv.parse().map_err(|_| Error::parse(no, "bad dimension"))?;
    if d == 0 {
        return Err(Error::parse(no, "dimension must be positive"));
    }
    let (no, bv) = get("bc")?;
    let bc: Boundary = bv.parse().map_err(|_| Error::parse(no, "bc must be dirichlet or neumann"))?;
    let bounds = Bounds {
        a_min: real("a_min")?,
        a_max: real("a_max")?,
        c_min: real("c_min")?,
        c_max: real("c_max")?,
    };

    let mut a: Vec<Option<TrigExpansion>> = vec![None; d * d];
    let mut c = None;
    let mut f = None;
    for (sec, no, lines) in blocks {
        let slot = match sec {
            Section::Meta => continue,
            Section::A(i, j) => {
                if i >= d || j >= d {
                    return Err(Error::parse(no, format!("A index out of range for d = {d}")));
                }
                &mut a[i * d + j]
            }
            Section::C => &mut c,
            Section::F => &mut f,
        };
        if slot.is_some() {
            return Err(Error::parse(no, "duplicate section"));
        }
        *slot = Some(parse_terms(lines.into_iter(), Some(d))?);
    }
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let e = match (&a[i * d + j], &a[j * d + i]) {
                (Some(e), _) | (None, Some(e)) => e.clone(),
                (None, None) if i == j => TrigExpansion::constant(d, 1.0),
                (None, None) => TrigExpansion::zero(d),
            };
            out.push(e);
        }
    }
    Ok(EllipticProblem {
        d,
        bc,
        a: out,
        c: c.ok_or_else(|| Error::parse(0, "missing [c] section"))?,
        f: f.ok_or_else(|| Error::parse(0, "missing [f] section"))?,
        bounds,
    })
}

pub fn read_problem(path: &Path) -> Result<EllipticProblem> {
    let text = std::fs::read_to_string(path)?;
    parse_problem(&text)
}

fn push_terms(s: &mut String, e: &TrigExpansion) {
    for (k, v) in e.iter() {
        writeln!(s, "{k} {}", fmt_real(v)).unwrap();
    }
}

/// Every entry of `A` is written on the upper triangle and diagonal.
pub fn write_problem(p: &EllipticProblem) -> String {
    let mut s = String::from("[meta]\n");
    writeln!(s, "d = {}", p.d).unwrap();
    writeln!(s, "bc = {}", p.bc).unwrap();
    writeln!(s, "a_min = {}", fmt_real(p.bounds.a_min)).unwrap();
    writeln!(s, "a_max = {}", fmt_real(p.bounds.a_max)).unwrap();
    writeln!(s, "c_min = {}", fmt_real(p.bounds.c_min)).unwrap();
    writeln!(s, "c_max = {}", fmt_real(p.bounds.c_max)).unwrap();
    for i in 0..p.d {
        for j in i..p.d {
            let e = p.a_ij(i, j);
            if i != j && e.is_empty() {
                continue;
            }
            writeln!(s, "\n[A.{}.{}]", i + 1, j + 1).unwrap();
            push_terms(&mut s, e);
        }
    }
    s.push_str("\n[c]\n");
    push_terms(&mut s, &p.c);
    s.push_str("\n[f]\n");
    push_terms(&mut s, &p.f);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn defaults_fill_the_matrix() {
        let text = "[meta]\nd = 2\nbc = dirichlet\na_min = 1\na_max = 1\nc_min = 1\nc_max = 1\n\n[c]\ncc (0,0) 1\n\n[f]\nss (1,1) 2\n";
        let p = parse_problem(text).unwrap();
        assert_eq!(p.a_ij(0, 0), &TrigExpansion::constant(2, 1.0));
        assert!(p.a_ij(0, 1).is_empty());
        p.check_structure().unwrap();
    }

    #[test]
    fn one_sided_off_diagonal_is_mirrored() {
        let text = "[meta]\nd = 2\nbc = neumann\na_min = 0.5\na_max = 1.5\nc_min = 1\nc_max = 1\n[A.2.1]\nss (1,1) 0.1\n[c]\ncc (0,0) 1\n[f]\ncc (1,0) 1\n";
        let p = parse_problem(text).unwrap();
        assert_eq!(p.a_ij(0, 1), p.a_ij(1, 0));
        assert_eq!(p.a_ij(0, 1).len(), 1);
    }

    #[test]
    fn roundtrip() {
        for bc in [Boundary::Dirichlet, Boundary::Neumann] {
            let p = fixtures::random_problem(3, bc, 11);
            assert_eq!(parse_problem(&write_problem(&p)).unwrap(), p);
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_problem("[meta]\nd = 1\n[q]\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
        assert!(parse_problem("s (1) 1\n").is_err());
    }
}
