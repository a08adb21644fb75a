//! Plain-text surface definitions.
//!
//! ```text
//! # comment
//! label briancon-speder(t=1)
//! weights 3 2 1
//! degree 15
//! term 5 0 0 1 0        # a b c re im
//! term 1 6 0 1 0
//! relaxed-weights       # optional: skip the w1 >= w2 > w3 check
//! ```
//!
//! Blank lines and text after `#` are ignored. `weights`, `degree` and at
//! least one `term` are required; `label` defaults to `surface`.

use super::{Term, WeightedSurface};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::fmt::Write;

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn numbers<T: std::str::FromStr>(fields: &[&str], line: usize, what: &str) -> Result<Vec<T>> {
    fields
        .iter()
        .map(|f| f.parse::<T>().map_err(|_| parse_error(line, format!("invalid {what} value `{f}`"))))
        .collect()
}

pub fn parse_surface(text: &str) -> Result<WeightedSurface> {
    let mut label = String::from("surface");
    let mut weights: Option<[u32; 3]> = None;
    let mut degree: Option<u32> = None;
    let mut terms = Vec::new();
    let mut relaxed = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap_or_default();
        let fields: Vec<&str> = parts.collect();
        match key {
            "label" => label = fields.join(" "),
            "weights" => {
                let w: Vec<u32> = numbers(&fields, line_no, "weight")?;
                if w.len() != 3 {
                    return Err(parse_error(line_no, "`weights` takes exactly three integers"));
                }
                weights = Some([w[0], w[1], w[2]]);
            }
            "degree" => {
                let d: Vec<u32> = numbers(&fields, line_no, "degree")?;
                if d.len() != 1 {
                    return Err(parse_error(line_no, "`degree` takes one integer"));
                }
                degree = Some(d[0]);
            }
            "term" => {
                if fields.len() != 5 {
                    return Err(parse_error(line_no, "`term` takes `a b c re im`"));
                }
                let e: Vec<u32> = numbers(&fields[..3], line_no, "exponent")?;
                let c: Vec<f64> = numbers(&fields[3..], line_no, "coefficient")?;
                terms.push(Term::new([e[0], e[1], e[2]], Complex64::new(c[0], c[1])));
            }
            "relaxed-weights" => relaxed = true,
            other => return Err(parse_error(line_no, format!("unknown key `{other}`"))),
        }
    }
    let weights = weights.ok_or_else(|| parse_error(0, "missing `weights`"))?;
    let degree = degree.ok_or_else(|| parse_error(0, "missing `degree`"))?;
    if terms.is_empty() {
        return Err(parse_error(0, "no `term` lines"));
    }
    if relaxed {
        WeightedSurface::relaxed(weights, degree, terms, label)
    } else {
        WeightedSurface::new(weights, degree, terms, label)
    }
}

/// Canonical text form; floats are written with full round-trip precision.
pub fn write_surface(surface: &WeightedSurface) -> String {
    let mut out = String::new();
    let [w1, w2, w3] = surface.weights();
    let _ = writeln!(out, "label {}", surface.label());
    let _ = writeln!(out, "weights {w1} {w2} {w3}");
    let _ = writeln!(out, "degree {}", surface.degree());
    for t in surface.terms() {
        let [a, b, c] = t.exponents;
        let _ = writeln!(out, "term {a} {b} {c} {:?} {:?}", t.coeff.re, t.coeff.im);
    }
    if !(w1 >= w2 && w2 > w3) {
        let _ = writeln!(out, "relaxed-weights");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surfaces::{briancon_speder, brieskorn, plane_x0};
    use proptest::prelude::*;

    #[test]
    fn parses_documented_example() {
        let text = "# BS(1)\nlabel bs1\nweights 3 2 1\ndegree 15\nterm 5 0 0 1 0\nterm 0 0 15 1 0\nterm 0 7 1 1 0\nterm 1 6 0 1 0\n";
        let s = parse_surface(text).unwrap();
        assert_eq!(s.terms(), briancon_speder(Complex64::new(1.0, 0.0)).terms());
        assert_eq!(s.label(), "bs1");
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_surface("weights 3 2 1\ndegree 15\nterm 5 0 0 one 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        let err = parse_surface("weights 3 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn relaxed_surfaces_roundtrip() {
        let s = plane_x0();
        assert_eq!(parse_surface(&write_surface(&s)).unwrap(), s);
        let b = brieskorn(2, 4, 5).unwrap();
        assert_eq!(parse_surface(&write_surface(&b)).unwrap(), b);
    }

    proptest! {
        #[test]
        fn roundtrip_any_t(re in -1e3f64..1e3, im in -1e3f64..1e3) {
            let s = briancon_speder(Complex64::new(re, im));
            prop_assert_eq!(parse_surface(&write_surface(&s)).unwrap(), s);
        }
    }
}
