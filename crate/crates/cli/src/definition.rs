//! Plain-text spacetime definitions.
//!
//! A definition is line oriented.  `#` starts a comment; blank lines are
//! ignored.  Section headers are bare keywords; the lines after a header
//! belong to it until the next header.
//!
//! ```text
//! chart polar-slab
//!
//! coordinates
//!   t
//!   r range 0.5 2.5
//!   phi period 2*pi
//!   z
//!
//! exclude r = 0
//!
//! parameters
//!   m positive range 1.2 1.6
//!
//! functions
//!   psi(t, r)
//!
//! coframe
//!   e0 = dt
//!   e1 = dr
//!   e2 = (r) dphi
//!   e3 = dz
//!
//! potential
//!   a = (m/r) dt
//!
//! expected
//!   w[1][2] = -dphi
//! ```
//!
//! Coordinate and parameter attributes are single tokens (`range` takes two
//! numbers, `period` one space-free expression).  Right-hand sides of
//! `coframe`, `potential`, `expected`, and `exclude` lines run to the end of
//! the line; every 1-form term must end in a `d<coordinate>` token.

use cartanq_core::chart::{Chart, Locus};
use cartanq_core::coframe::Coframe;
use cartanq_core::form::{Basis, Form};
use cartanq_core::parse::parse;
use cartanq_core::{Assumption, Context, Error, Expr, Name, Result};
use std::path::Path;

#[derive(Clone, Debug)]
pub struct Definition {
    pub name: String,
    pub chart: Chart,
    pub ctx: Context,
    pub coframe: Coframe,
    pub potential: Option<Form>,
    /// Golden connection components `w[i][j]` to compare against.
    pub expected: Vec<(usize, usize, Form)>,
}

pub fn load(path: &Path) -> Result<Definition> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        offset: 0,
        message: format!("{}: {}", path.display(), e),
    })?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("definition");
    parse_definition(&text, stem)
}

#[derive(Clone, Copy)]
struct At {
    number: usize,
    offset: usize,
}

impl At {
    fn err(&self, message: String) -> Error {
        Error::Parse {
            offset: self.offset,
            message: format!("line {}: {}", self.number, message),
        }
    }
    /// Re-anchors an expression-level parse error to this line.
    fn wrap(&self, e: Error) -> Error {
        match e {
            Error::Parse { message, .. } => self.err(message),
            Error::Undeclared { name, .. } => self.err(format!("undeclared symbol `{}`", name)),
            other => other,
        }
    }
}

struct RawLine {
    at: At,
    text: String,
}

#[derive(PartialEq)]
enum Section {
    None,
    Coordinates,
    Parameters,
    Functions,
    Coframe,
    Potential,
    Expected,
}

pub fn parse_definition(text: &str, default_name: &str) -> Result<Definition> {
    let mut name = default_name.to_string();
    let mut ctx = Context::new();
    let mut coord_order: Vec<String> = Vec::new();
    let mut periods: Vec<(String, String, At)> = Vec::new();
    let mut excludes: Vec<RawLine> = Vec::new();
    let mut coframe_lines: Vec<RawLine> = Vec::new();
    let mut potential_lines: Vec<RawLine> = Vec::new();
    let mut expected_lines: Vec<RawLine> = Vec::new();

    // pass 1: declarations into the context, expression lines collected
    let mut section = Section::None;
    let mut offset = 0usize;
    for (i, raw) in text.split('\n').enumerate() {
        let at = At {
            number: i + 1,
            offset,
        };
        offset += raw.len() + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        match line {
            "coordinates" => {
                section = Section::Coordinates;
                continue;
            }
            "parameters" => {
                section = Section::Parameters;
                continue;
            }
            "functions" => {
                section = Section::Functions;
                continue;
            }
            "coframe" => {
                section = Section::Coframe;
                continue;
            }
            "potential" => {
                section = Section::Potential;
                continue;
            }
            "expected" => {
                section = Section::Expected;
                continue;
            }
            _ => {}
        }
        if let Some(rest) = line.strip_prefix("chart ") {
            name = rest.trim().to_string();
            section = Section::None;
            continue;
        }
        if let Some(rest) = line.strip_prefix("exclude ") {
            excludes.push(RawLine {
                at,
                text: rest.to_string(),
            });
            continue;
        }
        let keep = |v: &mut Vec<RawLine>| {
            v.push(RawLine {
                at,
                text: line.to_string(),
            })
        };
        match section {
            Section::Coordinates => {
                let mut toks = line.split_whitespace();
                let head = toks.next().unwrap().to_string();
                ctx.coordinate(&head);
                coord_order.push(head.clone());
                scan_attrs(&mut ctx, &head, toks, at, &mut periods)?;
            }
            Section::Parameters => {
                let mut toks = line.split_whitespace();
                let head = toks.next().unwrap().to_string();
                ctx.parameter(&head);
                scan_attrs(&mut ctx, &head, toks, at, &mut periods)?;
            }
            Section::Functions => {
                let (fname, args) = split_signature(line, at)?;
                let arg_refs: Vec<&str> = args.iter().map(String::as_str).collect();
                ctx.function(&fname, &arg_refs);
            }
            Section::Coframe => keep(&mut coframe_lines),
            Section::Potential => keep(&mut potential_lines),
            Section::Expected => keep(&mut expected_lines),
            Section::None => return Err(at.err(format!("'{}' outside any section", line))),
        }
    }

    if coord_order.len() != 4 {
        return Err(Error::Parse {
            offset: 0,
            message: format!("need exactly four coordinates, found {}", coord_order.len()),
        });
    }

    // pass 2: expressions under the full context
    let coord_names: Vec<&str> = coord_order.iter().map(String::as_str).collect();
    let mut chart = Chart::new(&name, &coord_names);
    for (coord, token, at) in &periods {
        if !coord_order.contains(coord) {
            return Err(at.err(format!("period on non-coordinate '{}'", coord)));
        }
        let period = parse(token, &ctx).map_err(|e| at.wrap(e))?;
        chart.set_period(coord, period);
    }
    for line in &excludes {
        let (coord, value) = split_equation(line)?;
        if chart.index(&Name::new(&coord)).is_none() {
            return Err(line
                .at
                .err(format!("exclusion on unknown coordinate '{}'", coord)));
        }
        let v = parse(&value, &ctx).map_err(|e| line.at.wrap(e))?;
        chart.exclude(Locus::new(&coord, v));
    }

    if coframe_lines.len() != 4 {
        return Err(Error::Parse {
            offset: 0,
            message: format!("need exactly four coframe legs, found {}", coframe_lines.len()),
        });
    }
    let mut legs = Vec::new();
    for (i, line) in coframe_lines.iter().enumerate() {
        let (lhs, rhs) = split_equation(line)?;
        let want = format!("e{}", i);
        if lhs != want {
            return Err(line
                .at
                .err(format!("expected '{} = ...', found '{}'", want, lhs)));
        }
        legs.push(one_form_at(&rhs, &chart, &ctx, line.at)?);
    }
    let coframe = Coframe::new(&chart, legs, &ctx)?;

    let potential = match potential_lines.len() {
        0 => None,
        1 => {
            let line = &potential_lines[0];
            let (lhs, rhs) = split_equation(line)?;
            if lhs != "a" {
                return Err(line.at.err("potential line must read 'a = ...'".into()));
            }
            Some(one_form_at(&rhs, &chart, &ctx, line.at)?.with_imaginary(true))
        }
        n => {
            return Err(Error::Parse {
                offset: 0,
                message: format!("potential section holds one line, found {}", n),
            })
        }
    };

    let mut expected = Vec::new();
    for line in &expected_lines {
        let (lhs, rhs) = split_equation(line)?;
        let (i, j) = connection_indices(&lhs, line.at)?;
        expected.push((i, j, one_form_at(&rhs, &chart, &ctx, line.at)?));
    }

    Ok(Definition {
        name,
        chart,
        ctx,
        coframe,
        potential,
        expected,
    })
}

fn scan_attrs<'a>(
    ctx: &mut Context,
    name: &str,
    mut it: impl Iterator<Item = &'a str>,
    at: At,
    periods: &mut Vec<(String, String, At)>,
) -> Result<()> {
    while let Some(a) = it.next() {
        match a {
            "positive" => ctx.assume(name, Assumption::Positive),
            "nonzero" => ctx.assume(name, Assumption::Nonzero),
            "integer" => ctx.assume(name, Assumption::Integer),
            "perturbation" => ctx.assume(name, Assumption::Perturbation),
            "range" => {
                let mut next = |what: &str| -> Result<f64> {
                    let tok = it
                        .next()
                        .ok_or_else(|| at.err(format!("range needs a {} bound", what)))?;
                    tok.parse::<f64>()
                        .map_err(|_| at.err(format!("'{}' is not a number", tok)))
                };
                let lo = next("lower")?;
                let hi = next("upper")?;
                ctx.set_range(name, lo, hi);
            }
            "period" => {
                let tok = it
                    .next()
                    .ok_or_else(|| at.err("period needs a value".into()))?;
                periods.push((name.to_string(), tok.to_string(), at));
            }
            other => return Err(at.err(format!("unknown attribute '{}'", other))),
        }
    }
    Ok(())
}

fn split_signature(line: &str, at: At) -> Result<(String, Vec<String>)> {
    let open = line
        .find('(')
        .ok_or_else(|| at.err("function needs '(args)'".into()))?;
    let close = line
        .rfind(')')
        .ok_or_else(|| at.err("unclosed argument list".into()))?;
    let name = line[..open].trim().to_string();
    let args = line[open + 1..close]
        .split(',')
        .map(|a| a.trim().to_string())
        .filter(|a| !a.is_empty())
        .collect();
    Ok((name, args))
}

fn split_equation(line: &RawLine) -> Result<(String, String)> {
    match line.text.split_once('=') {
        Some((l, r)) => Ok((l.trim().to_string(), r.trim().to_string())),
        None => Err(line.at.err("expected '<lhs> = <rhs>'".into())),
    }
}

fn connection_indices(lhs: &str, at: At) -> Result<(usize, usize)> {
    let body = lhs
        .strip_prefix("w[")
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| at.err("expected 'w[i][j] = ...'".into()))?;
    let (i, j) = body
        .split_once("][")
        .ok_or_else(|| at.err("expected 'w[i][j] = ...'".into()))?;
    let parse_idx = |s: &str| -> Result<usize> {
        let v = s
            .parse::<usize>()
            .map_err(|_| at.err(format!("bad index '{}'", s)))?;
        if v > 3 {
            return Err(at.err(format!("index {} out of range", v)));
        }
        Ok(v)
    };
    Ok((parse_idx(i)?, parse_idx(j)?))
}

/// Splits a sum at parenthesis depth zero, keeping signs.
fn split_terms(s: &str) -> Vec<(i32, String)> {
    let mut out = Vec::new();
    let mut depth = 0u32;
    let mut sign = 1;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '(' => {
                depth += 1;
                cur.push(c);
            }
            ')' => {
                depth = depth.saturating_sub(1);
                cur.push(c);
            }
            '+' | '-' if depth == 0 => {
                if !cur.trim().is_empty() {
                    out.push((sign, cur.trim().to_string()));
                }
                sign = if c == '-' { -1 } else { 1 };
                cur = String::new();
            }
            _ => cur.push(c),
        }
    }
    if !cur.trim().is_empty() {
        out.push((sign, cur.trim().to_string()));
    }
    out
}

fn one_form_at(rhs: &str, chart: &Chart, ctx: &Context, at: At) -> Result<Form> {
    one_form(rhs, chart, ctx).map_err(|e| at.wrap(e))
}

/// Parses `coeff d<coord> + ...`; a bare `d<coord>` has coefficient one.
pub fn one_form(rhs: &str, chart: &Chart, ctx: &Context) -> Result<Form> {
    let terms = split_terms(rhs);
    if terms.is_empty() {
        return Err(Error::Parse {
            offset: 0,
            message: "empty 1-form".into(),
        });
    }
    let mut total = Form::zero(chart, 1, Basis::Coordinate);
    for (sign, term) in terms {
        let (coeff_txt, diff_tok) = match term.rfind(char::is_whitespace) {
            Some(p) => (term[..p].trim(), term[p..].trim()),
            None => ("", term.as_str()),
        };
        let coord = diff_tok.strip_prefix('d').ok_or_else(|| Error::Parse {
            offset: 0,
            message: format!("term '{}' must end in d<coordinate>", term),
        })?;
        let mu = chart
            .index(&Name::new(coord))
            .ok_or_else(|| Error::Parse {
                offset: 0,
                message: format!("unknown coordinate differential 'd{}'", coord),
            })?;
        let coeff_txt = coeff_txt.trim_end_matches('*').trim();
        let mut coeff = if coeff_txt.is_empty() {
            Expr::one()
        } else {
            parse(coeff_txt, ctx)?
        };
        if sign < 0 {
            coeff = Expr::mul(vec![Expr::int(-1), coeff]);
        }
        total = total.add(
            &Form::component(chart, Basis::Coordinate, &[mu as u8], coeff)?,
            ctx,
        )?;
    }
    total.simplified(ctx)
}

#[cfg(test)]
mod tests {
    use super::*;

    const POLAR: &str = "\
# flat slab in polar coordinates
chart polar-slab

coordinates
  t
  r range 0.5 2.5
  phi period 2*pi
  z

exclude r = 0

coframe
  e0 = dt
  e1 = dr
  e2 = (r) dphi
  e3 = dz

expected
  w[1][2] = -dphi
";

    #[test]
    fn parses_the_polar_slab() {
        let def = parse_definition(POLAR, "fallback").unwrap();
        assert_eq!(def.name, "polar-slab");
        assert_eq!(def.chart.dim(), 4);
        assert_eq!(def.coframe.forms.len(), 4);
        assert!(def.potential.is_none());
        assert_eq!(def.expected.len(), 1);
        assert_eq!(def.expected[0].0, 1);
        assert_eq!(def.expected[0].1, 2);
        assert_eq!(def.expected[0].2.render(&def.chart), "-dphi");
        assert_eq!(def.coframe.forms[2].render(&def.chart), "(r) dphi");
    }

    #[test]
    fn multi_term_forms_keep_their_signs() {
        let def = parse_definition(POLAR, "x").unwrap();
        let f = one_form("dt - r*sin(phi)^2 dphi + (1/r) dz", &def.chart, &def.ctx).unwrap();
        let dphi = f.comps.get(&vec![2u8]).unwrap().to_string();
        assert_eq!(dphi, "-r*sin(phi)^2");
        let dz = f.comps.get(&vec![3u8]).unwrap().to_string();
        assert_eq!(dz, "1/r");
        assert_eq!(f.comps.get(&vec![0u8]).unwrap().to_string(), "1");
    }

    #[test]
    fn rejects_malformed_input_with_line_numbers() {
        let bad = POLAR.replace("e1 = dr", "e1 = dr + q");
        let err = parse_definition(&bad, "x").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 14"), "{}", msg);

        let missing = POLAR.replace("  z\n", "");
        assert!(parse_definition(&missing, "x").is_err());
    }
}
