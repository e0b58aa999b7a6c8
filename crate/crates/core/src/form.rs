//! Differential forms with exact symbolic components.
//!
//! Components are stored sparsely against strictly increasing index tuples.
//! A form is tied to a chart and to a basis: either the coordinate basis
//! `dx^mu` or an orthonormal frame `e^a`.  The exterior derivative is only
//! defined against the coordinate basis; frame-basis forms convert first.
//!
//! Lie-algebra-valued u(1) forms carry a formal imaginary tag instead of
//! complex coefficients: a tagged form stands for `i` times its stored real
//! components, and wedging two tagged forms flips the overall sign.

use crate::calculus::differentiate;
use crate::chart::Chart;
use crate::context::Context;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::normal::simplify;
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    Coordinate,
    Frame,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Form {
    pub chart: String,
    pub degree: u8,
    pub basis: Basis,
    pub imaginary: bool,
    pub comps: BTreeMap<Vec<u8>, Expr>,
}

/// Sorts an index tuple, returning the permutation sign; `None` on repeats.
pub(crate) fn sort_indices(mut idx: Vec<u8>) -> Option<(Vec<u8>, i32)> {
    let mut sign = 1;
    // insertion sort, counting transpositions
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    for w in idx.windows(2) {
        if w[0] == w[1] {
            return None;
        }
    }
    Some((idx, sign))
}

impl Form {
    pub fn zero(chart: &Chart, degree: u8, basis: Basis) -> Form {
        Form {
            chart: chart.name.clone(),
            degree,
            basis,
            imaginary: false,
            comps: BTreeMap::new(),
        }
    }

    /// Degree-0 form (a scalar field).
    pub fn scalar(chart: &Chart, value: Expr) -> Form {
        let mut comps = BTreeMap::new();
        if !value.is_zero_lit() {
            comps.insert(Vec::new(), value);
        }
        Form {
            chart: chart.name.clone(),
            degree: 0,
            basis: Basis::Coordinate,
            imaginary: false,
            comps,
        }
    }

    /// A single basis component `value * b^(i1) ^ ... ^ b^(ip)`.
    pub fn component(
        chart: &Chart,
        basis: Basis,
        indices: &[u8],
        value: Expr,
    ) -> Result<Form> {
        let (idx, sign) = sort_indices(indices.to_vec())
            .ok_or_else(|| Error::DegreeMismatch("repeated basis index".into()))?;
        let mut comps = BTreeMap::new();
        if !value.is_zero_lit() {
            let v = if sign < 0 { value.neg() } else { value };
            comps.insert(idx, v);
        }
        Ok(Form {
            chart: chart.name.clone(),
            degree: indices.len() as u8,
            basis,
            imaginary: false,
            comps,
        })
    }

    pub fn with_imaginary(mut self, tag: bool) -> Form {
        self.imaginary = tag;
        self
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn check_compatible(&self, other: &Form) -> Result<()> {
        if self.chart != other.chart {
            return Err(Error::ChartMismatch(format!(
                "{} vs {}",
                self.chart, other.chart
            )));
        }
        if self.basis != other.basis {
            return Err(Error::BasisMismatch(
                "mixing frame and coordinate components".into(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &Form, ctx: &Context) -> Result<Form> {
        self.check_compatible(other)?;
        if self.degree != other.degree && !self.is_structurally_zero()
            && !other.is_structurally_zero()
        {
            return Err(Error::DegreeMismatch(format!(
                "{} vs {}",
                self.degree, other.degree
            )));
        }
        if self.imaginary != other.imaginary
            && !self.is_structurally_zero()
            && !other.is_structurally_zero()
        {
            return Err(Error::TagMismatch(
                "adding a real form to an imaginary one".into(),
            ));
        }
        let mut out = self.clone();
        if out.is_structurally_zero() {
            out.degree = other.degree;
            out.imaginary = other.imaginary;
        }
        for (idx, v) in &other.comps {
            let merged = match out.comps.remove(idx) {
                None => v.clone(),
                Some(prev) => Expr::add(vec![prev, v.clone()]),
            };
            let s = simplify(&merged, ctx)?;
            if !s.is_zero_lit() {
                out.comps.insert(idx.clone(), s);
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Form, ctx: &Context) -> Result<Form> {
        self.add(&other.scale(&Expr::int(-1), ctx)?, ctx)
    }

    pub fn scale(&self, factor: &Expr, ctx: &Context) -> Result<Form> {
        let mut out = self.clone();
        out.comps = BTreeMap::new();
        for (idx, v) in &self.comps {
            let s = simplify(&Expr::mul(vec![factor.clone(), v.clone()]), ctx)?;
            if !s.is_zero_lit() {
                out.comps.insert(idx.clone(), s);
            }
        }
        Ok(out)
    }

    pub fn simplified(&self, ctx: &Context) -> Result<Form> {
        let mut out = self.clone();
        out.comps = BTreeMap::new();
        for (idx, v) in &self.comps {
            let s = simplify(v, ctx)?;
            if !s.is_zero_lit() {
                out.comps.insert(idx.clone(), s);
            }
        }
        Ok(out)
    }

    pub fn wedge(&self, other: &Form, ctx: &Context) -> Result<Form> {
        self.check_compatible(other)?;
        let degree = self.degree + other.degree;
        let imaginary = self.imaginary ^ other.imaginary;
        // i * i = -1 when both factors carry the tag
        let tag_sign = if self.imaginary && other.imaginary { -1 } else { 1 };
        let mut out = Form {
            chart: self.chart.clone(),
            degree,
            basis: self.basis,
            imaginary,
            comps: BTreeMap::new(),
        };
        for (ia, va) in &self.comps {
            for (ib, vb) in &other.comps {
                let mut idx = ia.clone();
                idx.extend_from_slice(ib);
                let Some((sorted, sign)) = sort_indices(idx) else {
                    continue;
                };
                let coeff = Expr::mul(vec![
                    Expr::int((sign * tag_sign) as i64),
                    va.clone(),
                    vb.clone(),
                ]);
                let merged = match out.comps.remove(&sorted) {
                    None => coeff,
                    Some(prev) => Expr::add(vec![prev, coeff]),
                };
                let s = simplify(&merged, ctx)?;
                if !s.is_zero_lit() {
                    out.comps.insert(sorted, s);
                }
            }
        }
        Ok(out)
    }

    /// Exterior derivative; defined on coordinate-basis components only.
    pub fn d(&self, chart: &Chart, ctx: &Context) -> Result<Form> {
        if self.basis != Basis::Coordinate {
            return Err(Error::BasisMismatch(
                "exterior derivative needs coordinate-basis components".into(),
            ));
        }
        let mut out = Form {
            chart: self.chart.clone(),
            degree: self.degree + 1,
            basis: Basis::Coordinate,
            imaginary: self.imaginary,
            comps: BTreeMap::new(),
        };
        for (idx, v) in &self.comps {
            for mu in 0..chart.dim() as u8 {
                if idx.contains(&mu) {
                    continue;
                }
                let dv = differentiate(v, chart.coord(mu as usize))?;
                if dv.is_zero_lit() {
                    continue;
                }
                let mut full = vec![mu];
                full.extend_from_slice(idx);
                let (sorted, sign) = sort_indices(full).expect("distinct by construction");
                let coeff = Expr::mul(vec![Expr::int(sign as i64), dv]);
                let merged = match out.comps.remove(&sorted) {
                    None => coeff,
                    Some(prev) => Expr::add(vec![prev, coeff]),
                };
                let s = simplify(&merged, ctx)?;
                if !s.is_zero_lit() {
                    out.comps.insert(sorted, s);
                }
            }
        }
        Ok(out)
    }

    pub fn is_zero(&self, ctx: &Context) -> Result<bool> {
        for v in self.comps.values() {
            if !crate::normal::is_zero_sym(v, ctx)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Canonical printed shape, e.g. `(-e/r^2) dt^dr + (g) dtheta^dphi`.
    pub fn render(&self, chart: &Chart) -> String {
        if self.comps.is_empty() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (idx, v) in &self.comps {
            let label: Vec<String> = idx
                .iter()
                .map(|&i| match self.basis {
                    Basis::Coordinate => format!("d{}", chart.coord(i as usize)),
                    Basis::Frame => format!("e{}", i),
                })
                .collect();
            let coeff = v.to_string();
            let term = if idx.is_empty() {
                coeff
            } else if coeff == "1" {
                label.join("^")
            } else if coeff == "-1" {
                format!("-{}", label.join("^"))
            } else {
                format!("({}) {}", coeff, label.join("^"))
            };
            parts.push(term);
        }
        let body = parts.join(" + ");
        if self.imaginary {
            format!("i*[{}]", body)
        } else {
            body
        }
    }
}

/// A square grid of forms, e.g. a matrix-valued connection or curvature.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixForm {
    pub entries: Vec<Vec<Form>>,
}

impl MatrixForm {
    pub fn zero(chart: &Chart, n: usize, degree: u8, basis: Basis) -> MatrixForm {
        MatrixForm {
            entries: vec![vec![Form::zero(chart, degree, basis); n]; n],
        }
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn add(&self, other: &MatrixForm, ctx: &Context) -> Result<MatrixForm> {
        let mut out = self.clone();
        for i in 0..self.n() {
            for j in 0..self.n() {
                out.entries[i][j] = self.entries[i][j].add(&other.entries[i][j], ctx)?;
            }
        }
        Ok(out)
    }

    pub fn scale(&self, factor: &Expr, ctx: &Context) -> Result<MatrixForm> {
        let mut out = self.clone();
        for row in &mut out.entries {
            for e in row {
                *e = e.scale(factor, ctx)?;
            }
        }
        Ok(out)
    }

    /// Matrix product with the wedge as scalar multiplication.
    pub fn wedge(&self, other: &MatrixForm, ctx: &Context) -> Result<MatrixForm> {
        let n = self.n();
        let chart_degree = self
            .entries
            .iter()
            .flatten()
            .map(|f| f.degree)
            .max()
            .unwrap_or(1)
            + other
                .entries
                .iter()
                .flatten()
                .map(|f| f.degree)
                .max()
                .unwrap_or(1);
        let basis = self.entries[0][0].basis;
        let mut out = MatrixForm {
            entries: vec![
                vec![
                    Form {
                        chart: self.entries[0][0].chart.clone(),
                        degree: chart_degree,
                        basis,
                        imaginary: false,
                        comps: BTreeMap::new(),
                    };
                    n
                ];
                n
            ],
        };
        for i in 0..n {
            for j in 0..n {
                let mut acc = out.entries[i][j].clone();
                for k in 0..n {
                    let p = self.entries[i][k].wedge(&other.entries[k][j], ctx)?;
                    acc = acc.add(&p, ctx)?;
                }
                out.entries[i][j] = acc;
            }
        }
        Ok(out)
    }

    pub fn d(&self, chart: &Chart, ctx: &Context) -> Result<MatrixForm> {
        let mut out = self.clone();
        for row in &mut out.entries {
            for e in row {
                *e = e.d(chart, ctx)?;
            }
        }
        Ok(out)
    }

    pub fn is_zero(&self, ctx: &Context) -> Result<bool> {
        for row in &self.entries {
            for e in row {
                if !e.is_zero(ctx)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;

    fn setup() -> (Chart, Context) {
        let chart = Chart::new("polar", &["t", "r", "theta", "phi"]);
        let mut ctx = Context::new();
        for c in ["t", "r", "theta", "phi"] {
            ctx.coordinate(c);
        }
        ctx.parameter("m");
        (chart, ctx)
    }

    #[test]
    fn wedge_is_graded_anticommutative() {
        let (chart, ctx) = setup();
        let a = Form::component(&chart, Basis::Coordinate, &[1], parse("r^2", &ctx).unwrap())
            .unwrap();
        let b = Form::component(
            &chart,
            Basis::Coordinate,
            &[2],
            parse("sin(theta)", &ctx).unwrap(),
        )
        .unwrap();
        let ab = a.wedge(&b, &ctx).unwrap();
        let ba = b.wedge(&a, &ctx).unwrap();
        let sum = ab.add(&ba, &ctx).unwrap();
        assert!(sum.is_zero(&ctx).unwrap());
        // and a ^ a = 0 for odd degree
        assert!(a.wedge(&a, &ctx).unwrap().is_zero(&ctx).unwrap());
    }

    #[test]
    fn d_squared_vanishes() {
        let (chart, ctx) = setup();
        let f = Form::scalar(&chart, parse("r^2*cos(theta)*exp(t)", &ctx).unwrap());
        let df = f.d(&chart, &ctx).unwrap();
        let ddf = df.d(&chart, &ctx).unwrap();
        assert!(ddf.is_zero(&ctx).unwrap());
    }

    #[test]
    fn leibniz_rule_for_d() {
        let (chart, ctx) = setup();
        let a = Form::component(&chart, Basis::Coordinate, &[0], parse("r*t", &ctx).unwrap())
            .unwrap();
        let b = Form::component(
            &chart,
            Basis::Coordinate,
            &[2],
            parse("cos(theta) + r", &ctx).unwrap(),
        )
        .unwrap();
        let lhs = a.wedge(&b, &ctx).unwrap().d(&chart, &ctx).unwrap();
        let da_b = a.d(&chart, &ctx).unwrap().wedge(&b, &ctx).unwrap();
        // deg(a) = 1, so the sign in d(a^b) = da^b - a^db is negative
        let a_db = a
            .wedge(&b.d(&chart, &ctx).unwrap(), &ctx)
            .unwrap()
            .scale(&Expr::int(-1), &ctx)
            .unwrap();
        let rhs = da_b.add(&a_db, &ctx).unwrap();
        assert!(lhs.sub(&rhs, &ctx).unwrap().is_zero(&ctx).unwrap());
    }

    #[test]
    fn imaginary_tags_track_through_wedges() {
        let (chart, ctx) = setup();
        let a = Form::component(&chart, Basis::Coordinate, &[0], Expr::sym("r"))
            .unwrap()
            .with_imaginary(true);
        let b = Form::component(&chart, Basis::Coordinate, &[1], Expr::sym("t"))
            .unwrap()
            .with_imaginary(true);
        let ab = a.wedge(&b, &ctx).unwrap();
        assert!(!ab.imaginary);
        // (i r dt) ^ (i t dr) = - r t dt^dr
        assert_eq!(ab.comps[&vec![0u8, 1]].to_string(), "-r*t");
        let c = Form::component(&chart, Basis::Coordinate, &[2], Expr::one()).unwrap();
        let ac = a.wedge(&c, &ctx).unwrap();
        assert!(ac.imaginary);
    }

    #[test]
    fn mixed_bases_are_rejected() {
        let (chart, ctx) = setup();
        let a = Form::component(&chart, Basis::Coordinate, &[0], Expr::one()).unwrap();
        let b = Form::component(&chart, Basis::Frame, &[1], Expr::one()).unwrap();
        assert!(a.wedge(&b, &ctx).is_err());
        assert!(b.d(&chart, &ctx).is_err());
    }
}
