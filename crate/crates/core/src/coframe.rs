//! Orthonormal coframes: the frame/coordinate dictionary and the metric.

use crate::chart::Chart;
use crate::context::Context;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::form::{Basis, Form};
use crate::normal::{is_zero_sym, simplify};

/// Frame metric signs: diag(+1, -1, -1, -1) and its lower-dimensional
/// restrictions (index 0 is always the timelike leg).
pub fn eta(a: usize) -> i64 {
    if a == 0 {
        1
    } else {
        -1
    }
}

#[derive(Clone, Debug)]
pub struct Coframe {
    pub forms: Vec<Form>,
    /// component matrix `e[a][mu]`
    pub mat: Vec<Vec<Expr>>,
    /// inverse matrix `inv[mu][a]`, so `dx^mu = inv[mu][a] e^a`
    pub inv: Vec<Vec<Expr>>,
    pub det: Expr,
}

fn minor(m: &[Vec<Expr>], skip_row: usize, skip_col: usize) -> Vec<Vec<Expr>> {
    let n = m.len();
    let mut out = Vec::new();
    for i in 0..n {
        if i == skip_row {
            continue;
        }
        let mut row = Vec::new();
        for j in 0..n {
            if j == skip_col {
                continue;
            }
            row.push(m[i][j].clone());
        }
        out.push(row);
    }
    out
}

fn det_expand(m: &[Vec<Expr>], ctx: &Context) -> Result<Expr> {
    let n = m.len();
    if n == 1 {
        return simplify(&m[0][0], ctx);
    }
    let mut terms = Vec::new();
    for j in 0..n {
        if m[0][j].is_zero_lit() {
            continue;
        }
        let sub = det_expand(&minor(m, 0, j), ctx)?;
        let sign = if j % 2 == 0 { 1 } else { -1 };
        terms.push(Expr::mul(vec![Expr::int(sign), m[0][j].clone(), sub]));
    }
    simplify(&Expr::add(terms), ctx)
}

impl Coframe {
    /// Builds the coframe from `n` coordinate-basis one-forms and inverts the
    /// component matrix exactly.
    pub fn new(chart: &Chart, forms: Vec<Form>, ctx: &Context) -> Result<Coframe> {
        let n = chart.dim();
        if forms.len() != n {
            return Err(Error::DegreeMismatch(format!(
                "{} coframe legs for a {}-dimensional chart",
                forms.len(),
                n
            )));
        }
        for f in &forms {
            if f.basis != Basis::Coordinate {
                return Err(Error::BasisMismatch(
                    "coframe legs must have coordinate components".into(),
                ));
            }
            if f.degree != 1 {
                return Err(Error::DegreeMismatch("coframe legs must be one-forms".into()));
            }
            if f.imaginary {
                return Err(Error::TagMismatch("coframe legs are real".into()));
            }
            if f.chart != chart.name {
                return Err(Error::ChartMismatch(f.chart.clone()));
            }
        }
        let mut mat = vec![vec![Expr::zero(); n]; n];
        for (a, f) in forms.iter().enumerate() {
            for (idx, v) in &f.comps {
                mat[a][idx[0] as usize] = simplify(v, ctx)?;
            }
        }
        let det = det_expand(&mat, ctx)?;
        if is_zero_sym(&det, ctx)? {
            return Err(Error::SingularFrame("vanishing coframe determinant".into()));
        }
        let mut inv = vec![vec![Expr::zero(); n]; n];
        for mu in 0..n {
            for a in 0..n {
                let sign = if (a + mu) % 2 == 0 { 1 } else { -1 };
                let cof = det_expand(&minor(&mat, a, mu), ctx)?;
                inv[mu][a] = simplify(
                    &Expr::div(Expr::mul(vec![Expr::int(sign), cof]), det.clone()),
                    ctx,
                )?;
            }
        }
        Ok(Coframe { forms, mat, inv, det })
    }

    pub fn dim(&self) -> usize {
        self.mat.len()
    }

    /// `g_{mu nu} = eta_{ab} e^a_mu e^b_nu`.
    pub fn metric(&self, ctx: &Context) -> Result<Vec<Vec<Expr>>> {
        let n = self.dim();
        let mut g = vec![vec![Expr::zero(); n]; n];
        for mu in 0..n {
            for nu in 0..n {
                let mut terms = Vec::new();
                for a in 0..n {
                    terms.push(Expr::mul(vec![
                        Expr::int(eta(a)),
                        self.mat[a][mu].clone(),
                        self.mat[a][nu].clone(),
                    ]));
                }
                g[mu][nu] = simplify(&Expr::add(terms), ctx)?;
            }
        }
        Ok(g)
    }

    fn convert(&self, form: &Form, matrix: &[Vec<Expr>], target: Basis, ctx: &Context) -> Result<Form> {
        let n = self.dim();
        let mut out = Form {
            chart: form.chart.clone(),
            degree: form.degree,
            basis: target,
            imaginary: form.imaginary,
            comps: std::collections::BTreeMap::new(),
        };
        for (idx, v) in &form.comps {
            // expand each old basis index through the conversion matrix
            let mut partial: Vec<(Vec<u8>, Expr)> = vec![(Vec::new(), v.clone())];
            for &old in idx {
                let mut next = Vec::new();
                for (done, coeff) in &partial {
                    for new in 0..n {
                        let entry = &matrix[old as usize][new];
                        if entry.is_zero_lit() {
                            continue;
                        }
                        let mut d = done.clone();
                        d.push(new as u8);
                        next.push((d, Expr::mul(vec![coeff.clone(), entry.clone()])));
                    }
                }
                partial = next;
            }
            for (new_idx, coeff) in partial {
                let Some((sorted, sign)) = crate::form::sort_indices(new_idx) else {
                    continue;
                };
                let signed = Expr::mul(vec![Expr::int(sign as i64), coeff]);
                let merged = match out.comps.remove(&sorted) {
                    None => signed,
                    Some(prev) => Expr::add(vec![prev, signed]),
                };
                let s = simplify(&merged, ctx)?;
                if !s.is_zero_lit() {
                    out.comps.insert(sorted, s);
                }
            }
        }
        Ok(out)
    }

    /// Rewrites coordinate components in the orthonormal frame.
    pub fn to_frame(&self, form: &Form, ctx: &Context) -> Result<Form> {
        if form.basis != Basis::Coordinate {
            return Err(Error::BasisMismatch("expected coordinate components".into()));
        }
        self.convert(form, &self.inv, Basis::Frame, ctx)
    }

    /// Rewrites frame components back in the coordinate basis.
    pub fn to_coordinate(&self, form: &Form, ctx: &Context) -> Result<Form> {
        if form.basis != Basis::Frame {
            return Err(Error::BasisMismatch("expected frame components".into()));
        }
        self.convert(form, &self.mat, Basis::Coordinate, ctx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;
    use crate::parse::parse;

    /// Flat space in polar-type coordinates.
    fn flat_polar() -> (Chart, Context, Coframe) {
        let chart = Chart::new("polar", &["t", "rho", "z", "phi"]);
        let mut ctx = Context::new();
        for c in ["t", "rho", "z", "phi"] {
            ctx.coordinate(c);
        }
        ctx.assume("rho", crate::context::Assumption::Positive);
        let legs = vec![
            Form::component(&chart, Basis::Coordinate, &[0], Expr::one()).unwrap(),
            Form::component(&chart, Basis::Coordinate, &[1], Expr::one()).unwrap(),
            Form::component(&chart, Basis::Coordinate, &[2], Expr::one()).unwrap(),
            Form::component(&chart, Basis::Coordinate, &[3], parse("rho", &ctx).unwrap())
                .unwrap(),
        ];
        let cf = Coframe::new(&chart, legs, &ctx).unwrap();
        (chart, ctx, cf)
    }

    #[test]
    fn metric_matches_line_element() {
        let (_, ctx, cf) = flat_polar();
        let g = cf.metric(&ctx).unwrap();
        assert_eq!(g[0][0].to_string(), "1");
        assert_eq!(g[1][1].to_string(), "-1");
        assert_eq!(g[3][3].to_string(), "-rho^2");
        assert_eq!(g[0][3].to_string(), "0");
    }

    #[test]
    fn inverse_matrix_is_exact() {
        let (_, ctx, cf) = flat_polar();
        // e . inv = identity
        for a in 0..4 {
            for b in 0..4 {
                let mut terms = Vec::new();
                for mu in 0..4 {
                    terms.push(Expr::mul(vec![
                        cf.mat[a][mu].clone(),
                        cf.inv[mu][b].clone(),
                    ]));
                }
                let s = simplify(&Expr::add(terms), &ctx).unwrap();
                assert_eq!(s.to_string(), if a == b { "1" } else { "0" });
            }
        }
    }

    #[test]
    fn basis_conversion_round_trips() {
        let (chart, ctx, cf) = flat_polar();
        let w = Form::component(
            &chart,
            Basis::Coordinate,
            &[1, 3],
            parse("rho^2 + 1", &ctx).unwrap(),
        )
        .unwrap();
        let frame = cf.to_frame(&w, &ctx).unwrap();
        // dphi = e3/rho, so the frame component picks up 1/rho
        assert_eq!(frame.comps[&vec![1u8, 3]].to_string(), "(rho^2 + 1)/rho");
        let back = cf.to_coordinate(&frame, &ctx).unwrap();
        assert!(back.sub(&w, &ctx).unwrap().is_zero(&ctx).unwrap());
    }

    #[test]
    fn singular_frames_are_rejected() {
        let chart = Chart::new("bad", &["t", "x"]);
        let mut ctx = Context::new();
        ctx.coordinate("t");
        ctx.coordinate("x");
        let legs = vec![
            Form::component(&chart, Basis::Coordinate, &[0], Expr::sym("x")).unwrap(),
            Form::component(&chart, Basis::Coordinate, &[0], Expr::one()).unwrap(),
        ];
        assert!(matches!(
            Coframe::new(&chart, legs, &ctx),
            Err(Error::SingularFrame(_))
        ));
    }
}
