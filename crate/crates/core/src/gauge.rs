//! Local frame rotations and abelian phase changes.
//!
//! Frame gauge elements are built by exponentiating a constant generator
//! with a coordinate-dependent angle.  Generators normalized to `T^3 = -T`
//! (rotation type) or `T^3 = +T` (boost type) admit closed-form
//! exponentials, which keeps every transformation exact.

use crate::chart::Chart;
use crate::coframe::eta;
use crate::context::Context;
use crate::error::{Error, Result};
use crate::expr::{Expr, Rat};
use crate::form::{Basis, Form, MatrixForm};
use crate::normal::{is_zero_sym, simplify};
use num_traits::Zero;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorKind {
    Rotation,
    Boost,
}

/// Exact group element with its inverse.
#[derive(Clone, Debug)]
pub struct FrameRotation {
    pub mat: Vec<Vec<Expr>>,
    pub inv: Vec<Vec<Expr>>,
}

fn rat_mat_mul(a: &[Vec<Rat>], b: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let n = a.len();
    let mut out = vec![vec![Rat::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out[i][j] += &a[i][k] * &b[k][j];
            }
        }
    }
    out
}

/// Classifies a constant generator; rejects anything outside the metric
/// algebra or not normalized to `T^3 = -T` or `T^3 = +T`.
pub fn classify_generator(t: &[Vec<Rat>]) -> Result<GeneratorKind> {
    let n = t.len();
    // metric antisymmetry: eta T + T^T eta = 0
    for i in 0..n {
        for j in 0..n {
            let lhs = Rat::from_integer(eta(i).into()) * &t[i][j]
                + &t[j][i] * Rat::from_integer(eta(j).into());
            if !lhs.is_zero() {
                return Err(Error::BadGenerator(
                    "generator does not preserve the frame metric".into(),
                ));
            }
        }
    }
    let t2 = rat_mat_mul(t, t);
    let t3 = rat_mat_mul(&t2, t);
    let mut minus = true;
    let mut plus = true;
    let mut nonzero = false;
    for i in 0..n {
        for j in 0..n {
            if !t[i][j].is_zero() {
                nonzero = true;
            }
            if t3[i][j] != -t[i][j].clone() {
                minus = false;
            }
            if t3[i][j] != t[i][j] {
                plus = false;
            }
        }
    }
    if !nonzero {
        return Err(Error::BadGenerator("zero generator".into()));
    }
    if minus {
        Ok(GeneratorKind::Rotation)
    } else if plus {
        Ok(GeneratorKind::Boost)
    } else {
        Err(Error::BadGenerator(
            "generator is not unit-normalized: expected T^3 = T or T^3 = -T".into(),
        ))
    }
}

/// `exp(angle T)` in closed form:
///
///   rotation: `I + sin(angle) T + (1 - cos(angle)) T^2`
///   boost:    `I + sinh(angle) T + (cosh(angle) - 1) T^2`
///
/// The inverse flips the odd part, since both `sin` and `sinh` are odd and
/// the even parts are even in the angle.
pub fn frame_rotation(t: &[Vec<Rat>], angle: &Expr, ctx: &Context) -> Result<FrameRotation> {
    let kind = classify_generator(t)?;
    let (f, g) = match kind {
        GeneratorKind::Rotation => (
            Expr::sin(angle.clone()),
            Expr::sub(Expr::one(), Expr::cos(angle.clone())),
        ),
        GeneratorKind::Boost => {
            let ep = Expr::exp(angle.clone());
            let em = Expr::exp(angle.clone().neg());
            let sinh = Expr::div(Expr::sub(ep.clone(), em.clone()), Expr::int(2));
            let cosh = Expr::div(Expr::add(vec![ep, em]), Expr::int(2));
            (sinh, Expr::sub(cosh, Expr::one()))
        }
    };
    let t2 = rat_mat_mul(t, t);
    let n = t.len();
    let build = |fo: Expr| -> Result<Vec<Vec<Expr>>> {
        let mut m = vec![vec![Expr::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut terms = Vec::new();
                if i == j {
                    terms.push(Expr::one());
                }
                if !t[i][j].is_zero() {
                    terms.push(Expr::mul(vec![fo.clone(), Expr::num(t[i][j].clone())]));
                }
                if !t2[i][j].is_zero() {
                    terms.push(Expr::mul(vec![g.clone(), Expr::num(t2[i][j].clone())]));
                }
                m[i][j] = simplify(&Expr::add(terms), ctx)?;
            }
        }
        Ok(m)
    };
    Ok(FrameRotation {
        mat: build(f.clone())?,
        inv: build(f.neg())?,
    })
}

pub fn mat_mul(a: &[Vec<Expr>], b: &[Vec<Expr>], ctx: &Context) -> Result<Vec<Vec<Expr>>> {
    let n = a.len();
    let mut out = vec![vec![Expr::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut terms = Vec::new();
            for k in 0..n {
                terms.push(Expr::mul(vec![a[i][k].clone(), b[k][j].clone()]));
            }
            out[i][j] = simplify(&Expr::add(terms), ctx)?;
        }
    }
    Ok(out)
}

/// Residual of `M^T eta M - eta`; zero exactly when `M` preserves the frame
/// metric.
pub fn metric_membership_residual(m: &[Vec<Expr>], ctx: &Context) -> Result<Vec<Vec<Expr>>> {
    let n = m.len();
    let mut out = vec![vec![Expr::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut terms = Vec::new();
            for k in 0..n {
                terms.push(Expr::mul(vec![
                    Expr::int(eta(k)),
                    m[k][i].clone(),
                    m[k][j].clone(),
                ]));
            }
            if i == j {
                terms.push(Expr::int(-eta(i)));
            }
            out[i][j] = simplify(&Expr::add(terms), ctx)?;
        }
    }
    Ok(out)
}

fn mat_form_mul(m: &[Vec<Expr>], w: &MatrixForm, ctx: &Context) -> Result<MatrixForm> {
    let n = w.n();
    let mut out = w.clone();
    for i in 0..n {
        for j in 0..n {
            let mut acc = Form::zero(
                &Chart::new(&w.entries[0][0].chart, &[]),
                w.entries[0][0].degree,
                w.entries[0][0].basis,
            );
            acc.chart = w.entries[0][0].chart.clone();
            for k in 0..n {
                acc = acc.add(&w.entries[k][j].scale(&m[i][k], ctx)?, ctx)?;
            }
            out.entries[i][j] = acc;
        }
    }
    Ok(out)
}

fn form_mat_mul(w: &MatrixForm, m: &[Vec<Expr>], ctx: &Context) -> Result<MatrixForm> {
    let n = w.n();
    let mut out = w.clone();
    for i in 0..n {
        for j in 0..n {
            let mut acc = Form::zero(
                &Chart::new(&w.entries[0][0].chart, &[]),
                w.entries[0][0].degree,
                w.entries[0][0].basis,
            );
            acc.chart = w.entries[0][0].chart.clone();
            for k in 0..n {
                acc = acc.add(&w.entries[i][k].scale(&m[k][j], ctx)?, ctx)?;
            }
            out.entries[i][j] = acc;
        }
    }
    Ok(out)
}

/// Entrywise exterior derivative of a scalar matrix.
fn mat_d(m: &[Vec<Expr>], chart: &Chart, template: &MatrixForm, ctx: &Context) -> Result<MatrixForm> {
    let n = m.len();
    let mut out = MatrixForm::zero(chart, n, 1, Basis::Coordinate);
    for i in 0..n {
        for j in 0..n {
            let mut scalar = Form::scalar(chart, m[i][j].clone());
            scalar.chart = template.entries[0][0].chart.clone();
            out.entries[i][j] = scalar.d(chart, ctx)?;
        }
    }
    Ok(out)
}

/// `w' = L w L^(-1) + L d(L^(-1))` on coordinate-basis components.
pub fn transform_connection(
    lam: &FrameRotation,
    w: &MatrixForm,
    chart: &Chart,
    ctx: &Context,
) -> Result<MatrixForm> {
    if w.entries[0][0].basis != Basis::Coordinate {
        return Err(Error::BasisMismatch(
            "connection transport needs coordinate components".into(),
        ));
    }
    let conj = form_mat_mul(&mat_form_mul(&lam.mat, w, ctx)?, &lam.inv, ctx)?;
    let dlinv = mat_d(&lam.inv, chart, w, ctx)?;
    let inhom = mat_form_mul(&lam.mat, &dlinv, ctx)?;
    conj.add(&inhom, ctx)
}

/// `Omega' = L Omega L^(-1)`.
pub fn transform_curvature(
    lam: &FrameRotation,
    omega: &MatrixForm,
    ctx: &Context,
) -> Result<MatrixForm> {
    form_mat_mul(&mat_form_mul(&lam.mat, omega, ctx)?, &lam.inv, ctx)
}

/// New coframe legs `e'^a = L^a_b e^b`.
pub fn transform_coframe(lam: &FrameRotation, legs: &[Form], ctx: &Context) -> Result<Vec<Form>> {
    let n = legs.len();
    let mut out = Vec::new();
    for a in 0..n {
        let mut acc = legs[a].scale(&Expr::zero(), ctx)?;
        for b in 0..n {
            acc = acc.add(&legs[b].scale(&lam.mat[a][b], ctx)?, ctx)?;
        }
        out.push(acc);
    }
    Ok(out)
}

/// Abelian phase change: for a potential stored as the real part of
/// `i * a`, the new stored form is `a - d(chi)`.
pub fn phase_transform(a: &Form, chi: &Expr, chart: &Chart, ctx: &Context) -> Result<Form> {
    if !a.imaginary {
        return Err(Error::TagMismatch(
            "phase change applies to imaginary-tagged potentials".into(),
        ));
    }
    let mut dchi = Form::scalar(chart, chi.clone());
    dchi.chart = a.chart.clone();
    let dchi = dchi.d(chart, ctx)?.with_imaginary(true);
    a.sub(&dchi, ctx)
}

/// Residual of the overlap consistency `chi_13 = chi_12 + chi_23` for
/// abelian phases on a triple overlap.
pub fn phase_cocycle_residual(
    chi_12: &Expr,
    chi_23: &Expr,
    chi_13: &Expr,
    ctx: &Context,
) -> Result<Expr> {
    simplify(
        &Expr::sub(
            chi_13.clone(),
            Expr::add(vec![chi_12.clone(), chi_23.clone()]),
        ),
        ctx,
    )
}

pub fn scalar_matrix_is_zero(m: &[Vec<Expr>], ctx: &Context) -> Result<bool> {
    for row in m {
        for v in row {
            if !is_zero_sym(v, ctx)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::{curvature, first_structure_residual, solve_connection, Connection};
    use crate::coframe::Coframe;
    use crate::context::Assumption;
    use crate::expr::rat_int;
    use crate::parse::parse;

    fn gen(entries: &[(usize, usize, i64)]) -> Vec<Vec<Rat>> {
        let mut t = vec![vec![Rat::zero(); 4]; 4];
        for (i, j, v) in entries {
            t[*i][*j] = rat_int(*v);
        }
        t
    }

    fn flat_polar() -> (Chart, Context, Coframe) {
        let chart = Chart::new("polar", &["t", "rho", "z", "phi"]);
        let mut ctx = Context::new();
        for c in ["t", "rho", "z", "phi"] {
            ctx.coordinate(c);
        }
        ctx.assume("rho", Assumption::Positive);
        let legs = vec![
            Form::component(&chart, Basis::Coordinate, &[0], Expr::one()).unwrap(),
            Form::component(&chart, Basis::Coordinate, &[1], Expr::one()).unwrap(),
            Form::component(&chart, Basis::Coordinate, &[2], Expr::one()).unwrap(),
            Form::component(&chart, Basis::Coordinate, &[3], Expr::sym("rho")).unwrap(),
        ];
        let cf = Coframe::new(&chart, legs, &ctx).unwrap();
        (chart, ctx, cf)
    }

    #[test]
    fn generators_classify_by_their_cube() {
        let rot = gen(&[(1, 3, -1), (3, 1, 1)]);
        assert_eq!(classify_generator(&rot).unwrap(), GeneratorKind::Rotation);
        let boost = gen(&[(0, 1, 1), (1, 0, 1)]);
        assert_eq!(classify_generator(&boost).unwrap(), GeneratorKind::Boost);
        // not in the algebra: symmetric spatial block
        let bad = gen(&[(1, 3, 1), (3, 1, 1)]);
        assert!(matches!(
            classify_generator(&bad),
            Err(Error::BadGenerator(_))
        ));
        // not unit-normalized
        let scaled = gen(&[(1, 3, -2), (3, 1, 2)]);
        assert!(matches!(
            classify_generator(&scaled),
            Err(Error::BadGenerator(_))
        ));
    }

    #[test]
    fn exponentials_land_in_the_group() {
        let mut ctx = Context::new();
        ctx.coordinate("phi");
        ctx.coordinate("t");
        let chart = Chart::new("c", &["t", "phi"]);
        let _ = chart;
        for t in [
            gen(&[(1, 3, -1), (3, 1, 1)]),
            gen(&[(0, 1, 1), (1, 0, 1)]),
        ] {
            let lam = frame_rotation(&t, &Expr::sym("phi"), &ctx).unwrap();
            let res = metric_membership_residual(&lam.mat, &ctx).unwrap();
            assert!(scalar_matrix_is_zero(&res, &ctx).unwrap());
            let prod = mat_mul(&lam.mat, &lam.inv, &ctx).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    let want = if i == j { "1" } else { "0" };
                    assert_eq!(prod[i][j].to_string(), want, "entry {} {}", i, j);
                }
            }
        }
    }

    #[test]
    fn rotated_pairs_still_solve_the_structure_equation() {
        let (chart, ctx, cf) = flat_polar();
        let conn = solve_connection(&cf, &chart, &ctx).unwrap();
        let t = gen(&[(1, 3, -1), (3, 1, 1)]);
        let lam = frame_rotation(&t, &Expr::sym("phi"), &ctx).unwrap();
        let legs2 = transform_coframe(&lam, &cf.forms, &ctx).unwrap();
        let cf2 = Coframe::new(&chart, legs2, &ctx).unwrap();
        let w2 = transform_connection(&lam, &conn.coord, &chart, &ctx).unwrap();
        let conn2 = Connection {
            frame: conn.frame.clone(),
            coord: w2,
        };
        for r in first_structure_residual(&cf2, &conn2, &chart, &ctx).unwrap() {
            assert!(r.is_zero(&ctx).unwrap());
        }
        // curvature stays zero
        let curv2 = curvature(&conn2, &cf2, &chart, &ctx).unwrap();
        assert!(curv2.coord.is_zero(&ctx).unwrap());
    }

    #[test]
    fn boosted_pairs_still_solve_the_structure_equation() {
        let (chart, ctx, cf) = flat_polar();
        let conn = solve_connection(&cf, &chart, &ctx).unwrap();
        let t = gen(&[(0, 1, 1), (1, 0, 1)]);
        let lam = frame_rotation(&t, &Expr::sym("t"), &ctx).unwrap();
        let legs2 = transform_coframe(&lam, &cf.forms, &ctx).unwrap();
        let cf2 = Coframe::new(&chart, legs2, &ctx).unwrap();
        let w2 = transform_connection(&lam, &conn.coord, &chart, &ctx).unwrap();
        let conn2 = Connection {
            frame: conn.frame.clone(),
            coord: w2,
        };
        for r in first_structure_residual(&cf2, &conn2, &chart, &ctx).unwrap() {
            assert!(r.is_zero(&ctx).unwrap());
        }
    }

    #[test]
    fn phase_changes_leave_the_field_strength_alone() {
        let chart = Chart::new("exterior", &["t", "r", "theta", "phi"]);
        let mut ctx = Context::new();
        for c in ["t", "r", "theta", "phi"] {
            ctx.coordinate(c);
        }
        ctx.parameter("e");
        ctx.assume("r", Assumption::Positive);
        let a = Form::component(
            &chart,
            Basis::Coordinate,
            &[0],
            parse("e/r", &ctx).unwrap(),
        )
        .unwrap()
        .with_imaginary(true);
        let chi = parse("e*t/r", &ctx).unwrap();
        let a2 = phase_transform(&a, &chi, &chart, &ctx).unwrap();
        assert!(a2.imaginary);
        let f1 = a.d(&chart, &ctx).unwrap();
        let f2 = a2.d(&chart, &ctx).unwrap();
        assert!(f1.sub(&f2, &ctx).unwrap().is_zero(&ctx).unwrap());
        // cocycle additivity
        let c12 = parse("e*t", &ctx).unwrap();
        let c23 = parse("2*e*t", &ctx).unwrap();
        let c13 = parse("3*e*t", &ctx).unwrap();
        let res = phase_cocycle_residual(&c12, &c23, &c13, &ctx).unwrap();
        assert!(res.is_zero_lit());
    }
}
