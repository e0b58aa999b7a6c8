//! Metric connection and curvature from a coframe.
//!
//! The torsion-free metric-compatible connection is the unique solution of
//! `de^a + w^a_b ^ e^b = 0` with `w_{ab} = -w_{ba}` after lowering with
//! `eta`.  Expanding everything in the frame basis turns that into a square
//! linear system with integer coefficients and symbolic right-hand sides,
//! which is solved exactly.

use crate::chart::Chart;
use crate::coframe::{eta, Coframe};
use crate::context::Context;
use crate::error::{Error, Result};
use crate::expr::{Expr, Rat};
use crate::form::{Basis, Form, MatrixForm};
use crate::normal::{is_zero_sym, simplify};
use num_traits::{One, Zero};

#[derive(Clone, Debug)]
pub struct Connection {
    pub frame: MatrixForm,
    pub coord: MatrixForm,
}

#[derive(Clone, Debug)]
pub struct Curvature {
    pub frame: MatrixForm,
    pub coord: MatrixForm,
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for p in 0..n {
        for q in p + 1..n {
            out.push((p, q));
        }
    }
    out
}

fn pair_index(n: usize, a: usize, b: usize) -> usize {
    // position of (a, b) with a < b in the lexicographic pair list
    debug_assert!(a < b && b < n);
    let mut idx = 0;
    for p in 0..n {
        for q in p + 1..n {
            if (p, q) == (a, b) {
                return idx;
            }
            idx += 1;
        }
    }
    unreachable!()
}

/// Gauss-Jordan elimination with rational matrix entries and symbolic
/// right-hand sides.
fn solve_linear(mut m: Vec<Vec<Rat>>, mut b: Vec<Expr>, ctx: &Context) -> Result<Vec<Expr>> {
    let n = m.len();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !m[r][col].is_zero())
            .ok_or_else(|| Error::SingularFrame("degenerate connection system".into()))?;
        m.swap(col, pivot);
        b.swap(col, pivot);
        let p = m[col][col].clone();
        if !p.is_one() {
            for j in col..n {
                m[col][j] = &m[col][j] / &p;
            }
            b[col] = simplify(&Expr::div(b[col].clone(), Expr::num(p)), ctx)?;
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone();
            for j in col..n {
                m[r][j] = &m[r][j] - &(&factor * &m[col][j]);
            }
            if !b[col].is_zero_lit() {
                b[r] = simplify(
                    &Expr::sub(
                        b[r].clone(),
                        Expr::mul(vec![Expr::num(factor), b[col].clone()]),
                    ),
                    ctx,
                )?;
            }
        }
    }
    Ok(b)
}

fn sgn(a: usize, b: usize) -> i64 {
    if a < b {
        1
    } else {
        -1
    }
}

/// Solves the first structure equation for the connection one-forms,
/// returned both in the frame basis and in coordinate components.
pub fn solve_connection(cf: &Coframe, chart: &Chart, ctx: &Context) -> Result<Connection> {
    let n = cf.dim();
    let pair_list = pairs(n);
    let np = pair_list.len();
    let rows = n * np;

    // frame-basis components of each de^a
    let mut dcomp = vec![vec![Expr::zero(); np]; n];
    for a in 0..n {
        let de = cf.forms[a].d(chart, ctx)?;
        let de_frame = cf.to_frame(&de, ctx)?;
        for (pi, (p, q)) in pair_list.iter().enumerate() {
            if let Some(v) = de_frame.comps.get(&vec![*p as u8, *q as u8]) {
                dcomp[a][pi] = v.clone();
            }
        }
    }

    // unknown x[pair(a,b) * n + c] = w_{ab,c} with a < b
    let mut m = vec![vec![Rat::zero(); rows]; rows];
    let mut b = vec![Expr::zero(); rows];
    for a in 0..n {
        for (pi, (p, q)) in pair_list.iter().enumerate() {
            let row = a * np + pi;
            // coefficient of e^p^e^q in de^a + w^a_c ^ e^c:
            //   D^a_{pq} + w^a_{q,p} - w^a_{p,q} = 0
            if a != *q {
                let (lo, hi) = (a.min(*q), a.max(*q));
                let col = pair_index(n, lo, hi) * n + p;
                m[row][col] += Rat::from_integer((eta(a) * sgn(a, *q)).into());
            }
            if a != *p {
                let (lo, hi) = (a.min(*p), a.max(*p));
                let col = pair_index(n, lo, hi) * n + q;
                m[row][col] -= Rat::from_integer((eta(a) * sgn(a, *p)).into());
            }
            b[row] = simplify(&dcomp[a][pi].clone().neg(), ctx)?;
        }
    }
    let x = solve_linear(m, b, ctx)?;

    let mut frame = MatrixForm::zero(chart, n, 1, Basis::Frame);
    for a in 0..n {
        for bb in 0..n {
            if a == bb {
                continue;
            }
            let (lo, hi) = (a.min(bb), a.max(bb));
            let mut comps = std::collections::BTreeMap::new();
            for c in 0..n {
                let v = &x[pair_index(n, lo, hi) * n + c];
                let signed = simplify(
                    &Expr::mul(vec![Expr::int(eta(a) * sgn(a, bb)), v.clone()]),
                    ctx,
                )?;
                if !signed.is_zero_lit() {
                    comps.insert(vec![c as u8], signed);
                }
            }
            frame.entries[a][bb].comps = comps;
        }
    }
    let mut coord = MatrixForm::zero(chart, n, 1, Basis::Coordinate);
    for a in 0..n {
        for bb in 0..n {
            coord.entries[a][bb] = cf.to_coordinate(&frame.entries[a][bb], ctx)?;
        }
    }
    Ok(Connection { frame, coord })
}

/// Residual of `de^a + w^a_b ^ e^b` per leg; all zero for a valid solution.
pub fn first_structure_residual(
    cf: &Coframe,
    conn: &Connection,
    chart: &Chart,
    ctx: &Context,
) -> Result<Vec<Form>> {
    let n = cf.dim();
    let mut out = Vec::new();
    for a in 0..n {
        let mut acc = cf.forms[a].d(chart, ctx)?;
        for b in 0..n {
            let t = conn.coord.entries[a][b].wedge(&cf.forms[b], ctx)?;
            acc = acc.add(&t, ctx)?;
        }
        out.push(acc);
    }
    Ok(out)
}

/// Residual of the lowered antisymmetry `eta w + (eta w)^T`.
pub fn antisymmetry_residual(conn: &Connection, ctx: &Context) -> Result<Vec<Form>> {
    let n = conn.frame.n();
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let lower_ab = conn.frame.entries[a][b].scale(&Expr::int(eta(a)), ctx)?;
            let lower_ba = conn.frame.entries[b][a].scale(&Expr::int(eta(b)), ctx)?;
            out.push(lower_ab.add(&lower_ba, ctx)?);
        }
    }
    Ok(out)
}

/// `Omega = dw + w ^ w`, in both bases.
pub fn curvature(conn: &Connection, cf: &Coframe, chart: &Chart, ctx: &Context) -> Result<Curvature> {
    let dw = conn.coord.d(chart, ctx)?;
    let ww = conn.coord.wedge(&conn.coord, ctx)?;
    let coord = dw.add(&ww, ctx)?;
    let n = coord.n();
    let mut frame = MatrixForm::zero(chart, n, 2, Basis::Frame);
    for a in 0..n {
        for b in 0..n {
            frame.entries[a][b] = cf.to_frame(&coord.entries[a][b], ctx)?;
        }
    }
    Ok(Curvature { frame, coord })
}

/// `R^a_{bcd}` with the normalization `Omega^a_b = 1/2 R^a_{bcd} e^c ^ e^d`
/// (sum over all `c, d`); the stored coefficient of the sorted pair is the
/// component itself.
pub fn riemann_component(curv: &Curvature, a: usize, b: usize, c: usize, d: usize) -> Expr {
    if c == d {
        return Expr::zero();
    }
    let (lo, hi, flip) = if c < d { (c, d, 1) } else { (d, c, -1) };
    match curv.frame.entries[a][b].comps.get(&vec![lo as u8, hi as u8]) {
        None => Expr::zero(),
        Some(v) => {
            if flip < 0 {
                v.clone().neg()
            } else {
                v.clone()
            }
        }
    }
}

/// `R_{bd} = R^a_{bad}`.
pub fn ricci(curv: &Curvature, ctx: &Context) -> Result<Vec<Vec<Expr>>> {
    let n = curv.frame.n();
    let mut out = vec![vec![Expr::zero(); n]; n];
    for b in 0..n {
        for d in 0..n {
            let mut terms = Vec::new();
            for a in 0..n {
                terms.push(riemann_component(curv, a, b, a, d));
            }
            out[b][d] = simplify(&Expr::add(terms), ctx)?;
        }
    }
    Ok(out)
}

/// `R = eta^{bd} R_{bd}`.
pub fn scalar_curvature(ricci: &[Vec<Expr>], ctx: &Context) -> Result<Expr> {
    let mut terms = Vec::new();
    for b in 0..ricci.len() {
        terms.push(Expr::mul(vec![Expr::int(eta(b)), ricci[b][b].clone()]));
    }
    simplify(&Expr::add(terms), ctx)
}

/// `G_{ab} = R_{ab} - 1/2 eta_{ab} R` in the orthonormal frame.
pub fn einstein_tensor(
    ricci: &[Vec<Expr>],
    scalar: &Expr,
    ctx: &Context,
) -> Result<Vec<Vec<Expr>>> {
    let n = ricci.len();
    let mut out = vec![vec![Expr::zero(); n]; n];
    for a in 0..n {
        for b in 0..n {
            let mut t = ricci[a][b].clone();
            if a == b {
                t = Expr::sub(
                    t,
                    Expr::mul(vec![
                        Expr::num(Rat::new(eta(a).into(), 2.into())),
                        scalar.clone(),
                    ]),
                );
            }
            out[a][b] = simplify(&t, ctx)?;
        }
    }
    Ok(out)
}

/// Full curvature square `R_{abcd} R^{abcd}`.
pub fn kretschmann(curv: &Curvature, ctx: &Context) -> Result<Expr> {
    let n = curv.frame.n();
    let mut terms = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in c + 1..n {
                    let r = riemann_component(curv, a, b, c, d);
                    if r.is_zero_lit() {
                        continue;
                    }
                    let sign = 2 * eta(a) * eta(b) * eta(c) * eta(d);
                    terms.push(Expr::mul(vec![Expr::int(sign), r.clone(), r]));
                }
            }
        }
    }
    simplify(&Expr::add(terms), ctx)
}

/// `d Omega + w ^ Omega - Omega ^ w`; identically zero for any connection.
pub fn bianchi_residual(
    conn: &Connection,
    curv: &Curvature,
    chart: &Chart,
    ctx: &Context,
) -> Result<MatrixForm> {
    let d_omega = curv.coord.d(chart, ctx)?;
    let w_omega = conn.coord.wedge(&curv.coord, ctx)?;
    let omega_w = curv.coord.wedge(&conn.coord, ctx)?;
    d_omega
        .add(&w_omega, ctx)?
        .add(&omega_w.scale(&Expr::int(-1), ctx)?, ctx)
}

fn two_form_component(f: &Form, a: usize, b: usize) -> Expr {
    if a == b {
        return Expr::zero();
    }
    let (lo, hi, flip) = if a < b { (a, b, 1) } else { (b, a, -1) };
    match f.comps.get(&vec![lo as u8, hi as u8]) {
        None => Expr::zero(),
        Some(v) => {
            if flip < 0 {
                v.clone().neg()
            } else {
                v.clone()
            }
        }
    }
}

/// Stress tensor of a field-strength two-form given by its real frame
/// components `f_{ab}`:
///
/// `T_{ab} = (1/4pi) (1/4 eta_{ab} f_{cd} f^{cd} - f_{ac} f_b{}^c)`
///
/// Indices are raised with `eta`, so `f^{cd} = eta(c) eta(d) f_{cd}`.
/// The scalar `f_{cd} f^{cd}` of a frame-basis 2-form; diverges exactly where
/// the field strength carries a real singularity, so it separates gauge
/// artifacts from physical ones.
pub fn field_strength_invariant(f: &Form, ctx: &Context) -> Result<Expr> {
    if f.basis != Basis::Frame {
        return Err(Error::BasisMismatch(
            "field invariant needs frame components".into(),
        ));
    }
    let n = 4;
    let mut inv_terms = Vec::new();
    for c in 0..n {
        for d in c + 1..n {
            let v = two_form_component(f, c, d);
            if v.is_zero_lit() {
                continue;
            }
            inv_terms.push(Expr::mul(vec![
                Expr::int(2 * eta(c) * eta(d)),
                v.clone(),
                v,
            ]));
        }
    }
    simplify(&Expr::add(inv_terms), ctx)
}

pub fn em_stress_energy(f: &Form, ctx: &Context) -> Result<Vec<Vec<Expr>>> {
    if f.basis != Basis::Frame {
        return Err(Error::BasisMismatch(
            "stress tensor needs frame components".into(),
        ));
    }
    let n = 4;
    // invariant f_{cd} f^{cd}
    let mut inv_terms = Vec::new();
    for c in 0..n {
        for d in c + 1..n {
            let v = two_form_component(f, c, d);
            if v.is_zero_lit() {
                continue;
            }
            inv_terms.push(Expr::mul(vec![
                Expr::int(2 * eta(c) * eta(d)),
                v.clone(),
                v,
            ]));
        }
    }
    let invariant = Expr::add(inv_terms);
    let quarter = Rat::new(1.into(), 4.into());
    let mut out = vec![vec![Expr::zero(); n]; n];
    for a in 0..n {
        for b in 0..n {
            let mut terms = Vec::new();
            if a == b {
                terms.push(Expr::mul(vec![
                    Expr::num(&quarter * Rat::from_integer(eta(a).into())),
                    invariant.clone(),
                ]));
            }
            for c in 0..n {
                let fac = two_form_component(f, a, c);
                let fbc = two_form_component(f, b, c);
                if fac.is_zero_lit() || fbc.is_zero_lit() {
                    continue;
                }
                terms.push(Expr::mul(vec![Expr::int(-eta(c)), fac, fbc]));
            }
            let body = Expr::add(terms);
            out[a][b] = simplify(
                &Expr::div(body, Expr::mul(vec![Expr::int(4), Expr::pi()])),
                ctx,
            )?;
        }
    }
    Ok(out)
}

/// Checks `G_{ab} = 8 pi T_{ab}` componentwise.
pub fn einstein_maxwell_residual(
    g: &[Vec<Expr>],
    t: &[Vec<Expr>],
    ctx: &Context,
) -> Result<Vec<Vec<Expr>>> {
    let n = g.len();
    let mut out = vec![vec![Expr::zero(); n]; n];
    for a in 0..n {
        for b in 0..n {
            out[a][b] = simplify(
                &Expr::sub(
                    g[a][b].clone(),
                    Expr::mul(vec![Expr::int(8), Expr::pi(), t[a][b].clone()]),
                ),
                ctx,
            )?;
        }
    }
    Ok(out)
}

pub fn matrix_is_zero(m: &[Vec<Expr>], ctx: &Context) -> Result<bool> {
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
    use crate::context::Assumption;
    use crate::parse::parse;

    fn coframe_from(
        chart: &Chart,
        ctx: &Context,
        legs: &[(usize, &str)],
    ) -> Coframe {
        let forms = legs
            .iter()
            .map(|(mu, src)| {
                Form::component(
                    chart,
                    Basis::Coordinate,
                    &[*mu as u8],
                    parse(src, ctx).unwrap(),
                )
                .unwrap()
            })
            .collect();
        Coframe::new(chart, forms, ctx).unwrap()
    }

    fn flat_polar() -> (Chart, Context, Coframe) {
        let chart = Chart::new("polar", &["t", "rho", "z", "phi"]);
        let mut ctx = Context::new();
        for c in ["t", "rho", "z", "phi"] {
            ctx.coordinate(c);
        }
        ctx.assume("rho", Assumption::Positive);
        let cf = coframe_from(&chart, &ctx, &[(0, "1"), (1, "1"), (2, "1"), (3, "rho")]);
        (chart, ctx, cf)
    }

    fn schwarzschild() -> (Chart, Context, Coframe) {
        let chart = Chart::new("exterior", &["t", "r", "theta", "phi"]);
        let mut ctx = Context::new();
        for c in ["t", "r", "theta", "phi"] {
            ctx.coordinate(c);
        }
        ctx.parameter("m");
        ctx.assume("m", Assumption::Positive);
        ctx.assume("r", Assumption::Positive);
        // keep probe samples outside the horizon
        ctx.set_range("m", 0.05, 0.4);
        ctx.set_range("r", 1.1, 1.9);
        let cf = coframe_from(
            &chart,
            &ctx,
            &[
                (0, "sqrt(1 - 2*m/r)"),
                (1, "1/sqrt(1 - 2*m/r)"),
                (2, "r"),
                (3, "r*sin(theta)"),
            ],
        );
        (chart, ctx, cf)
    }

    fn reissner_nordstrom() -> (Chart, Context, Coframe) {
        let chart = Chart::new("exterior", &["t", "r", "theta", "phi"]);
        let mut ctx = Context::new();
        for c in ["t", "r", "theta", "phi"] {
            ctx.coordinate(c);
        }
        ctx.parameter("m");
        ctx.parameter("e");
        ctx.assume("m", Assumption::Positive);
        ctx.assume("e", Assumption::Positive);
        ctx.assume("r", Assumption::Positive);
        ctx.set_range("m", 0.3, 0.45);
        ctx.set_range("e", 0.05, 0.2);
        ctx.set_range("r", 1.1, 1.9);
        let cf = coframe_from(
            &chart,
            &ctx,
            &[
                (0, "sqrt(1 - 2*m/r + e^2/r^2)"),
                (1, "1/sqrt(1 - 2*m/r + e^2/r^2)"),
                (2, "r"),
                (3, "r*sin(theta)"),
            ],
        );
        (chart, ctx, cf)
    }

    #[test]
    fn flat_coframe_has_known_connection_and_no_curvature() {
        let (chart, ctx, cf) = flat_polar();
        let conn = solve_connection(&cf, &chart, &ctx).unwrap();
        // only nonzero pair: w^3_1 = dphi, w^1_3 = -dphi
        assert_eq!(conn.coord.entries[3][1].render(&chart), "dphi");
        assert_eq!(conn.coord.entries[1][3].render(&chart), "-dphi");
        for a in 0..4 {
            for b in 0..4 {
                if (a, b) == (1, 3) || (a, b) == (3, 1) {
                    continue;
                }
                assert!(conn.coord.entries[a][b].is_zero(&ctx).unwrap());
            }
        }
        let curv = curvature(&conn, &cf, &chart, &ctx).unwrap();
        assert!(curv.coord.is_zero(&ctx).unwrap());
        for r in first_structure_residual(&cf, &conn, &chart, &ctx).unwrap() {
            assert!(r.is_zero(&ctx).unwrap());
        }
    }

    #[test]
    fn schwarzschild_is_vacuum_with_known_curvature_scale() {
        let (chart, ctx, cf) = schwarzschild();
        let conn = solve_connection(&cf, &chart, &ctx).unwrap();
        for r in first_structure_residual(&cf, &conn, &chart, &ctx).unwrap() {
            assert!(r.is_zero(&ctx).unwrap());
        }
        for r in antisymmetry_residual(&conn, &ctx).unwrap() {
            assert!(r.is_zero(&ctx).unwrap());
        }
        let curv = curvature(&conn, &cf, &chart, &ctx).unwrap();
        let ric = ricci(&curv, &ctx).unwrap();
        assert!(matrix_is_zero(&ric, &ctx).unwrap());
        let k = kretschmann(&curv, &ctx).unwrap();
        assert_eq!(k.to_string(), "48*m^2/r^6");
    }

    #[test]
    fn bianchi_identity_holds_for_schwarzschild() {
        let (chart, ctx, cf) = schwarzschild();
        let conn = solve_connection(&cf, &chart, &ctx).unwrap();
        let curv = curvature(&conn, &cf, &chart, &ctx).unwrap();
        let res = bianchi_residual(&conn, &curv, &chart, &ctx).unwrap();
        assert!(res.is_zero(&ctx).unwrap());
    }

    #[test]
    fn charged_solution_satisfies_coupled_field_equations() {
        let (chart, ctx, cf) = reissner_nordstrom();
        let conn = solve_connection(&cf, &chart, &ctx).unwrap();
        let curv = curvature(&conn, &cf, &chart, &ctx).unwrap();
        let ric = ricci(&curv, &ctx).unwrap();
        let sc = scalar_curvature(&ric, &ctx).unwrap();
        // traceless source: scalar curvature vanishes
        assert!(is_zero_sym(&sc, &ctx).unwrap());
        let g = einstein_tensor(&ric, &sc, &ctx).unwrap();

        // field strength of the Coulomb potential (e/r) dt, in the frame
        let a_form = Form::component(
            &chart,
            Basis::Coordinate,
            &[0],
            parse("e/r", &ctx).unwrap(),
        )
        .unwrap();
        let f_coord = a_form.d(&chart, &ctx).unwrap();
        let f_frame = cf.to_frame(&f_coord, &ctx).unwrap();
        // radial electric field picks up no redshift factor in the frame
        assert_eq!(
            f_frame.comps[&vec![0u8, 1]].to_string(),
            "e/r^2"
        );

        let t = em_stress_energy(&f_frame, &ctx).unwrap();
        assert_eq!(t[0][0].to_string(), "e^2/(8*pi*r^4)");
        let res = einstein_maxwell_residual(&g, &t, &ctx).unwrap();
        assert!(matrix_is_zero(&res, &ctx).unwrap());
    }
}
