//! Patches, transition phases, and integer invariants for U(1) potentials.
//!
//! A potential is stored through its real part: the form named `a` here is
//! the coefficient of `i` in the physical potential `A = i a`.  Two patches
//! agree on their overlap when the stored difference is exact, `a1 - a2 =
//! d(chi)`; `chi` is the transition phase.  Winding the phase around a
//! periodic coordinate and integrating the first Chern form over a closed
//! cycle both land on the same integers when the bundle is nontrivial.

use std::collections::BTreeSet;

use crate::calculus::{differentiate, substitute};
use crate::chart::{Chart, Locus};
use crate::context::Context;
use crate::error::{Error, Result};
use crate::expr::{Expr, Fun, Name, Rat};
use crate::form::{Basis, Form};
use crate::normal::{denominator_factors, is_zero_sym, simplify};
use crate::series::leading_order;
use num_traits::{One, Zero};

/// A local gauge choice: a stored potential valid away from `excluded`.
#[derive(Clone, Debug)]
pub struct Patch {
    pub name: String,
    pub potential: Form,
    pub excluded: Vec<Locus>,
}

impl Patch {
    pub fn new(name: &str, potential: Form, excluded: Vec<Locus>) -> Result<Patch> {
        if potential.degree != 1 {
            return Err(Error::DegreeMismatch(
                "patch potential must be a 1-form".into(),
            ));
        }
        if potential.basis != Basis::Coordinate {
            return Err(Error::BasisMismatch(
                "patch potential needs coordinate-basis components".into(),
            ));
        }
        if !potential.imaginary {
            return Err(Error::TagMismatch(
                "patch potential must carry the imaginary tag".into(),
            ));
        }
        Ok(Patch {
            name: name.to_string(),
            potential,
            excluded,
        })
    }
}

/// `chi` with `a_from - a_to = d(chi)` on the overlap.
#[derive(Clone, Debug)]
pub struct TransitionPhase {
    pub from: String,
    pub to: String,
    pub chi: Expr,
}

/// Solves `d(chi) = a_from - a_to` in closed form.
///
/// The difference must be closed; it is then integrated one coordinate at a
/// time, subtracting `d` of each partial result so later coordinates see
/// only what is still missing.  A nonzero remainder means the difference is
/// outside the supported antiderivative family.
pub fn transition(
    from: &Patch,
    to: &Patch,
    chart: &Chart,
    ctx: &Context,
) -> Result<TransitionPhase> {
    from.potential.check_compatible(&to.potential)?;
    let delta = from
        .potential
        .sub(&to.potential, ctx)?
        .with_imaginary(false);
    if !delta.d(chart, ctx)?.is_zero(ctx)? {
        return Err(Error::Verification(
            "potential difference is not closed; the patches describe different fields".into(),
        ));
    }
    let mut chi = Expr::zero();
    let mut rem = delta;
    for mu in 0..chart.dim() {
        let comp = match rem.comps.get(&vec![mu as u8]) {
            Some(c) => c.clone(),
            None => continue,
        };
        let g = integrate_in(&comp, chart.coord(mu), ctx)?;
        let dg = Form::scalar(chart, g.clone()).d(chart, ctx)?;
        rem = rem.sub(&dg, ctx)?;
        chi = Expr::add(vec![chi, g]);
    }
    if !rem.is_zero(ctx)? {
        return Err(Error::Unsupported(
            "potential difference has no closed-form primitive in this chart".into(),
        ));
    }
    Ok(TransitionPhase {
        from: from.name.clone(),
        to: to.name.clone(),
        chi: simplify(&chi, ctx)?,
    })
}

/// Antiderivative of `e` in `v` for the closed-form family used by the
/// transition and cycle integrals: sums of single-variable monomials
/// `c * f(a + s v)` with `f` a power, sine, cosine, or exponential.
pub fn integrate_in(e: &Expr, v: &Name, ctx: &Context) -> Result<Expr> {
    let e = simplify(e, ctx)?;
    if !e.mentions(v) {
        return simplify(&Expr::mul(vec![e, Expr::Sym(v.clone())]), ctx);
    }
    if let Expr::Add(terms) = &e {
        let parts = terms
            .iter()
            .map(|t| integrate_in(t, v, ctx))
            .collect::<Result<Vec<_>>>()?;
        return simplify(&Expr::add(parts), ctx);
    }
    let factors = match &e {
        Expr::Mul(fs) => fs.clone(),
        other => vec![other.clone()],
    };
    let mut coeff = Vec::new();
    let mut dep = Vec::new();
    for f in factors {
        if f.mentions(v) {
            dep.push(f);
        } else {
            coeff.push(f);
        }
    }
    if dep.len() != 1 {
        return Err(Error::Unsupported(format!(
            "no closed-form primitive for a product of {} factors in {}",
            dep.len(),
            v
        )));
    }
    let primitive = match dep.into_iter().next().unwrap() {
        Expr::Pow(base, q) => {
            let s = affine_slope(&base, v, ctx)?;
            if q == -Rat::one() {
                Expr::div(Expr::ln(*base), s)
            } else {
                let q1 = q + Rat::one();
                Expr::div(
                    Expr::powr(*base, q1.clone()),
                    Expr::mul(vec![Expr::num(q1), s]),
                )
            }
        }
        Expr::Fun(f, arg) => {
            let s = affine_slope(&arg, v, ctx)?;
            match f {
                Fun::Sin => Expr::div(Expr::cos(*arg).neg(), s),
                Fun::Cos => Expr::div(Expr::sin(*arg), s),
                Fun::Exp => Expr::div(Expr::exp(*arg), s),
                Fun::Ln => {
                    return Err(Error::Unsupported(format!(
                        "no closed-form primitive for a logarithm in {}",
                        v
                    )))
                }
            }
        }
        base @ (Expr::Sym(_) | Expr::Add(_)) => {
            let s = affine_slope(&base, v, ctx)?;
            Expr::div(
                Expr::powr(base, Rat::one() + Rat::one()),
                Expr::mul(vec![Expr::int(2), s]),
            )
        }
        other => {
            return Err(Error::Unsupported(format!(
                "no closed-form primitive for {} in {}",
                other, v
            )))
        }
    };
    coeff.push(primitive);
    simplify(&Expr::mul(coeff), ctx)
}

/// Derivative of `b` in `v`, required to be nonzero and `v`-free, so `b` is
/// affine in `v`.
fn affine_slope(b: &Expr, v: &Name, ctx: &Context) -> Result<Expr> {
    let s = simplify(&differentiate(b, v)?, ctx)?;
    if s.mentions(v) || is_zero_sym(&s, ctx)? {
        return Err(Error::Unsupported(format!(
            "integrand argument {} is not affine in {}",
            b, v
        )));
    }
    Ok(s)
}

/// `g = chi_hi - chi_lo` evaluated through an antiderivative.
fn definite_integral(e: &Expr, v: &Name, lo: &Expr, hi: &Expr, ctx: &Context) -> Result<Expr> {
    let g = integrate_in(e, v, ctx)?;
    let upper = substitute(&g, v, hi)?;
    let lower = substitute(&g, v, lo)?;
    simplify(&Expr::sub(upper, lower), ctx)
}

/// Consistency residual for three phases on a triple overlap:
/// `chi_13 - chi_12 - chi_23`, zero when the cocycle condition holds.
pub fn cocycle_residual(
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

/// Single-valuedness of `exp(i chi)` around one periodic coordinate.
#[derive(Clone, Debug)]
pub struct QuantizationCondition {
    pub coordinate: Name,
    /// `d(chi)/d(coordinate)`; must be coordinate-independent.
    pub rate: Expr,
    pub period: Expr,
    /// `rate * period / (2 pi)`; integral exactly when the phase is single
    /// valued.
    pub winding: Expr,
}

pub fn quantize(
    chi: &Expr,
    coord: &Name,
    period: &Expr,
    chart: &Chart,
    ctx: &Context,
) -> Result<QuantizationCondition> {
    let rate = simplify(&differentiate(chi, coord)?, ctx)?;
    for c in &chart.coords {
        if rate.mentions(c) {
            return Err(Error::NonlinearPhase(format!(
                "phase rate in {} still depends on {}; the winding would not be constant",
                coord, c
            )));
        }
    }
    let winding = simplify(
        &Expr::div(
            Expr::mul(vec![rate.clone(), period.clone()]),
            Expr::mul(vec![Expr::int(2), Expr::pi()]),
        ),
        ctx,
    )?;
    Ok(QuantizationCondition {
        coordinate: coord.clone(),
        rate,
        period: period.clone(),
        winding,
    })
}

/// First Chern form of a stored potential: `-d(a)/(2 pi)`.
///
/// With `A = i a` and `F = dA`, the curvature form `(i/2 pi) F` is real and
/// equals `-d(a)/(2 pi)`; the imaginary tag is consumed here.
pub fn chern_form(a: &Form, chart: &Chart, ctx: &Context) -> Result<Form> {
    if a.degree != 1 {
        return Err(Error::DegreeMismatch(
            "Chern form needs a degree-1 potential".into(),
        ));
    }
    if !a.imaginary {
        return Err(Error::TagMismatch(
            "potential must carry the imaginary tag".into(),
        ));
    }
    let f = a.d(chart, ctx)?;
    let c = f.scale(
        &Expr::div(Expr::int(-1), Expr::mul(vec![Expr::int(2), Expr::pi()])),
        ctx,
    )?;
    Ok(c.with_imaginary(false))
}

/// The `2 pi`-scaled companion `i F = -d(a)`, the shape in which such forms
/// are usually quoted without the normalization that makes integrals
/// integer-valued.
pub fn chern_form_unnormalized(a: &Form, chart: &Chart, ctx: &Context) -> Result<Form> {
    if a.degree != 1 {
        return Err(Error::DegreeMismatch(
            "Chern form needs a degree-1 potential".into(),
        ));
    }
    if !a.imaginary {
        return Err(Error::TagMismatch(
            "potential must carry the imaginary tag".into(),
        ));
    }
    let f = a.d(chart, ctx)?;
    Ok(f.scale(&Expr::int(-1), ctx)?.with_imaginary(false))
}

/// An axis energy density and its value once `exp(-gamma0) = n` holds.
#[derive(Clone, Debug)]
pub struct CEnergy {
    pub axis: Expr,
    pub quantized: Expr,
}

/// Cylindrical-wave energy read off the axis value `gamma0`.  Variant 1 is
/// `gamma0` itself, variant 2 is `1 - exp(-2 gamma0)`; substituting
/// `gamma0 = -ln(n)` gives the discrete values `-ln(n)` and `1 - n^2`.
pub fn c_energy(gamma0: &Expr, n: &Expr, variant: u8, ctx: &Context) -> Result<CEnergy> {
    let axis = match variant {
        1 => gamma0.clone(),
        2 => Expr::sub(
            Expr::one(),
            Expr::exp(Expr::mul(vec![Expr::int(-2), gamma0.clone()])),
        ),
        _ => {
            return Err(Error::Domain(format!(
                "energy variant {} is not defined",
                variant
            )))
        }
    };
    let g0 = match gamma0 {
        Expr::Sym(name) => name.clone(),
        _ => {
            return Err(Error::Unsupported(
                "axis energy needs a symbolic axis value to quantize".into(),
            ))
        }
    };
    let quantized = simplify(&substitute(&axis, &g0, &Expr::ln(n.clone()).neg())?, ctx)?;
    Ok(CEnergy { axis, quantized })
}

/// Integrates a real `k`-form over a product cycle given as ordered
/// `(coordinate, lower, upper)` factors.  Components involving coordinates
/// outside the cycle pull back to zero and are skipped.
pub fn chern_number(
    c: &Form,
    cycle: &[(Name, Expr, Expr)],
    chart: &Chart,
    ctx: &Context,
) -> Result<Expr> {
    if c.basis != Basis::Coordinate {
        return Err(Error::BasisMismatch(
            "cycle integration needs coordinate-basis components".into(),
        ));
    }
    if c.imaginary {
        return Err(Error::TagMismatch("cycle integrand must be real".into()));
    }
    if cycle.len() != c.degree as usize {
        return Err(Error::DegreeMismatch(format!(
            "degree {} form against a {}-dimensional cycle",
            c.degree,
            cycle.len()
        )));
    }
    let mut order = Vec::new();
    for (name, _, _) in cycle {
        let i = chart
            .index(name)
            .ok_or_else(|| Error::ChartMismatch(format!("{} is not a coordinate", name)))?;
        order.push(i as u8);
    }
    let mut sorted = order.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != order.len() {
        return Err(Error::ChartMismatch("repeated cycle coordinate".into()));
    }
    let mut total = Expr::zero();
    for (idx, h) in &c.comps {
        if *idx != sorted {
            continue;
        }
        let mut val = Expr::mul(vec![Expr::int(orientation_sign(&order)), h.clone()]);
        for (name, lo, hi) in cycle {
            val = definite_integral(&val, name, lo, hi, ctx)?;
        }
        total = Expr::add(vec![total, val]);
    }
    simplify(&total, ctx)
}

/// Parity of the permutation sorting `order` ascending: the sign relating
/// the stored (sorted) wedge to the cycle's orientation.
fn orientation_sign(order: &[u8]) -> i64 {
    let mut sign = 1i64;
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            if order[i] > order[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// How a locus where some field blows up should be read.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum LocusKind {
    /// A curvature invariant diverges there: a genuine singularity.
    Curvature,
    /// Fields diverge but the invariant is finite: removable by a gauge
    /// change on another patch.
    Gauge,
    /// Fields diverge on a locus the chart already excludes: a coordinate
    /// artifact, not evidence about the bundle.
    Degenerate,
}

impl std::fmt::Display for LocusKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LocusKind::Curvature => "curvature",
            LocusKind::Gauge => "gauge",
            LocusKind::Degenerate => "degenerate",
        })
    }
}

#[derive(Clone, Debug)]
pub struct LocusReport {
    pub locus: Locus,
    pub kind: LocusKind,
    pub detail: String,
}

/// Finds and classifies the loci where `fields` or `invariant` can blow up.
///
/// Candidates come from denominator factors; each is kept only if something
/// actually diverges there, then classified by whether the invariant itself
/// does.  Only zeros that can be located exactly are considered: coordinate
/// factors, `sin`/`cos` of a bare coordinate, and factors affine in a single
/// coordinate.
pub fn singular_loci(
    fields: &[Expr],
    invariant: &Expr,
    chart: &Chart,
    ctx: &Context,
) -> Result<Vec<LocusReport>> {
    let mut candidates = Vec::new();
    let mut seen = BTreeSet::new();
    let push = |locus: Locus, candidates: &mut Vec<Locus>, seen: &mut BTreeSet<String>| {
        let key = locus.label();
        if seen.insert(key) {
            candidates.push(locus);
        }
    };
    for e in fields.iter().chain(std::iter::once(invariant)) {
        for factor in denominator_factors(e, ctx)? {
            for locus in factor_zeros(&factor, chart, ctx)? {
                push(locus, &mut candidates, &mut seen);
            }
        }
    }
    candidates.sort_by_key(|l| (chart.index(&l.coord), l.label()));

    let mut reports = Vec::new();
    for locus in candidates {
        let inv_order = leading_order(invariant, &locus.coord, &locus.value, ctx)?;
        if let Some((k, _)) = &inv_order {
            if k < &Rat::zero() {
                reports.push(LocusReport {
                    detail: format!("invariant diverges with leading exponent {}", k),
                    locus,
                    kind: LocusKind::Curvature,
                });
                continue;
            }
        }
        let mut diverges = false;
        for f in fields {
            if let Some((k, _)) = leading_order(f, &locus.coord, &locus.value, ctx)? {
                if k < Rat::zero() {
                    diverges = true;
                    break;
                }
            }
        }
        if !diverges {
            continue;
        }
        let excluded = chart.excluded.iter().any(|l| {
            l.coord == locus.coord
                && is_zero_sym(&Expr::sub(l.value.clone(), locus.value.clone()), ctx)
                    .unwrap_or(false)
        });
        reports.push(LocusReport {
            detail: if excluded {
                "fields diverge on an excluded chart locus".to_string()
            } else {
                "fields diverge but the invariant stays finite".to_string()
            },
            locus,
            kind: if excluded {
                LocusKind::Degenerate
            } else {
                LocusKind::Gauge
            },
        });
    }
    Ok(reports)
}

/// Exactly locatable zeros of one denominator factor.
fn factor_zeros(factor: &Expr, chart: &Chart, ctx: &Context) -> Result<Vec<Locus>> {
    let mut out = Vec::new();
    collect_factor_zeros(factor, chart, ctx, &mut out)?;
    Ok(out)
}

fn collect_factor_zeros(
    factor: &Expr,
    chart: &Chart,
    ctx: &Context,
    out: &mut Vec<Locus>,
) -> Result<()> {
    match factor {
        Expr::Num(_) | Expr::Der { .. } => {}
        Expr::Mul(fs) => {
            for f in fs {
                collect_factor_zeros(f, chart, ctx, out)?;
            }
        }
        Expr::Pow(b, q) => {
            if q > &Rat::zero() {
                collect_factor_zeros(b, chart, ctx, out)?;
            }
        }
        Expr::Sym(n) => {
            if chart.index(n).is_some() {
                out.push(Locus::new(n.as_str(), Expr::zero()));
            }
        }
        Expr::Fun(f, arg) => {
            if let Expr::Sym(n) = arg.as_ref() {
                if chart.index(n).is_some() {
                    match f {
                        Fun::Sin => {
                            out.push(Locus::new(n.as_str(), Expr::zero()));
                            out.push(Locus::new(n.as_str(), Expr::pi()));
                        }
                        Fun::Cos => {
                            out.push(Locus::new(
                                n.as_str(),
                                Expr::div(Expr::pi(), Expr::int(2)),
                            ));
                        }
                        Fun::Exp | Fun::Ln => {}
                    }
                }
            }
        }
        Expr::Add(_) => {
            let mut syms = BTreeSet::new();
            factor.symbols(&mut syms);
            let mut on_chart: Vec<&Name> =
                syms.iter().filter(|n| chart.index(n).is_some()).collect();
            if on_chart.len() != 1 {
                return Ok(());
            }
            let coord = on_chart.pop().unwrap().clone();
            let slope = simplify(&differentiate(factor, &coord)?, ctx)?;
            if slope.mentions(&coord) || is_zero_sym(&slope, ctx)? {
                return Ok(());
            }
            let at_zero = substitute(factor, &coord, &Expr::zero())?;
            let value = simplify(&Expr::div(at_zero.neg(), slope), ctx)?;
            out.push(Locus::new(coord.as_str(), value));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::Context;
    use crate::parse::parse;

    fn ctx_for(chart: &Chart, params: &[(&str, f64, f64)]) -> Context {
        let mut ctx = Context::new();
        for c in &chart.coords {
            ctx.coordinate(c.as_str());
        }
        for (n, lo, hi) in params {
            ctx.parameter(n);
            ctx.set_range(n, *lo, *hi);
        }
        ctx
    }

    fn parsed(s: &str, ctx: &Context) -> Expr {
        parse(s, ctx).expect("test expression parses")
    }

    #[test]
    fn shifted_coulomb_patches_give_a_linear_phase() {
        // Two descriptions of the same radial field differing by a constant
        // rate in t: chi must come out linear and the winding must be the
        // shift itself when the period is 2 pi.
        let chart = Chart::new("static", &["t", "r"]);
        let ctx = ctx_for(&chart, &[("e", 0.1, 0.9), ("k", 0.1, 0.9)]);

        let a1 = Form::component(
            &chart,
            Basis::Coordinate,
            &[0],
            parsed("e/r", &ctx),
        )
        .unwrap()
        .with_imaginary(true);
        let a2 = Form::component(
            &chart,
            Basis::Coordinate,
            &[0],
            parsed("e/r - k", &ctx),
        )
        .unwrap()
        .with_imaginary(true);
        let p1 = Patch::new("inner", a1, vec![]).unwrap();
        let p2 = Patch::new("outer", a2, vec![]).unwrap();

        let t = transition(&p1, &p2, &chart, &ctx).unwrap();
        assert_eq!(t.chi.to_string(), "k*t");

        let period = Expr::mul(vec![Expr::int(2), Expr::pi()]);
        let q = quantize(&t.chi, &Name::new("t"), &period, &chart, &ctx).unwrap();
        assert_eq!(q.rate.to_string(), "k");
        assert_eq!(q.winding.to_string(), "k");

        // Adding a t-quadratic piece makes the phase rate t-dependent.
        let chi_bad = parsed("k*t^2", &ctx);
        assert!(matches!(
            quantize(&chi_bad, &Name::new("t"), &period, &chart, &ctx),
            Err(Error::NonlinearPhase(_))
        ));

        // Cocycle additivity for a third patch shifted by 2k.
        let a3 = Form::component(
            &chart,
            Basis::Coordinate,
            &[0],
            parsed("e/r - 2*k", &ctx),
        )
        .unwrap()
        .with_imaginary(true);
        let p3 = Patch::new("far", a3, vec![]).unwrap();
        let t23 = transition(&p2, &p3, &chart, &ctx).unwrap();
        let t13 = transition(&p1, &p3, &chart, &ctx).unwrap();
        let res = cocycle_residual(&t.chi, &t23.chi, &t13.chi, &ctx).unwrap();
        assert!(res.is_zero_lit(), "cocycle residual {}", res);
    }

    #[test]
    fn non_closed_differences_are_rejected() {
        let chart = Chart::new("plane", &["x", "y"]);
        let ctx = ctx_for(&chart, &[]);
        // a1 - a2 = x dy, which is not closed.
        let a1 = Form::component(&chart, Basis::Coordinate, &[1], parsed("x", &ctx))
            .unwrap()
            .with_imaginary(true);
        let a2 = Form::zero(&chart, 1, Basis::Coordinate).with_imaginary(true);
        let p1 = Patch::new("one", a1, vec![]).unwrap();
        let p2 = Patch::new("two", a2, vec![]).unwrap();
        assert!(matches!(
            transition(&p1, &p2, &chart, &ctx),
            Err(Error::Verification(_))
        ));
    }

    #[test]
    fn monopole_potential_has_integer_chern_number() {
        // a = (g/2)(1 - cos(theta)) dphi on the sphere.  The Chern form is
        // -(g/(4 pi)) sin(theta) dtheta^dphi and its integral over the full
        // sphere is exactly -g.
        let mut chart = Chart::new("sphere", &["theta", "phi"]);
        chart.set_period("phi", Expr::mul(vec![Expr::int(2), Expr::pi()]));
        let mut ctx = ctx_for(&chart, &[("g", 0.1, 0.9)]);
        ctx.set_range("theta", 0.2, 2.9);

        let a = Form::component(
            &chart,
            Basis::Coordinate,
            &[1],
            parsed("(g/2)*(1 - cos(theta))", &ctx),
        )
        .unwrap()
        .with_imaginary(true);
        let c = chern_form(&a, &chart, &ctx).unwrap();
        assert!(!c.imaginary);

        let cycle = vec![
            (Name::new("theta"), Expr::zero(), Expr::pi()),
            (
                Name::new("phi"),
                Expr::zero(),
                Expr::mul(vec![Expr::int(2), Expr::pi()]),
            ),
        ];
        let n = chern_number(&c, &cycle, &chart, &ctx).unwrap();
        assert_eq!(n.to_string(), "-g");

        // Reversing the cycle orientation flips the sign.
        let flipped = vec![cycle[1].clone(), cycle[0].clone()];
        let m = chern_number(&c, &flipped, &chart, &ctx).unwrap();
        assert_eq!(m.to_string(), "g");
    }

    #[test]
    fn integrands_outside_the_closed_form_family_are_reported() {
        let mut ctx = Context::new();
        ctx.coordinate("x");
        // x*sin(x) needs integration by parts, which is out of scope.
        let e = parsed("x*sin(x)", &ctx);
        assert!(matches!(
            integrate_in(&e, &Name::new("x"), &ctx),
            Err(Error::Unsupported(_))
        ));
        // sin(x^2) has a non-affine argument.
        let e2 = parsed("sin(x^2)", &ctx);
        assert!(matches!(
            integrate_in(&e2, &Name::new("x"), &ctx),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn affine_and_trig_primitives_check_against_derivatives() {
        let chart = Chart::new("line", &["x"]);
        let mut ctx = ctx_for(&chart, &[("a", 0.3, 0.7), ("b", 1.2, 1.8)]);
        ctx.set_range("x", 0.1, 0.6);
        let samples = [
            "x^3",
            "1/x",
            "(a + b*x)^5",
            "1/(a + b*x)",
            "sin(a*x)",
            "cos(b*x + a)",
            "exp(2*x)",
            "a/(b*x)",
            "sqrt(a + x)",
        ];
        for s in samples {
            let e = parsed(s, &ctx);
            let g = integrate_in(&e, &Name::new("x"), &ctx).unwrap();
            let back = differentiate(&g, &Name::new("x")).unwrap();
            let diff = Expr::sub(back, e);
            assert!(
                is_zero_sym(&diff, &ctx).unwrap(),
                "d/dx of primitive of {} does not return the integrand",
                s
            );
        }
    }

    #[test]
    fn axis_energies_take_discrete_values() {
        use crate::context::Assumption;
        let mut ctx = Context::new();
        ctx.parameter("gamma0");
        ctx.parameter("n");
        ctx.assume("n", Assumption::Positive);
        ctx.set_range("n", 1.0, 3.0);
        let g0 = Expr::sym("gamma0");
        let n = Expr::sym("n");
        let v1 = c_energy(&g0, &n, 1, &ctx).unwrap();
        assert_eq!(v1.quantized.to_string(), "-ln(n)");
        let v2 = c_energy(&g0, &n, 2, &ctx).unwrap();
        assert_eq!(v2.quantized.to_string(), "-n^2 + 1");
        // a negative concrete level hits the logarithm domain check
        assert!(matches!(
            c_energy(&g0, &Expr::int(-2), 1, &ctx),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn loci_are_classified_by_what_actually_diverges() {
        let mut chart = Chart::new("sphere", &["t", "r", "theta", "phi"]);
        let mut ctx = ctx_for(&chart, &[("g", 0.1, 0.9), ("m", 0.1, 0.4)]);
        ctx.set_range("r", 1.1, 1.9);
        ctx.set_range("theta", 0.2, 2.9);

        let field = parsed("g*(1 + cos(theta))/(r*sin(theta))", &ctx);
        let invariant = parsed("48*m^2/r^6", &ctx);
        let reports = singular_loci(&[field.clone()], &invariant, &chart, &ctx).unwrap();
        let labels: Vec<(String, LocusKind)> = reports
            .iter()
            .map(|r| (r.locus.label(), r.kind))
            .collect();
        // r = 0 is a curvature singularity; theta = 0 only blows up the
        // field, while at theta = pi the field is actually finite because
        // 1 + cos(theta) vanishes there too.
        assert_eq!(
            labels,
            vec![
                ("r = 0".to_string(), LocusKind::Curvature),
                ("theta = 0".to_string(), LocusKind::Gauge),
            ]
        );

        // Excluding the axis downgrades the gauge locus to a chart artifact.
        chart.exclude(Locus::new("theta", Expr::zero()));
        let reports = singular_loci(&[field], &invariant, &chart, &ctx).unwrap();
        assert_eq!(reports[1].kind, LocusKind::Degenerate);

        // A factor affine in one coordinate is solved for its zero.
        let horizon_field = parsed("1/(r - 2*m)", &ctx);
        let flat = parsed("m", &ctx);
        let reports = singular_loci(&[horizon_field], &flat, &chart, &ctx).unwrap();
        assert_eq!(reports.len(), 1);
        assert_eq!(reports[0].locus.label(), "r = 2*m");
        assert_eq!(reports[0].kind, LocusKind::Gauge);
    }
}
