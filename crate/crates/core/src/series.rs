//! Puiseux expansions about finite points, used to read off leading orders
//! of connection and curvature components near candidate loci.
//!
//! A series is a finite map `exponent -> coefficient` in a local deviation
//! variable, exact below its truncation order.  Exponents are rational, so
//! radical factors like `sqrt(r - r_plus)` expand directly.

use crate::context::Context;
use crate::error::{Error, Result};
use crate::expr::{Expr, Fun, Name, Rat, rat_int};
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

#[derive(Clone, Debug)]
pub struct Series {
    /// exponent -> simplified nonzero coefficient
    pub terms: BTreeMap<Rat, Expr>,
    /// exponents at or above this bound are unknown
    pub order: Rat,
}

impl Series {
    pub fn leading(&self) -> Option<(&Rat, &Expr)> {
        self.terms.iter().next()
    }
    fn leading_exp_or(&self, default: Rat) -> Rat {
        self.terms.keys().next().cloned().unwrap_or(default)
    }
}

pub struct SeriesCtx<'a> {
    pub ctx: &'a Context,
    pub order: Rat,
}

impl<'a> SeriesCtx<'a> {
    pub fn new(ctx: &'a Context, order: i64) -> Self {
        SeriesCtx { ctx, order: rat_int(order) }
    }

    fn constant(&self, c: Expr) -> Result<Series> {
        let mut terms = BTreeMap::new();
        let cs = crate::normal::simplify(&c, self.ctx)?;
        if !cs.is_zero_lit() {
            terms.insert(Rat::zero(), cs);
        }
        Ok(Series { terms, order: self.order.clone() })
    }

    fn insert(&self, s: &mut Series, e: Rat, c: Expr) -> Result<()> {
        if e >= s.order {
            return Ok(());
        }
        let prev = s.terms.remove(&e);
        let sum = match prev {
            None => c,
            Some(p) => Expr::add(vec![p, c]),
        };
        let sum = crate::normal::simplify(&sum, self.ctx)?;
        if !sum.is_zero_lit() {
            s.terms.insert(e, sum);
        }
        Ok(())
    }

    fn add(&self, a: &Series, b: &Series) -> Result<Series> {
        let order = a.order.clone().min(b.order.clone());
        let mut out = Series { terms: BTreeMap::new(), order };
        for (e, c) in a.terms.iter().chain(b.terms.iter()) {
            self.insert(&mut out, e.clone(), c.clone())?;
        }
        Ok(out)
    }

    fn neg(&self, a: &Series) -> Series {
        Series {
            terms: a.terms.iter().map(|(e, c)| (e.clone(), c.clone().neg())).collect(),
            order: a.order.clone(),
        }
    }

    fn mul(&self, a: &Series, b: &Series) -> Result<Series> {
        // truncation: unknown tail of one factor times leading of the other
        let la = a.leading_exp_or(a.order.clone());
        let lb = b.leading_exp_or(b.order.clone());
        let order = (a.order.clone() + lb).min(b.order.clone() + la);
        let mut out = Series { terms: BTreeMap::new(), order };
        for (ea, ca) in &a.terms {
            for (eb, cb) in &b.terms {
                self.insert(
                    &mut out,
                    ea.clone() + eb.clone(),
                    Expr::mul(vec![ca.clone(), cb.clone()]),
                )?;
            }
        }
        Ok(out)
    }

    /// `a^q` by factoring the leading term and binomially expanding the rest.
    fn pow(&self, a: &Series, q: &Rat) -> Result<Series> {
        if a.terms.is_empty() {
            if q.is_positive() {
                return Ok(Series { terms: BTreeMap::new(), order: self.order.clone() });
            }
            return Err(Error::Series("inverse of a vanishing series".into()));
        }
        let (l, c) = a.leading().map(|(e, c)| (e.clone(), c.clone())).unwrap();
        // u = a / (c x^l) - 1 has positive leading exponent
        let cinv = Expr::powi(c.clone(), -1);
        let mut u = Series {
            terms: BTreeMap::new(),
            order: a.order.clone() - l.clone(),
        };
        for (e, k) in &a.terms {
            if *e == l {
                continue;
            }
            self.insert(
                &mut u,
                e.clone() - l.clone(),
                Expr::mul(vec![k.clone(), cinv.clone()]),
            )?;
        }
        // (1+u)^q = sum binom(q,k) u^k
        let mut acc = Series { terms: BTreeMap::new(), order: u.order.clone() };
        self.insert(&mut acc, Rat::zero(), Expr::one())?;
        let du = u.leading_exp_or(u.order.clone());
        if !u.terms.is_empty() {
            let mut upow = u.clone();
            let mut coeff = q.clone();
            let mut k = 1u32;
            loop {
                let scaled = self.scale(&upow, &Expr::Num(coeff.clone()))?;
                acc = self.add(&acc, &scaled)?;
                let next_min = du.clone() * rat_int((k + 1) as i64);
                if next_min >= acc.order || k > 64 {
                    break;
                }
                upow = self.mul(&upow, &u)?;
                coeff = coeff * (q.clone() - rat_int(k as i64)) / rat_int((k + 1) as i64);
                if coeff.is_zero() {
                    break;
                }
                k += 1;
            }
        }
        // multiply by c^q x^(l q)
        let front = crate::normal::simplify(&Expr::powr(c, q.clone()), self.ctx)?;
        let shifted = Series {
            terms: acc
                .terms
                .iter()
                .map(|(e, k)| {
                    (e.clone() + l.clone() * q.clone(), Expr::mul(vec![front.clone(), k.clone()]))
                })
                .collect(),
            order: acc.order.clone() + l * q.clone(),
        };
        // re-simplify coefficients
        let mut out = Series { terms: BTreeMap::new(), order: shifted.order.clone() };
        for (e, k) in shifted.terms {
            self.insert(&mut out, e, k)?;
        }
        Ok(out)
    }

    fn scale(&self, a: &Series, c: &Expr) -> Result<Series> {
        let mut out = Series { terms: BTreeMap::new(), order: a.order.clone() };
        for (e, k) in &a.terms {
            self.insert(&mut out, e.clone(), Expr::mul(vec![c.clone(), k.clone()]))?;
        }
        Ok(out)
    }

    /// Maclaurin composition for the elementary functions; the argument must
    /// be regular (no negative exponents) at the expansion point.
    fn fun(&self, f: Fun, a: &Series) -> Result<Series> {
        if a.terms.keys().next().map(|e| e.is_negative()).unwrap_or(false) {
            return Err(Error::Series("elementary function of a pole".into()));
        }
        let a0 = a.terms.get(&Rat::zero()).cloned().unwrap_or_else(Expr::zero);
        let mut tail = a.clone();
        tail.terms.remove(&Rat::zero());
        match f {
            Fun::Exp => {
                // exp(a0) * sum tail^k / k!
                let head = crate::normal::simplify(&Expr::exp(a0), self.ctx)?;
                let series = self.maclaurin(&tail, |k| {
                    let mut f = Rat::one();
                    for i in 1..=k {
                        f *= rat_int(i as i64);
                    }
                    Some(Rat::one() / f)
                })?;
                self.scale(&series, &head)
            }
            Fun::Ln => {
                if a0.is_zero_lit() {
                    return Err(Error::Series("logarithm of a vanishing argument".into()));
                }
                let inv = Expr::powi(a0.clone(), -1);
                let u = self.scale(&tail, &inv)?;
                // ln(a0) + sum (-1)^(k+1) u^k / k
                let head = crate::normal::simplify(&Expr::ln(a0), self.ctx)?;
                let series = self.maclaurin(&u, |k| {
                    if k == 0 {
                        return None;
                    }
                    let sign = if k % 2 == 1 { Rat::one() } else { -Rat::one() };
                    Some(sign / rat_int(k as i64))
                })?;
                let mut out = series;
                self.insert(&mut out, Rat::zero(), head)?;
                Ok(out)
            }
            Fun::Sin | Fun::Cos => {
                let sin_m = self.maclaurin(&tail, |k| {
                    if k % 2 == 0 {
                        return None;
                    }
                    let mut f = Rat::one();
                    for i in 1..=k {
                        f *= rat_int(i as i64);
                    }
                    let sign = if (k / 2) % 2 == 0 { Rat::one() } else { -Rat::one() };
                    Some(sign / f)
                })?;
                let cos_m = self.maclaurin(&tail, |k| {
                    if k % 2 == 1 {
                        return None;
                    }
                    let mut f = Rat::one();
                    for i in 1..=k {
                        f *= rat_int(i as i64);
                    }
                    let sign = if (k / 2) % 2 == 0 { Rat::one() } else { -Rat::one() };
                    Some(sign / f)
                })?;
                let (s0, c0) = (
                    crate::normal::simplify(&Expr::sin(a0.clone()), self.ctx)?,
                    crate::normal::simplify(&Expr::cos(a0), self.ctx)?,
                );
                match f {
                    Fun::Sin => {
                        // sin(a0)*cos(u) + cos(a0)*sin(u)
                        let t1 = self.scale(&cos_m, &s0)?;
                        let t2 = self.scale(&sin_m, &c0)?;
                        self.add(&t1, &t2)
                    }
                    _ => {
                        // cos(a0)*cos(u) - sin(a0)*sin(u)
                        let t1 = self.scale(&cos_m, &c0)?;
                        let t2 = self.scale(&sin_m, &s0)?;
                        self.add(&t1, &self.neg(&t2))
                    }
                }
            }
        }
    }

    /// `sum_k coeff(k) * tail^k`, truncated at the working order.
    fn maclaurin<F: Fn(u32) -> Option<Rat>>(&self, tail: &Series, coeff: F) -> Result<Series> {
        let mut out = Series { terms: BTreeMap::new(), order: self.order.clone() };
        if let Some(c0) = coeff(0) {
            self.insert(&mut out, Rat::zero(), Expr::Num(c0))?;
        }
        if tail.terms.is_empty() {
            out.order = tail.order.clone();
            return Ok(out);
        }
        out.order = out.order.min(tail.order.clone());
        let du = tail.leading_exp_or(tail.order.clone());
        let mut upow = tail.clone();
        let mut k = 1u32;
        loop {
            if let Some(c) = coeff(k) {
                let scaled = self.scale(&upow, &Expr::Num(c))?;
                out = self.add(&out, &scaled)?;
            }
            let next_min = du.clone() * rat_int((k + 1) as i64);
            if next_min >= out.order || k > 64 {
                break;
            }
            upow = self.mul(&upow, tail)?;
            k += 1;
        }
        Ok(out)
    }

    /// Expands `e` around `var = point` in the deviation variable.
    pub fn expand(&self, e: &Expr, var: &Name, point: &Expr) -> Result<Series> {
        match e {
            Expr::Num(_) => self.constant(e.clone()),
            Expr::Sym(n) => {
                if n == var {
                    let mut s = self.constant(point.clone())?;
                    self.insert(&mut s, Rat::one(), Expr::one())?;
                    Ok(s)
                } else {
                    self.constant(e.clone())
                }
            }
            Expr::Der { args, .. } => {
                if args.iter().any(|a| a == var) {
                    return Err(Error::Series(
                        "unknown function depends on the expansion variable".into(),
                    ));
                }
                self.constant(e.clone())
            }
            Expr::Add(ts) => {
                let mut acc = self.constant(Expr::zero())?;
                for t in ts {
                    let s = self.expand(t, var, point)?;
                    acc = self.add(&acc, &s)?;
                }
                Ok(acc)
            }
            Expr::Mul(fs) => {
                let mut acc = self.constant(Expr::one())?;
                for t in fs {
                    let s = self.expand(t, var, point)?;
                    acc = self.mul(&acc, &s)?;
                }
                Ok(acc)
            }
            Expr::Pow(b, q) => {
                let s = self.expand(b, var, point)?;
                self.pow(&s, q)
            }
            Expr::Fun(f, a) => {
                let s = self.expand(a, var, point)?;
                self.fun(*f, &s)
            }
        }
    }
}

/// Leading exponent and coefficient of `e` at `var = point`, or `None` when
/// the expression vanishes identically there (to the probed depth).
pub fn leading_order(
    e: &Expr,
    var: &Name,
    point: &Expr,
    ctx: &Context,
) -> Result<Option<(Rat, Expr)>> {
    for order in [4i64, 8, 16] {
        let sc = SeriesCtx::new(ctx, order);
        let s = sc.expand(e, var, point)?;
        if let Some((k, c)) = s.leading() {
            return Ok(Some((k.clone(), c.clone())));
        }
        // all coefficients vanished below the truncation order; if the whole
        // expression is symbolically zero we are done
        if crate::normal::is_zero_sym(e, ctx)? {
            return Ok(None);
        }
    }
    Ok(None)
}

/// Convenience wrapper: the series of `e` at `var = point` up to `order`.
pub fn series_at(
    e: &Expr,
    var: &Name,
    point: &Expr,
    order: i64,
    ctx: &Context,
) -> Result<Series> {
    SeriesCtx::new(ctx, order).expand(e, var, point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::Context;
    use crate::parse::parse;

    fn ctx() -> Context {
        let mut c = Context::new();
        c.coordinate("r");
        c.coordinate("theta");
        c.parameter("a");
        c.parameter("rp");
        c
    }

    fn lead(src: &str, var: &str, at: &str, c: &Context) -> (Rat, String) {
        let e = parse(src, c).unwrap();
        let p = parse(at, c).unwrap();
        let (k, coeff) = leading_order(&e, &Name::new(var), &p, c).unwrap().unwrap();
        (k, coeff.to_string())
    }

    #[test]
    fn laurent_orders_at_the_origin() {
        let c = ctx();
        assert_eq!(lead("1/r^4", "r", "0", &c), (rat_int(-4), "1".into()));
        assert_eq!(lead("(1 + r)/r^2", "r", "0", &c), (rat_int(-2), "1".into()));
        assert_eq!(lead("r^2*(1 + r)", "r", "0", &c), (rat_int(2), "1".into()));
    }

    #[test]
    fn puiseux_orders_at_shifted_points() {
        let c = ctx();
        let (k, coeff) = lead("sqrt(r - rp)", "r", "rp", &c);
        assert_eq!(k, Rat::new(1.into(), 2.into()));
        assert_eq!(coeff, "1");
        let (k2, _) = lead("1/sqrt(r - rp)", "r", "rp", &c);
        assert_eq!(k2, Rat::new((-1).into(), 2.into()));
    }

    #[test]
    fn trig_series_vanish_to_the_right_order() {
        let c = ctx();
        // sin(theta) ~ theta at 0, 1 - cos(theta) ~ theta^2/2
        assert_eq!(lead("sin(theta)", "theta", "0", &c), (rat_int(1), "1".into()));
        assert_eq!(lead("1 - cos(theta)", "theta", "0", &c), (rat_int(2), "1/2".into()));
        // near the north pole the combination (1 - cos)/sin is regular
        let (k, _) = lead("(1 - cos(theta))/sin(theta)", "theta", "0", &c);
        assert_eq!(k, rat_int(1));
        // and (1 + cos)/sin has a simple pole there
        let (k2, _) = lead("(1 + cos(theta))/sin(theta)", "theta", "0", &c);
        assert_eq!(k2, rat_int(-1));
    }

    #[test]
    fn identically_vanishing_expressions_report_none() {
        let c = ctx();
        let e = parse("sin(theta)^2 + cos(theta)^2 - 1", &c).unwrap();
        assert!(leading_order(&e, &Name::new("theta"), &Expr::zero(), &c)
            .unwrap()
            .is_none());
    }

    #[test]
    fn exponential_series_match_probes() {
        let c = ctx();
        let e = parse("exp(r)/(1 - r)", &c).unwrap();
        let s = series_at(&e, &Name::new("r"), &Expr::zero(), 4, &c).unwrap();
        // exp(r)/(1-r) = 1 + 2r + 5/2 r^2 + 8/3 r^3 + ...
        let want = [("0", "1"), ("1", "2"), ("2", "5/2"), ("3", "8/3")];
        for (e_str, c_str) in want {
            let k: i64 = e_str.parse().unwrap();
            let coeff = s.terms.get(&rat_int(k)).unwrap();
            assert_eq!(coeff.to_string(), *c_str);
        }
    }
}
