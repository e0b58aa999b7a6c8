//! Canonical normal form: quotients of generalized polynomials.
//!
//! A normalized expression is `num / prod(den_i ^ k_i)` where `num` and the
//! `den_i` are sparse polynomials over *atoms* (symbols, elementary-function
//! applications, derivative markers) and *radical bases* (polynomials carried
//! with a fractional exponent).  Monomial arithmetic maintains three local
//! reductions so that equal expressions collapse to equal forms:
//!
//!   * `sin(u)^2 -> 1 - cos(u)^2` (sine exponents stay below 2),
//!   * `exp(a) * exp(b) -> exp(a + b)` (one exponential per monomial),
//!   * `P^(1/2) * P^(1/2) -> P` (radical exponents stay in (0,1)).
//!
//! Zero testing of a difference therefore reduces to an empty numerator.

use crate::context::Context;
use crate::error::{Error, Result};
use crate::expr::{Expr, Fun, Rat, rat, rat_int, rat_is_int, PI};
use num::bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;

/// Base of one power-product entry.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Base {
    /// Symbol, function application, derivative marker, or numeric radicand.
    Atom(Expr),
    /// Polynomial base kept under a fractional exponent (a radical).
    Rad(Poly),
}

impl Base {
    fn to_ast(&self) -> Expr {
        match self {
            Base::Atom(e) => e.clone(),
            Base::Rad(p) => p.to_ast(),
        }
    }
}

/// Power product: finitely many bases with positive rational exponents.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default)]
pub struct Pp(pub BTreeMap<Base, Rat>);

impl Pp {
    pub fn unit() -> Pp {
        Pp::default()
    }
    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }
    fn single(b: Base, e: Rat) -> Pp {
        let mut m = BTreeMap::new();
        m.insert(b, e);
        Pp(m)
    }
    fn degree(&self) -> Rat {
        let mut d = Rat::zero();
        for e in self.0.values() {
            d += e;
        }
        d
    }
}

/// True when both polynomials mention a common radical base.
fn shares_radical(a: &Poly, b: &Poly) -> bool {
    let mut rads = std::collections::BTreeSet::new();
    for (pp, _) in &a.0 {
        for (base, _) in &pp.0 {
            if matches!(base, Base::Rad(_)) {
                rads.insert(base.clone());
            }
        }
    }
    if rads.is_empty() {
        return false;
    }
    b.0.keys()
        .any(|pp| pp.0.keys().any(|base| rads.contains(base)))
}

/// Graded-lexicographic monomial order (total degree, then exponents along
/// the base order).  Multiplicative, hence safe for polynomial division.
pub fn cmp_pp(a: &Pp, b: &Pp) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    match a.degree().cmp(&b.degree()) {
        Ordering::Equal => {}
        o => return o,
    }
    let mut ia = a.0.iter();
    let mut ib = b.0.iter();
    loop {
        match (ia.next(), ib.next()) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some((ba, ea)), Some((bb, eb))) => match ba.cmp(bb) {
                // Earlier base with a positive exponent ranks higher.
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
                Ordering::Equal => match ea.cmp(eb) {
                    Ordering::Equal => continue,
                    o => return o,
                },
            },
        }
    }
}

/// Sparse polynomial: monomial -> nonzero rational coefficient.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default)]
pub struct Poly(pub BTreeMap<Pp, Rat>);

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }
    pub fn one() -> Poly {
        Poly::constant(Rat::one())
    }
    pub fn constant(c: Rat) -> Poly {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.0.insert(Pp::unit(), c);
        }
        p
    }
    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
    pub fn is_one(&self) -> bool {
        self.0.len() == 1 && self.0.get(&Pp::unit()).map(|c| c.is_one()).unwrap_or(false)
    }
    fn as_constant(&self) -> Option<Rat> {
        if self.0.is_empty() {
            return Some(Rat::zero());
        }
        if self.0.len() == 1 {
            if let Some(c) = self.0.get(&Pp::unit()) {
                return Some(c.clone());
            }
        }
        None
    }

    fn insert(&mut self, pp: Pp, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.0.entry(pp) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().clone() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (pp, c) in &other.0 {
            out.insert(pp.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|(p, c)| (p.clone(), -c.clone())).collect())
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly(self.0.iter().map(|(p, k)| (p.clone(), k.clone() * c)).collect())
    }

    fn leading(&self) -> Option<(&Pp, &Rat)> {
        self.0.iter().max_by(|a, b| cmp_pp(a.0, b.0))
    }

    /// Numeric content together with the per-base minimum exponents shared by
    /// every monomial.
    fn content(&self) -> (Rat, Pp) {
        if self.0.is_empty() {
            return (Rat::one(), Pp::unit());
        }
        let mut num_gcd: Option<BigInt> = None;
        let mut den_lcm = BigInt::one();
        let mut pp: Option<BTreeMap<Base, Rat>> = None;
        for (p, c) in &self.0 {
            num_gcd = Some(match num_gcd {
                None => c.numer().clone(),
                Some(g) => num::integer::gcd(g, c.numer().clone()),
            });
            den_lcm = num::integer::lcm(den_lcm, c.denom().clone());
            pp = Some(match pp {
                None => p.0.clone(),
                Some(mut acc) => {
                    acc.retain(|b, e| {
                        if let Some(e2) = p.0.get(b) {
                            if *e2 < *e {
                                *e = e2.clone();
                            }
                            true
                        } else {
                            false
                        }
                    });
                    acc
                }
            });
        }
        let mut g = num_gcd.unwrap_or_else(BigInt::one);
        if g.is_zero() {
            g = BigInt::one();
        }
        (Rat::new(g.abs(), den_lcm), Pp(pp.unwrap_or_default()))
    }

    /// Exact multivariate division; `None` when not divisible (or when the
    /// iteration guard trips).
    pub fn exact_div(&self, divisor: &Poly, nc: &Nc) -> Option<Poly> {
        if divisor.is_zero() {
            return None;
        }
        if let Some(c) = divisor.as_constant() {
            return Some(self.scale(&(Rat::one() / c)));
        }
        let (dl_pp, dl_c) = divisor.leading().map(|(p, c)| (p.clone(), c.clone()))?;
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        let mut steps = 0usize;
        while !rem.is_zero() {
            steps += 1;
            if steps > 20_000 {
                return None;
            }
            let (rl_pp, rl_c) = rem.leading().map(|(p, c)| (p.clone(), c.clone()))?;
            // monomial division rl / dl
            let mut q = rl_pp.0.clone();
            let mut ok = true;
            for (b, e) in &dl_pp.0 {
                match q.get_mut(b) {
                    None => {
                        ok = false;
                        break;
                    }
                    Some(ecur) => {
                        let ne = ecur.clone() - e;
                        if ne.is_negative() {
                            ok = false;
                            break;
                        }
                        if ne.is_zero() {
                            q.remove(b);
                        } else {
                            *ecur = ne;
                        }
                    }
                }
            }
            if !ok {
                return None;
            }
            let qc = rl_c / dl_c.clone();
            let qpp = Pp(q);
            let mut qpoly = Poly::zero();
            qpoly.insert(qpp.clone(), qc.clone());
            quot = quot.add(&qpoly);
            let prod = nc.poly_mul(&qpoly, divisor).ok()?;
            rem = rem.add(&prod.neg());
        }
        Some(quot)
    }

    pub fn to_ast(&self) -> Expr {
        if self.0.is_empty() {
            return Expr::zero();
        }
        let mut terms: Vec<(&Pp, &Rat)> = self.0.iter().collect();
        terms.sort_by(|a, b| cmp_pp(b.0, a.0));
        let asts: Vec<Expr> = terms.into_iter().map(|(p, c)| mono_to_ast(p, c)).collect();
        Expr::add(asts)
    }
}

fn mono_to_ast(pp: &Pp, c: &Rat) -> Expr {
    let mut factors = Vec::new();
    if !c.is_one() || pp.is_unit() {
        factors.push(Expr::Num(c.clone()));
    }
    for (b, e) in &pp.0 {
        factors.push(Expr::powr(b.to_ast(), e.clone()));
    }
    Expr::mul(factors)
}

/// Normalized quotient.  `den` is a sorted factor list; each factor is a
/// content-free polynomial with a positive leading coefficient.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Normal {
    pub num: Poly,
    pub den: Vec<(Poly, u32)>,
}

impl Normal {
    pub fn zero() -> Normal {
        Normal { num: Poly::zero(), den: Vec::new() }
    }
    pub fn one() -> Normal {
        Normal { num: Poly::one(), den: Vec::new() }
    }
    pub fn constant(c: Rat) -> Normal {
        Normal { num: Poly::constant(c), den: Vec::new() }
    }
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn to_ast(&self) -> Expr {
        let num_ast = self.num.to_ast();
        if self.den.is_empty() {
            return num_ast;
        }
        let mut factors = vec![num_ast];
        for (f, k) in &self.den {
            factors.push(Expr::powr(f.to_ast(), -rat_int(*k as i64)));
        }
        Expr::mul(factors)
    }
}

/// Normalization driver carrying the declaration context.
pub struct Nc<'a> {
    pub ctx: &'a Context,
}

impl<'a> Nc<'a> {
    pub fn new(ctx: &'a Context) -> Self {
        Nc { ctx }
    }

    // ---- polynomial arithmetic -------------------------------------------

    pub fn poly_mul(&self, a: &Poly, b: &Poly) -> Result<Poly> {
        let mut out = Poly::zero();
        for (pa, ca) in &a.0 {
            for (pb, cb) in &b.0 {
                let part = self.mono_mul(pa, ca, pb, cb)?;
                out = out.add(&part);
            }
        }
        Ok(out)
    }

    pub fn poly_pow(&self, p: &Poly, k: u32) -> Result<Poly> {
        let mut out = Poly::one();
        for _ in 0..k {
            out = self.poly_mul(&out, p)?;
        }
        Ok(out)
    }

    /// Monomial product with reductions; the result is a polynomial because
    /// sine reduction and radical recombination can expand.
    fn mono_mul(&self, pa: &Pp, ca: &Rat, pb: &Pp, cb: &Rat) -> Result<Poly> {
        let mut merged: BTreeMap<Base, Rat> = pa.0.clone();
        for (b, e) in &pb.0 {
            let entry = merged.entry(b.clone()).or_insert_with(Rat::zero);
            *entry += e;
            if entry.is_zero() {
                merged.remove(b);
            }
        }
        self.reduce_monomial(merged, ca.clone() * cb)
    }

    /// Restores the monomial invariants on a raw exponent map.
    fn reduce_monomial(&self, mut map: BTreeMap<Base, Rat>, coeff: Rat) -> Result<Poly> {
        if coeff.is_zero() {
            return Ok(Poly::zero());
        }
        // numeric radicand atoms fold their integer exponent part into the
        // coefficient, e.g. (-1)^(1/2) * (-1)^(1/2) -> -1
        let num_over: Option<(Base, Rat)> = map
            .iter()
            .find(|(b, e)| matches!(b, Base::Atom(Expr::Num(_))) && **e >= Rat::one())
            .map(|(b, e)| (b.clone(), e.clone()));
        if let Some((b, e)) = num_over {
            map.remove(&b);
            let int_part = e.floor();
            let frac = e - int_part.clone();
            if !frac.is_zero() {
                map.insert(b.clone(), frac);
            }
            let v = match &b {
                Base::Atom(Expr::Num(v)) => v.clone(),
                _ => unreachable!(),
            };
            let k = int_part
                .to_integer()
                .to_i64()
                .ok_or_else(|| Error::Unsupported("exponent overflow".into()))?;
            let folded = rat_int_pow(&v, k)?;
            return self.reduce_monomial(map, coeff * folded);
        }
        // exp-merge: combine all exponential factors into one atom.
        let exps: Vec<(Base, Rat)> = map
            .iter()
            .filter(|(b, _)| matches!(b, Base::Atom(Expr::Fun(Fun::Exp, _))))
            .map(|(b, e)| (b.clone(), e.clone()))
            .collect();
        if exps.len() > 1 || exps.iter().any(|(_, e)| !e.is_one()) {
            let mut arg_sum = Normal::zero();
            for (b, e) in &exps {
                map.remove(b);
                if let Base::Atom(Expr::Fun(Fun::Exp, a)) = b {
                    let an = self.normalize(a)?;
                    let scaled = self.nmul(&an, &Normal::constant(e.clone()))?;
                    arg_sum = self.nadd(&arg_sum, &scaled)?;
                }
            }
            let combined = self.atom_fun(Fun::Exp, &arg_sum)?;
            let rest = Poly(std::iter::once((Pp(map), coeff)).collect());
            return self.poly_mul(&rest, &self.normal_to_poly_guard(&combined)?);
        }

        // radical recombination: integer parts of Rad exponents expand.
        let rad_over: Option<(Base, Rat)> = map
            .iter()
            .find(|(b, e)| matches!(b, Base::Rad(_)) && **e >= Rat::one())
            .map(|(b, e)| (b.clone(), e.clone()));
        if let Some((b, e)) = rad_over {
            map.remove(&b);
            let int_part = e.floor();
            let frac = e - int_part.clone();
            if !frac.is_zero() {
                map.insert(b.clone(), frac);
            }
            let p = match &b {
                Base::Rad(p) => p.clone(),
                _ => unreachable!(),
            };
            let k = int_part.numer().to_u32().ok_or_else(|| {
                Error::Unsupported("radical exponent overflow".into())
            })?;
            let expanded = self.poly_pow(&p, k)?;
            let rest = Poly(std::iter::once((Pp(map), coeff)).collect());
            return self.poly_mul(&rest, &expanded);
        }

        // sine reduction: sin(u)^k with k >= 2 rewrites via 1 - cos(u)^2.
        let sin_over: Option<(Base, Rat)> = map
            .iter()
            .find(|(b, e)| {
                matches!(b, Base::Atom(Expr::Fun(Fun::Sin, _))) && **e >= rat_int(2)
            })
            .map(|(b, e)| (b.clone(), e.clone()));
        if let Some((b, e)) = sin_over {
            let arg = match &b {
                Base::Atom(Expr::Fun(Fun::Sin, a)) => a.as_ref().clone(),
                _ => unreachable!(),
            };
            map.remove(&b);
            let rem = e - rat_int(2);
            if !rem.is_zero() {
                map.insert(b.clone(), rem);
            }
            let rest = Poly(std::iter::once((Pp(map), coeff)).collect());
            // 1 - cos(u)^2
            let cos_b = Base::Atom(Expr::cos(arg));
            let mut pyth = Poly::one();
            pyth.insert(Pp::single(cos_b, rat_int(2)), rat_int(-1));
            return self.poly_mul(&rest, &pyth);
        }

        // drop vanished entries defensively
        map.retain(|_, e| !e.is_zero());
        Ok(Poly(std::iter::once((Pp(map), coeff)).collect()))
    }

    fn normal_to_poly_guard(&self, n: &Normal) -> Result<Poly> {
        if !n.den.is_empty() {
            return Err(Error::Unsupported(
                "denominator escaped during atom recombination".into(),
            ));
        }
        Ok(n.num.clone())
    }

    // ---- quotient assembly ------------------------------------------------

    /// Canonical constructor: cleans up factors, cancels, sorts.
    pub fn make(&self, mut num: Poly, den_raw: Vec<(Poly, u32)>) -> Result<Normal> {
        let mut den: Vec<(Poly, u32)> = Vec::new();
        for (f, k) in den_raw {
            if k == 0 {
                continue;
            }
            self.den_push(&mut den, &mut num, f, k)?;
        }
        if num.is_zero() {
            return Ok(Normal::zero());
        }
        // recombine factor pairs carrying the same radical: the product fires
        // the `rad * rad -> radicand` reduction, so conjugate denominators
        // such as (m - sqrt(k))(m + sqrt(k)) collapse to m^2 - k and become
        // visible to the cancellation below.  Factors with disjoint radicals
        // stay apart to keep denominators factored.
        let mut fuel = 64u32;
        'merge: while fuel > 0 {
            fuel -= 1;
            for i in 0..den.len() {
                for j in i + 1..den.len() {
                    if !shares_radical(&den[i].0, &den[j].0) {
                        continue;
                    }
                    let (fj, kj) = den.remove(j);
                    let (fi, ki) = den.remove(i);
                    let k = ki.min(kj);
                    let prod = self.poly_mul(&fi, &fj)?;
                    self.den_push(&mut den, &mut num, prod, k)?;
                    if ki > k {
                        self.den_push(&mut den, &mut num, fi, ki - k)?;
                    }
                    if kj > k {
                        self.den_push(&mut den, &mut num, fj, kj - k)?;
                    }
                    continue 'merge;
                }
            }
            break;
        }
        // cancellation: divide out den factors that divide the numerator.
        let mut out_den: Vec<(Poly, u32)> = Vec::new();
        for (f, mut k) in den {
            while k > 0 {
                match num.exact_div(&f, self) {
                    Some(q) => {
                        num = q;
                        k -= 1;
                    }
                    None => break,
                }
            }
            if k > 0 {
                out_den.push((f, k));
            }
            if num.is_zero() {
                return Ok(Normal::zero());
            }
        }
        out_den.sort_by(|a, b| a.0.cmp(&b.0));
        // merge equal factors
        let mut merged: Vec<(Poly, u32)> = Vec::new();
        for (f, k) in out_den {
            if let Some(last) = merged.last_mut() {
                if last.0 == f {
                    last.1 += k;
                    continue;
                }
            }
            merged.push((f, k));
        }
        Ok(Normal { num, den: merged })
    }

    /// Deterministic sample value of a polynomial: each symbol sits at the
    /// midpoint of its declared range, derivative markers at a fixed generic
    /// value.  `None` when the value is undefined or too close to zero to
    /// trust its sign.
    fn midpoint_value(&self, p: &Poly) -> Option<f64> {
        let ast = p.to_ast();
        let mut syms = std::collections::BTreeSet::new();
        ast.symbols(&mut syms);
        let mut env = crate::numeric::NumEnv::new();
        for n in syms {
            if n.as_str() == PI {
                continue;
            }
            let (lo, hi) = self
                .ctx
                .info(&n)
                .map(|i| i.sample_range)
                .unwrap_or((0.15, 1.85));
            env.set(n.as_str(), 0.5 * (lo + hi));
        }
        let mut markers = std::collections::BTreeSet::new();
        crate::numeric::collect_markers(&ast, &mut markers);
        for m in markers {
            env.markers.insert(m, 0.754877666);
        }
        match crate::numeric::eval(&ast, &env) {
            Ok(v) if v.is_finite() && v.abs() > 1e-9 => Some(v),
            _ => None,
        }
    }

    /// One sign convention shared by denominator factors and radicands, so
    /// that `p` and `-p` never coexist as distinct bases: flip when the
    /// midpoint value is negative, falling back to the sign of the leading
    /// coefficient when no numeric sign is available.
    fn canonical_flip(&self, p: &Poly) -> bool {
        match self.midpoint_value(p) {
            Some(v) => v < 0.0,
            None => p.leading().map(|(_, c)| c.is_negative()).unwrap_or(false),
        }
    }

    /// Inserts one denominator factor, extracting content so that factors
    /// stay primitive, exponential-free, and radical-free.
    fn den_push(
        &self,
        den: &mut Vec<(Poly, u32)>,
        num: &mut Poly,
        factor: Poly,
        power: u32,
    ) -> Result<()> {
        if factor.is_zero() {
            return Err(Error::DivisionByZero(factor.to_ast().to_string()));
        }
        if factor.is_one() {
            return Ok(());
        }
        let (c, content_pp) = factor.content();
        let mut prim = Poly::zero();
        for (pp, k) in &factor.0 {
            let mut m = pp.0.clone();
            for (b, e) in &content_pp.0 {
                let cur = m.get_mut(b).expect("content divides monomial");
                *cur -= e;
                if cur.is_zero() {
                    m.remove(b);
                }
            }
            prim.insert(Pp(m), k.clone() / c.clone());
        }
        // numeric content: divide the numerator by c^power.
        if !c.is_one() {
            let mut scale = Rat::one();
            for _ in 0..power {
                scale /= c.clone();
            }
            *num = num.scale(&scale);
        }
        // content entries
        for (b, e) in content_pp.0 {
            let total = e * rat_int(power as i64);
            match b {
                Base::Atom(Expr::Fun(Fun::Exp, a)) => {
                    // 1/exp(a)^t = exp(-t a)
                    let an = self.normalize(&a)?;
                    let scaled = self.nmul(&an, &Normal::constant(-total))?;
                    let inv = self.atom_fun(Fun::Exp, &scaled)?;
                    *num = self.poly_mul(num, &self.normal_to_poly_guard(&inv)?)?;
                }
                Base::Atom(Expr::Num(v)) => {
                    // numeric powers invert exactly, formal units included
                    let inv = self.rat_pow(&v, &-total)?;
                    *num = self.poly_mul(num, &self.normal_to_poly_guard(&inv)?)?;
                }
                Base::Atom(atom) => {
                    let int_part = total.floor();
                    let frac = total.clone() - int_part.clone();
                    let ip = int_part.to_integer().to_u32().unwrap_or(0);
                    if ip > 0 {
                        let f = Poly(
                            std::iter::once((
                                Pp::single(Base::Atom(atom.clone()), Rat::one()),
                                Rat::one(),
                            ))
                            .collect(),
                        );
                        push_factor(den, f, ip);
                    }
                    if !frac.is_zero() {
                        // 1/a^f = a^(1-f)/a
                        let mut m = Poly::zero();
                        m.insert(
                            Pp::single(Base::Atom(atom.clone()), Rat::one() - frac),
                            Rat::one(),
                        );
                        *num = self.poly_mul(num, &m)?;
                        let f = Poly(
                            std::iter::once((
                                Pp::single(Base::Atom(atom), Rat::one()),
                                Rat::one(),
                            ))
                            .collect(),
                        );
                        push_factor(den, f, 1);
                    }
                }
                Base::Rad(p) => {
                    let int_part = total.floor();
                    let frac = total.clone() - int_part.clone();
                    let ip = int_part.to_integer().to_u32().unwrap_or(0);
                    if ip > 0 {
                        push_factor(den, p.clone(), ip);
                    }
                    if !frac.is_zero() {
                        let mut m = Poly::zero();
                        m.insert(
                            Pp::single(Base::Rad(p.clone()), Rat::one() - frac),
                            Rat::one(),
                        );
                        *num = self.poly_mul(num, &m)?;
                        push_factor(den, p, 1);
                    }
                }
            }
        }
        if prim.is_one() {
            return Ok(());
        }
        // sign canonicalization
        let prim = if self.canonical_flip(&prim) {
            if power % 2 == 1 {
                *num = num.neg();
            }
            prim.neg()
        } else {
            prim
        };
        push_factor(den, prim, power);
        Ok(())
    }

    pub fn nadd(&self, a: &Normal, b: &Normal) -> Result<Normal> {
        if a.is_zero() {
            return Ok(b.clone());
        }
        if b.is_zero() {
            return Ok(a.clone());
        }
        // common denominator: union with max powers
        let mut common: Vec<(Poly, u32)> = a.den.clone();
        for (f, k) in &b.den {
            match common.iter_mut().find(|(g, _)| g == f) {
                Some(slot) => slot.1 = slot.1.max(*k),
                None => common.push((f.clone(), *k)),
            }
        }
        let mut na = a.num.clone();
        let mut nb = b.num.clone();
        for (f, k) in &common {
            let ka = a.den.iter().find(|(g, _)| g == f).map(|(_, k)| *k).unwrap_or(0);
            let kb = b.den.iter().find(|(g, _)| g == f).map(|(_, k)| *k).unwrap_or(0);
            for _ in 0..(k - ka) {
                na = self.poly_mul(&na, f)?;
            }
            for _ in 0..(k - kb) {
                nb = self.poly_mul(&nb, f)?;
            }
        }
        self.make(na.add(&nb), common)
    }

    pub fn nmul(&self, a: &Normal, b: &Normal) -> Result<Normal> {
        if a.is_zero() || b.is_zero() {
            return Ok(Normal::zero());
        }
        let num = self.poly_mul(&a.num, &b.num)?;
        let mut den = a.den.clone();
        for (f, k) in &b.den {
            push_factor(&mut den, f.clone(), *k);
        }
        self.make(num, den)
    }

    pub fn nrecip(&self, a: &Normal) -> Result<Normal> {
        if a.is_zero() {
            return Err(Error::DivisionByZero("0".into()));
        }
        // old denominator becomes the numerator
        let mut num = Poly::one();
        for (f, k) in &a.den {
            for _ in 0..*k {
                num = self.poly_mul(&num, f)?;
            }
        }
        self.make(num, vec![(a.num.clone(), 1)])
    }

    // ---- powers -------------------------------------------------------

    pub fn npow(&self, a: &Normal, q: &Rat) -> Result<Normal> {
        if q.is_zero() {
            return Ok(Normal::one());
        }
        if a.is_zero() {
            if q.is_negative() {
                return Err(Error::DivisionByZero("0".into()));
            }
            return Ok(Normal::zero());
        }
        if q.is_one() {
            return Ok(a.clone());
        }
        // negative fractional exponents reciprocate after the root so that
        // both orders of operations pick the same radicand decomposition
        if q.is_negative() && !rat_is_int(q) {
            let pos = self.npow(a, &q.abs())?;
            return self.nrecip(&pos);
        }
        let base = if q.is_negative() { self.nrecip(a)? } else { a.clone() };
        let q = q.abs();
        if rat_is_int(&q) {
            let k = q.to_integer().to_u32().ok_or_else(|| {
                Error::Unsupported("integer exponent overflow".into())
            })?;
            let num = self.poly_pow(&base.num, k)?;
            let den = base.den.iter().map(|(f, p)| (f.clone(), p * k)).collect();
            return self.make(num, den);
        }
        // q = int + frac with frac in (0,1)
        let int_part = q.floor();
        let frac = q.clone() - int_part.clone();
        let mut result = Normal::one();
        if !int_part.is_zero() {
            let k = int_part.to_integer().to_u32().ok_or_else(|| {
                Error::Unsupported("integer exponent overflow".into())
            })?;
            let num = self.poly_pow(&base.num, k)?;
            let den = base.den.iter().map(|(f, p)| (f.clone(), p * k)).collect();
            result = self.make(num, den)?;
        }
        // fractional power of the numerator
        let num_part = self.rad_of_poly(&base.num, &frac)?;
        result = self.nmul(&result, &num_part)?;
        // fractional power of each denominator factor
        for (f, k) in &base.den {
            let g = frac.clone() * rat_int(*k as i64);
            let gi = g.floor();
            let gf = g - gi.clone();
            let mut part = Normal::one();
            if !gi.is_zero() {
                part = self.make(
                    Poly::one(),
                    vec![(f.clone(), gi.to_integer().to_u32().unwrap())],
                )?;
            }
            if !gf.is_zero() {
                // 1/f^gf = f^(1-gf) / f
                let comp = self.rad_of_poly(f, &(Rat::one() - gf))?;
                let inv = self.make(comp.num, {
                    let mut d = comp.den;
                    push_factor(&mut d, f.clone(), 1);
                    d
                })?;
                part = self.nmul(&part, &inv)?;
            }
            result = self.nmul(&result, &part)?;
        }
        Ok(result)
    }

    /// `p^f` for a polynomial and a proper fraction `f`.
    fn rad_of_poly(&self, p: &Poly, f: &Rat) -> Result<Normal> {
        if p.is_zero() {
            return Ok(Normal::zero());
        }
        if let Some(c) = p.as_constant() {
            return self.rat_pow(&c, f);
        }
        let (c, content_pp) = p.content();
        let mut prim = Poly::zero();
        for (pp, k) in &p.0 {
            let mut m = pp.0.clone();
            for (b, e) in &content_pp.0 {
                let cur = m.get_mut(b).expect("content divides monomial");
                *cur -= e;
                if cur.is_zero() {
                    m.remove(b);
                }
            }
            prim.insert(Pp(m), k.clone() / c.clone());
        }
        // radicands share the denominator-factor sign convention; a flip
        // leaves a formal (-1)^f behind
        let mut out = self.rat_pow(&c, f)?;
        if self.canonical_flip(&prim) {
            prim = prim.neg();
            out = self.nmul(&out, &self.rat_pow(&-Rat::one(), f)?)?;
        }
        for (b, e) in content_pp.0 {
            // even powers of sign-indefinite atoms do not split: (x^2)^(1/2)
            // is |x|, not x, so the pair stays bundled under the radical.
            let split_loses_branch = match &b {
                Base::Atom(atom) => {
                    rat_is_int(&e)
                        && num::Integer::is_even(&e.to_integer())
                        && !{
                            let t = e.clone() * f.clone();
                            rat_is_int(&t) && num::Integer::is_even(&t.to_integer())
                        }
                        && !self.ctx.is_positive(atom)
                }
                Base::Rad(_) => false,
            };
            if split_loses_branch {
                let inner = Poly(
                    std::iter::once((Pp::single(b.clone(), e.clone()), Rat::one())).collect(),
                );
                let mono = Poly(
                    std::iter::once((Pp::single(Base::Rad(inner), f.clone()), Rat::one()))
                        .collect(),
                );
                out = self.nmul(&out, &self.make(mono, vec![])?)?;
                continue;
            }
            let part = self.base_pow(b, &(e * f.clone()))?;
            out = self.nmul(&out, &part)?;
        }
        if !prim.is_one() {
            let mono = Poly(
                std::iter::once((Pp::single(Base::Rad(prim), f.clone()), Rat::one())).collect(),
            );
            out = self.nmul(&out, &self.make(mono, vec![])?)?;
        }
        Ok(out)
    }

    /// `b^e` for a single base with an arbitrary positive rational exponent,
    /// honoring the branch gate for even powers of sign-indefinite atoms.
    fn base_pow(&self, b: Base, e: &Rat) -> Result<Normal> {
        if e.is_zero() {
            return Ok(Normal::one());
        }
        match &b {
            Base::Atom(Expr::Fun(Fun::Exp, a)) => {
                let an = self.normalize(a)?;
                let scaled = self.nmul(&an, &Normal::constant(e.clone()))?;
                self.atom_fun(Fun::Exp, &scaled)
            }
            Base::Atom(atom) => {
                let mono = Poly(
                    std::iter::once((Pp::single(Base::Atom(atom.clone()), e.clone()), Rat::one()))
                        .collect(),
                );
                self.make(mono, vec![])
            }
            Base::Rad(p) => {
                // exponent may reach or exceed 1: expand the integer part
                let gi = e.floor();
                let gf = e.clone() - gi.clone();
                let mut out = Normal::one();
                if !gi.is_zero() {
                    let k = gi.to_integer().to_u32().unwrap();
                    out = self.make(self.poly_pow(p, k)?, vec![])?;
                }
                if !gf.is_zero() {
                    let mono = Poly(
                        std::iter::once((Pp::single(Base::Rad(p.clone()), gf), Rat::one()))
                            .collect(),
                    );
                    out = self.nmul(&out, &self.make(mono, vec![])?)?;
                }
                Ok(out)
            }
        }
    }

    /// Exact rational power `c^f`, extracting perfect roots and keeping the
    /// irrational remainder as a numeric radicand atom.  Negative bases split
    /// into `|c|^f * (-1)^f` with the unit handled by `unit_pow`.
    fn rat_pow(&self, c: &Rat, f: &Rat) -> Result<Normal> {
        if c.is_zero() {
            if f.is_negative() {
                return Err(Error::DivisionByZero("0".into()));
            }
            return Ok(Normal::zero());
        }
        let mut out = Normal::one();
        let cabs = if c.is_negative() {
            out = self.unit_pow(f)?;
            -c.clone()
        } else {
            c.clone()
        };
        if cabs.is_one() {
            return Ok(out);
        }
        let p = f.numer().to_i64().ok_or_else(|| Error::Unsupported("exponent overflow".into()))?;
        let q = f.denom().to_u32().ok_or_else(|| Error::Unsupported("exponent overflow".into()))?;
        let v = rat_int_pow(&cabs, p)?;
        let (rn, restn) = int_root_split(v.numer(), q);
        let (rd, restd) = int_root_split(v.denom(), q);
        let mut root = Rat::new(rn, rd);
        let mut radicand = restn.clone();
        if !restd.is_one() {
            // rationalize: (a/b)^(1/q) = (a b^(q-1))^(1/q) / b
            let mut scale = BigInt::one();
            for _ in 0..(q - 1) {
                scale *= &restd;
            }
            radicand *= scale;
            root /= Rat::from_integer(restd);
        }
        let mut pos = Normal::constant(root);
        if !radicand.is_one() {
            let mono = Poly(
                std::iter::once((
                    Pp::single(
                        Base::Atom(Expr::Num(Rat::from_integer(radicand))),
                        rat(1, q as i64),
                    ),
                    Rat::one(),
                ))
                .collect(),
            );
            pos = self.nmul(&pos, &self.make(mono, vec![])?)?;
        }
        self.nmul(&out, &pos)
    }

    /// `(-1)^f`.  Exact for exponents with odd denominator (real odd roots);
    /// otherwise a formal unit atom with the exponent reduced mod 2, so that
    /// `(-1)^(1/2) * (-1)^(1/2) = -1` and `1/(-1)^(1/2) = -(-1)^(1/2)`.
    fn unit_pow(&self, f: &Rat) -> Result<Normal> {
        use num::Integer;
        if rat_is_int(f) {
            let neg = f.to_integer().is_odd();
            return Ok(Normal::constant(if neg { -Rat::one() } else { Rat::one() }));
        }
        if f.denom().is_odd() {
            let neg = f.numer().is_odd();
            return Ok(Normal::constant(if neg { -Rat::one() } else { Rat::one() }));
        }
        let two = rat_int(2);
        let g = f - (f / &two).floor() * &two;
        let gi = g.floor();
        let gf = g - gi.clone();
        let sign = if gi.to_integer().is_odd() { -Rat::one() } else { Rat::one() };
        let mono = Poly(
            std::iter::once((Pp::single(Base::Atom(Expr::int(-1)), gf), sign)).collect(),
        );
        self.make(mono, vec![])
    }

    // ---- atoms ---------------------------------------------------------

    /// Canonical atom for an elementary function applied to a normalized
    /// argument; applies exact tables and parity/shift normalizations.
    pub fn atom_fun(&self, f: Fun, arg: &Normal) -> Result<Normal> {
        match f {
            Fun::Exp => self.atom_exp(arg),
            Fun::Ln => self.atom_ln(arg),
            Fun::Sin | Fun::Cos => self.atom_trig(f, arg),
        }
    }

    fn atom_exp(&self, arg: &Normal) -> Result<Normal> {
        if arg.is_zero() {
            return Ok(Normal::one());
        }
        // pull out rational multiples of logarithms of positive quantities
        let mut remainder = Poly::zero();
        let mut out = Normal::one();
        if arg.den.is_empty() {
            for (pp, c) in &arg.num.0 {
                let mut handled = false;
                if pp.0.len() == 1 {
                    if let Some((Base::Atom(Expr::Fun(Fun::Ln, v)), e)) = pp.0.iter().next() {
                        if e.is_one() && self.ctx.is_positive(v) {
                            let vn = self.normalize(v)?;
                            out = self.nmul(&out, &self.npow(&vn, c)?)?;
                            handled = true;
                        }
                    }
                }
                if !handled {
                    remainder.insert(pp.clone(), c.clone());
                }
            }
        } else {
            remainder = arg.num.clone();
        }
        let rest = Normal { num: remainder, den: arg.den.clone() };
        if rest.is_zero() {
            return Ok(out);
        }
        let atom = Expr::exp(rest.to_ast());
        let mono = Poly(
            std::iter::once((Pp::single(Base::Atom(atom), Rat::one()), Rat::one())).collect(),
        );
        self.nmul(&out, &self.make(mono, vec![])?)
    }

    fn atom_ln(&self, arg: &Normal) -> Result<Normal> {
        if arg.is_zero() {
            return Err(Error::Domain("ln(0)".into()));
        }
        let ast = arg.to_ast();
        if let Expr::Num(r) = &ast {
            if r.is_negative() {
                return Err(Error::Domain(format!("ln({})", r)));
            }
            if r.is_one() {
                return Ok(Normal::zero());
            }
        }
        // ln(exp(u)) -> u
        if let Expr::Fun(Fun::Exp, u) = &ast {
            return self.normalize(u);
        }
        let mono = Poly(
            std::iter::once((Pp::single(Base::Atom(Expr::ln(ast)), Rat::one()), Rat::one()))
                .collect(),
        );
        self.make(mono, vec![])
    }

    fn atom_trig(&self, f: Fun, arg: &Normal) -> Result<Normal> {
        // extract the rational multiple of pi from the argument
        let mut shift = Rat::zero();
        let mut rest = Poly::zero();
        if arg.den.is_empty() {
            for (pp, c) in &arg.num.0 {
                let is_pi = pp.0.len() == 1
                    && matches!(
                        pp.0.iter().next(),
                        Some((Base::Atom(Expr::Sym(n)), e)) if n.as_str() == PI && e.is_one()
                    );
                if is_pi {
                    shift = c.clone();
                } else {
                    rest.insert(pp.clone(), c.clone());
                }
            }
        } else {
            rest = arg.num.clone();
        }
        // reduce the shift modulo 2 and keep only quarter-turn multiples
        let two = rat_int(2);
        let mut s = shift.clone() - (shift.clone() / two.clone()).floor() * two.clone();
        if s.is_negative() {
            s += two.clone();
        }
        let quarter = s.clone() * rat_int(2); // in units of pi/2
        let (f, mut sign, shift_handled) = if rat_is_int(&quarter) {
            let q = (quarter.to_integer().to_i64().unwrap()).rem_euclid(4);
            // sin(u + q*pi/2), cos(u + q*pi/2) tables
            match (f, q) {
                (g, 0) => (g, Rat::one(), true),
                (Fun::Sin, 1) => (Fun::Cos, Rat::one(), true),
                (Fun::Sin, 2) => (Fun::Sin, -Rat::one(), true),
                (Fun::Sin, 3) => (Fun::Cos, -Rat::one(), true),
                (Fun::Cos, 1) => (Fun::Sin, -Rat::one(), true),
                (Fun::Cos, 2) => (Fun::Cos, -Rat::one(), true),
                (Fun::Cos, 3) => (Fun::Sin, Rat::one(), true),
                (g, _) => (g, Rat::one(), true),
            }
        } else {
            (f, Rat::one(), false)
        };
        if !shift_handled {
            // put the shift back
            let mut pi_mono = Poly::zero();
            pi_mono.insert(Pp::single(Base::Atom(Expr::pi()), Rat::one()), shift);
            rest = rest.add(&pi_mono);
        }
        let rest_n = Normal { num: rest, den: arg.den.clone() };
        if rest_n.is_zero() {
            let v = match f {
                Fun::Sin => Rat::zero(),
                Fun::Cos => Rat::one(),
                _ => unreachable!(),
            };
            return Ok(Normal::constant(v * sign));
        }
        // parity: flip the sign of the argument if its leading term is negative
        let mut ast = rest_n.to_ast();
        let neg_arg = leading_negative(&ast);
        if neg_arg {
            let negn = self.nmul(&rest_n, &Normal::constant(-Rat::one()))?;
            ast = negn.to_ast();
            if f == Fun::Sin {
                sign = -sign;
            }
        }
        let atom = Expr::fun(f, ast);
        let mono = Poly(
            std::iter::once((Pp::single(Base::Atom(atom), Rat::one()), sign)).collect(),
        );
        self.make(mono, vec![])
    }

    // ---- entry point -----------------------------------------------------

    pub fn normalize(&self, e: &Expr) -> Result<Normal> {
        match e {
            Expr::Num(c) => Ok(Normal::constant(c.clone())),
            Expr::Sym(n) => {
                let mono = Poly(
                    std::iter::once((
                        Pp::single(Base::Atom(Expr::Sym(n.clone())), Rat::one()),
                        Rat::one(),
                    ))
                    .collect(),
                );
                self.make(mono, vec![])
            }
            Expr::Der { .. } => {
                let mono = Poly(
                    std::iter::once((Pp::single(Base::Atom(e.clone()), Rat::one()), Rat::one()))
                        .collect(),
                );
                self.make(mono, vec![])
            }
            Expr::Add(ts) => {
                let mut acc = Normal::zero();
                for t in ts {
                    let tn = self.normalize(t)?;
                    acc = self.nadd(&acc, &tn)?;
                }
                Ok(acc)
            }
            Expr::Mul(fs) => {
                let mut acc = Normal::one();
                for t in fs {
                    if acc.is_zero() {
                        // still normalize the remaining factors to surface errors
                        self.normalize(t)?;
                        continue;
                    }
                    let tn = self.normalize(t)?;
                    acc = self.nmul(&acc, &tn)?;
                }
                Ok(acc)
            }
            Expr::Pow(b, q) => {
                // syntactic products and powers distribute before the base
                // is expanded, so radicals keep their factored shape
                match b.as_ref() {
                    Expr::Mul(fs) if !rat_is_int(q) => {
                        let mut acc = Normal::one();
                        for f in fs {
                            let part =
                                self.normalize(&Expr::Pow(Box::new(f.clone()), q.clone()))?;
                            acc = self.nmul(&acc, &part)?;
                        }
                        Ok(acc)
                    }
                    Expr::Pow(inner, p) if !rat_is_int(q) => {
                        // (x^p)^q combines only when the branch is safe
                        let combined = p.clone() * q.clone();
                        let even_p = rat_is_int(p)
                            && num::Integer::is_even(&p.to_integer());
                        if !even_p || self.ctx.is_positive(inner) {
                            self.normalize(&Expr::Pow(inner.clone(), combined))
                        } else {
                            let bn = self.normalize(b)?;
                            self.npow(&bn, q)
                        }
                    }
                    _ => {
                        let bn = self.normalize(b)?;
                        self.npow(&bn, q)
                    }
                }
            }
            Expr::Fun(f, a) => {
                let an = self.normalize(a)?;
                self.atom_fun(*f, &an)
            }
        }
    }
}

/// Expands and recombines over a common denominator; proves identities such
/// as `sin(x)^2 + cos(x)^2 -> 1` by construction.
pub fn simplify(e: &Expr, ctx: &Context) -> Result<Expr> {
    Ok(Nc::new(ctx).normalize(e)?.to_ast())
}

/// Symbolic zero test: the normalized numerator is empty.
pub fn is_zero_sym(e: &Expr, ctx: &Context) -> Result<bool> {
    Ok(Nc::new(ctx).normalize(e)?.is_zero())
}

/// Distinct denominator factors of the normal form, as expression trees.
/// Multiplicities are dropped: callers only care where a quotient can blow up.
pub fn denominator_factors(e: &Expr, ctx: &Context) -> Result<Vec<Expr>> {
    let n = Nc::new(ctx).normalize(e)?;
    Ok(n.den.iter().map(|(f, _)| f.to_ast()).collect())
}

fn pert_degree(pp: &Pp, ctx: &Context) -> Rat {
    let mut d = Rat::zero();
    for (b, e) in &pp.0 {
        let hit = match b {
            Base::Atom(Expr::Sym(n)) => ctx.is_perturbation(n),
            Base::Atom(Expr::Der { f, .. }) => ctx.is_perturbation(f),
            _ => false,
        };
        if hit {
            d += e;
        }
    }
    d
}

fn truncate_linear(p: &Poly, ctx: &Context) -> Poly {
    Poly(
        p.0.iter()
            .filter(|(pp, _)| pert_degree(pp, ctx) < rat_int(2))
            .map(|(pp, c)| (pp.clone(), c.clone()))
            .collect(),
    )
}

/// Drops every term of combined degree two or higher in the symbols and
/// function markers carrying the `Perturbation` assumption.  Denominators
/// containing perturbations are expanded as `1/(d0 + d1) -> (1 - d1/d0)/d0`.
/// Perturbations must enter polynomially (not inside function arguments).
pub fn linearize(e: &Expr, ctx: &Context) -> Result<Expr> {
    let nc = Nc::new(ctx);
    let n = nc.normalize(e)?;
    let mut out = Normal { num: truncate_linear(&n.num, ctx), den: Vec::new() };
    for (f, k) in &n.den {
        let mut d0 = Poly::zero();
        let mut d1 = Poly::zero();
        for (pp, c) in &f.0 {
            let deg = pert_degree(pp, ctx);
            if deg.is_zero() {
                d0.insert(pp.clone(), c.clone());
            } else if deg < rat_int(2) {
                d1.insert(pp.clone(), c.clone());
            }
        }
        if d1.is_zero() {
            out = nc.nmul(&out, &nc.make(Poly::one(), vec![(f.clone(), *k)])?)?;
            continue;
        }
        if d0.is_zero() {
            return Err(Error::Unsupported(
                "denominator vanishes at zeroth perturbative order".into(),
            ));
        }
        let d0n = Normal { num: d0, den: Vec::new() };
        let d1n = Normal { num: d1, den: Vec::new() };
        let inv0 = nc.make(Poly::one(), vec![(f_zeroth(&d0n), *k)])?;
        let ratio = nc.nmul(&d1n, &nc.nrecip(&d0n)?)?;
        let corr = nc.nadd(
            &Normal::one(),
            &nc.nmul(&Normal::constant(-rat_int(*k as i64)), &ratio)?,
        )?;
        out = nc.nmul(&out, &nc.nmul(&inv0, &corr)?)?;
    }
    let fin = Normal { num: truncate_linear(&out.num, ctx), den: out.den };
    Ok(fin.to_ast())
}

fn f_zeroth(d0: &Normal) -> Poly {
    d0.num.clone()
}

fn push_factor(den: &mut Vec<(Poly, u32)>, f: Poly, k: u32) {
    if f.is_one() || k == 0 {
        return;
    }
    match den.iter_mut().find(|(g, _)| *g == f) {
        Some(slot) => slot.1 += k,
        None => den.push((f, k)),
    }
}

/// True when the additive leading term carries a negative coefficient.
fn leading_negative(e: &Expr) -> bool {
    match e {
        Expr::Num(r) => r.is_negative(),
        Expr::Add(ts) => ts.first().map(leading_negative).unwrap_or(false),
        Expr::Mul(fs) => fs
            .iter()
            .find_map(|f| match f {
                Expr::Num(r) => Some(r.is_negative()),
                _ => None,
            })
            .unwrap_or(false),
        _ => false,
    }
}

fn rat_int_pow(c: &Rat, p: i64) -> Result<Rat> {
    let mut out = Rat::one();
    let base = if p < 0 {
        if c.is_zero() {
            return Err(Error::DivisionByZero("0".into()));
        }
        Rat::one() / c.clone()
    } else {
        c.clone()
    };
    for _ in 0..p.unsigned_abs() {
        out *= base.clone();
    }
    Ok(out)
}

/// Splits `n = r^q * rest` with the largest extractable `r` found by exact
/// root search plus small-prime trial division.
fn int_root_split(n: &BigInt, q: u32) -> (BigInt, BigInt) {
    let n = n.clone();
    if n.is_one() || n.is_zero() {
        return (n, BigInt::one());
    }
    // exact root?
    let r = n.nth_root(q);
    if num_traits::pow::Pow::pow(&r, q) == n {
        return (r, BigInt::one());
    }
    // extract small prime powers
    let mut rest = n;
    let mut root = BigInt::one();
    let mut p = BigInt::from(2u32);
    while &p * &p <= rest && p < BigInt::from(1000u32) {
        let mut count = 0u32;
        while (&rest % &p).is_zero() {
            rest /= &p;
            count += 1;
        }
        if count >= q {
            for _ in 0..(count / q) {
                root *= &p;
            }
        }
        let back = count % q;
        for _ in 0..back {
            rest *= &p;
        }
        p += 1u32;
    }
    (root, rest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::{Assumption, Context};
    use crate::parse::parse;

    fn ctx() -> Context {
        let mut c = Context::new();
        for v in ["x", "y", "r", "theta", "t"] {
            c.coordinate(v);
        }
        for p in ["a", "b", "m", "n"] {
            c.parameter(p);
        }
        c.assume("r", Assumption::Positive);
        c.assume("n", Assumption::Positive);
        c
    }

    fn s(src: &str, c: &Context) -> String {
        simplify(&parse(src, c).unwrap(), c).unwrap().to_string()
    }

    #[test]
    fn pythagorean_identity_collapses() {
        let c = ctx();
        assert_eq!(s("sin(x)^2 + cos(x)^2", &c), "1");
        assert_eq!(s("sin(x)^4 - (1 - cos(x)^2)^2", &c), "0");
    }

    #[test]
    fn rational_cancellation() {
        let c = ctx();
        assert_eq!(s("((r-a)*(r-b))/(r-b)", &c), s("r-a", &c));
        assert_eq!(s("(x^2 - y^2)/(x + y)", &c), s("x - y", &c));
        assert_eq!(s("1/x + 1/y - (x+y)/(x*y)", &c), "0");
    }

    #[test]
    fn exponentials_merge() {
        let c = ctx();
        assert_eq!(s("exp(x)*exp(-x)", &c), "1");
        assert_eq!(s("exp(x)^2 * exp(-2*x)", &c), "1");
        // non-rational coefficients of ln stay inside the exponential
        assert_eq!(
            s("exp((a^2-a)*ln(r)) * exp((a-a^2)*ln(r))", &c),
            "1"
        );
    }

    #[test]
    fn logarithm_extraction_requires_positivity() {
        let c = ctx();
        assert_eq!(s("exp(2*ln(n))", &c), "n^2");
        assert_eq!(s("exp(ln(r))", &c), "r");
        // x carries no sign assumption, so exp(ln(x)) stays formal
        assert_eq!(s("exp(ln(x))", &c), "exp(ln(x))");
    }

    #[test]
    fn even_power_roots_keep_their_branch() {
        let c = ctx();
        assert_eq!(s("sqrt(x^2)", &c), "sqrt(x^2)");
        assert_eq!(s("sqrt(r^2)", &c), "r");
        // the bundled radical still squares back exactly
        assert_eq!(s("sqrt(x^2)*sqrt(x^2)", &c), "x^2");
    }

    #[test]
    fn numeric_radicals_reduce() {
        let c = ctx();
        assert_eq!(s("sqrt(8)", &c), "2*sqrt(2)");
        assert_eq!(s("sqrt(1/2)", &c), "sqrt(2)/2");
        assert_eq!(s("8^(1/3)", &c), "2");
        assert_eq!(s("sqrt(2)*sqrt(2)", &c), "2");
    }

    #[test]
    fn half_integer_exponents_cancel() {
        let c = ctx();
        assert_eq!(s("(r-b)^(3/2) / (r-b)^(1/2)", &c), s("r-b", &c));
        assert_eq!(s("sqrt(x/y)*sqrt(y/x)", &c), "1");
        assert_eq!(s("sqrt((r-a)*(r-b))*sqrt((r-a)*(r-b))", &c), s("(r-a)*(r-b)", &c));
    }

    #[test]
    fn trig_shifts_and_parity() {
        let c = ctx();
        assert_eq!(s("sin(x + pi)", &c), "-sin(x)");
        assert_eq!(s("cos(x + pi)", &c), "-cos(x)");
        assert_eq!(s("sin(x + pi/2)", &c), "cos(x)");
        assert_eq!(s("sin(pi/2 - x)", &c), "cos(x)");
        assert_eq!(s("sin(0 - x) + sin(x)", &c), "0");
        assert_eq!(s("cos(0 - x)", &c), "cos(x)");
        assert_eq!(s("sin(2*pi)", &c), "0");
        assert_eq!(s("cos(pi)", &c), "-1");
        // no table entry below quarter turns
        assert_eq!(s("sin(pi/3)", &c), "sin(pi/3)");
    }

    #[test]
    fn division_by_symbolic_zero_is_reported() {
        let c = ctx();
        let e = parse("1/(x - x)", &c).unwrap();
        assert!(matches!(simplify(&e, &c), Err(Error::DivisionByZero(_))));
    }

    #[test]
    fn linearize_drops_second_order() {
        let mut c = ctx();
        c.parameter("eps");
        c.assume("eps", Assumption::Perturbation);
        let e = parse("(1 + eps)^2", &c).unwrap();
        assert_eq!(linearize(&e, &c).unwrap().to_string(), "2*eps + 1");
        let d = parse("1/(1 + eps)", &c).unwrap();
        assert_eq!(linearize(&d, &c).unwrap().to_string(), "-eps + 1");
        let m = parse("x/(x - 2*eps)", &c).unwrap();
        // x/(x-2e) = 1 + 2e/x + O(e^2)
        let lin = linearize(&m, &c).unwrap();
        let want = parse("1 + 2*eps/x", &c).unwrap();
        let diff = Expr::sub(lin, want);
        assert!(is_zero_sym(&diff, &c).unwrap());
    }

    #[test]
    fn normalize_is_idempotent_on_worked_forms() {
        let c = ctx();
        for src in [
            "((r-a)*(r-b))/(r-b)",
            "sqrt(x/y)*sqrt(y/x)",
            "sin(x)^2 + cos(x)^2 + exp(2*ln(n))",
            "(x + y)^3/(x*y - 1)",
            "sqrt(8)*sqrt(x^2)",
        ] {
            let e = parse(src, &c).unwrap();
            let once = simplify(&e, &c).unwrap();
            let twice = simplify(&once, &c).unwrap();
            assert_eq!(once, twice, "not idempotent on {}", src);
        }
    }
}
