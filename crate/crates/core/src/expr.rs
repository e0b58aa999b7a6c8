//! Immutable expression trees with exact rational coefficients.
//!
//! An `Expr` is an ordinary syntax tree; the canonical (normal) form is
//! produced by `simplify` in the `normal` module.  Construction helpers here
//! perform no rewriting beyond trivial flattening, so tests can build raw
//! trees and compare normal forms.

use num::BigRational;
use num::bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::sync::Arc;

pub type Rat = BigRational;

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

pub fn rat_is_int(r: &Rat) -> bool {
    r.denom().is_one()
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

/// Interned symbol name.  Identity is the spelled name, which keeps
/// expressions independent of any particular context instance.
#[derive(Clone)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: &str) -> Self {
        Name(Arc::from(s))
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl PartialEq for Name {
    fn eq(&self, other: &Self) -> bool {
        self.0.as_ref() == other.0.as_ref()
    }
}
impl Eq for Name {}
impl PartialOrd for Name {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Name {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.as_ref().cmp(other.0.as_ref())
    }
}
impl std::hash::Hash for Name {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.as_ref().hash(state)
    }
}
impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

/// Built-in elementary functions.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Fun {
    Sin,
    Cos,
    Exp,
    Ln,
}

impl Fun {
    pub fn name(&self) -> &'static str {
        match self {
            Fun::Sin => "sin",
            Fun::Cos => "cos",
            Fun::Exp => "exp",
            Fun::Ln => "ln",
        }
    }
}

/// Expression tree.  `Pow` exponents are exact rationals; symbolic exponents
/// are expressed through `exp`/`ln`.  `Der` is an unknown scalar function of
/// declared coordinates together with a partial-derivative multi-index; the
/// all-zero multi-index is the function itself.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Expr {
    Num(Rat),
    Sym(Name),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Box<Expr>, Rat),
    Fun(Fun, Box<Expr>),
    Der {
        f: Name,
        args: Vec<Name>,
        orders: Vec<u32>,
    },
}

pub const PI: &str = "pi";

impl Expr {
    pub fn zero() -> Expr {
        Expr::Num(Rat::zero())
    }
    pub fn one() -> Expr {
        Expr::Num(Rat::one())
    }
    pub fn int(n: i64) -> Expr {
        Expr::Num(rat_int(n))
    }
    pub fn num(r: Rat) -> Expr {
        Expr::Num(r)
    }
    pub fn sym(name: &str) -> Expr {
        Expr::Sym(Name::new(name))
    }
    pub fn pi() -> Expr {
        Expr::sym(PI)
    }

    pub fn is_zero_lit(&self) -> bool {
        matches!(self, Expr::Num(r) if r.is_zero())
    }
    pub fn is_one_lit(&self) -> bool {
        matches!(self, Expr::Num(r) if r.is_one())
    }

    pub fn add(terms: Vec<Expr>) -> Expr {
        let mut out = Vec::new();
        for t in terms {
            match t {
                Expr::Add(v) => out.extend(v),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::Add(out),
        }
    }

    pub fn mul(factors: Vec<Expr>) -> Expr {
        let mut out = Vec::new();
        for t in factors {
            match t {
                Expr::Mul(v) => out.extend(v),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Expr::one(),
            1 => out.pop().unwrap(),
            _ => Expr::Mul(out),
        }
    }

    pub fn neg(self) -> Expr {
        Expr::mul(vec![Expr::int(-1), self])
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::add(vec![a, b.neg()])
    }

    pub fn powr(base: Expr, e: Rat) -> Expr {
        if e.is_one() {
            base
        } else {
            Expr::Pow(Box::new(base), e)
        }
    }

    pub fn powi(base: Expr, e: i64) -> Expr {
        Expr::powr(base, rat_int(e))
    }

    pub fn sqrt(base: Expr) -> Expr {
        Expr::powr(base, rat(1, 2))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::mul(vec![a, Expr::powi(b, -1)])
    }

    pub fn fun(f: Fun, arg: Expr) -> Expr {
        Expr::Fun(f, Box::new(arg))
    }
    pub fn sin(arg: Expr) -> Expr {
        Expr::fun(Fun::Sin, arg)
    }
    pub fn cos(arg: Expr) -> Expr {
        Expr::fun(Fun::Cos, arg)
    }
    pub fn exp(arg: Expr) -> Expr {
        Expr::fun(Fun::Exp, arg)
    }
    pub fn ln(arg: Expr) -> Expr {
        Expr::fun(Fun::Ln, arg)
    }

    /// Unknown function value (all derivative orders zero).
    pub fn ufun(f: &str, args: &[&str]) -> Expr {
        Expr::Der {
            f: Name::new(f),
            args: args.iter().map(|a| Name::new(a)).collect(),
            orders: vec![0; args.len()],
        }
    }

    pub fn der(f: &str, args: &[&str], orders: &[u32]) -> Expr {
        assert_eq!(args.len(), orders.len());
        Expr::Der {
            f: Name::new(f),
            args: args.iter().map(|a| Name::new(a)).collect(),
            orders: orders.to_vec(),
        }
    }

    /// Collects every symbol and unknown-function name occurring in the tree.
    pub fn symbols(&self, out: &mut std::collections::BTreeSet<Name>) {
        match self {
            Expr::Num(_) => {}
            Expr::Sym(n) => {
                out.insert(n.clone());
            }
            Expr::Add(v) | Expr::Mul(v) => {
                for t in v {
                    t.symbols(out);
                }
            }
            Expr::Pow(b, _) => b.symbols(out),
            Expr::Fun(_, a) => a.symbols(out),
            Expr::Der { f, args, .. } => {
                out.insert(f.clone());
                for a in args {
                    out.insert(a.clone());
                }
            }
        }
    }

    /// True when the tree mentions the given symbol (as a symbol or as an
    /// unknown-function argument).
    pub fn mentions(&self, name: &Name) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Sym(n) => n == name,
            Expr::Add(v) | Expr::Mul(v) => v.iter().any(|t| t.mentions(name)),
            Expr::Pow(b, _) => b.mentions(name),
            Expr::Fun(_, a) => a.mentions(name),
            Expr::Der { f, args, .. } => f == name || args.iter().any(|a| a == name),
        }
    }
}

fn fmt_rat(r: &Rat) -> String {
    if rat_is_int(r) {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Derivative-marker suffix rendering.  Dots mark derivatives with respect to
/// the argument named `t` when present; primes mark derivatives with respect
/// to the single remaining argument.  Multi-indices that do not fit this
/// shape use the explicit `D(f;i,j,...)` spelling, which the parser also
/// accepts.
fn fmt_der(f: &Name, args: &[Name], orders: &[u32]) -> String {
    if orders.iter().all(|&o| o == 0) {
        return f.to_string();
    }
    let t_pos = args.iter().position(|a| a.as_str() == "t");
    let mut primes = 0u32;
    let mut dots = 0u32;
    let mut fits = true;
    let mut prime_slot: Option<usize> = None;
    for (i, &o) in orders.iter().enumerate() {
        if o == 0 {
            continue;
        }
        if Some(i) == t_pos {
            dots = o;
        } else if prime_slot.is_none() || prime_slot == Some(i) {
            prime_slot = Some(i);
            primes = o;
        } else {
            fits = false;
        }
    }
    if fits && args.len() <= 2 {
        let mut s = f.to_string();
        for _ in 0..primes {
            s.push('\'');
        }
        for _ in 0..dots {
            s.push('.');
        }
        return s;
    }
    let os: Vec<String> = orders.iter().map(|o| o.to_string()).collect();
    format!("D({};{})", f, os.join(","))
}

#[derive(PartialEq, PartialOrd)]
enum Prec {
    Sum,
    Product,
    Power,
    Atom,
}

fn needs_parens(e: &Expr, ctx: Prec) -> bool {
    let own = match e {
        Expr::Num(r) => {
            if r.is_negative() || !rat_is_int(r) {
                Prec::Sum
            } else {
                Prec::Atom
            }
        }
        Expr::Sym(_) | Expr::Fun(..) | Expr::Der { .. } => Prec::Atom,
        Expr::Add(_) => Prec::Sum,
        Expr::Mul(_) => Prec::Product,
        Expr::Pow(..) => Prec::Power,
    };
    own < ctx
}

fn fmt_prec(e: &Expr, ctx: Prec, out: &mut String) {
    if needs_parens(e, ctx) {
        out.push('(');
        fmt_expr(e, out);
        out.push(')');
    } else {
        fmt_expr(e, out);
    }
}

/// Splits a product into (sign, numerator text, denominator factors).
fn fmt_mul(factors: &[Expr], out: &mut String) {
    let mut num_parts: Vec<String> = Vec::new();
    let mut den_parts: Vec<String> = Vec::new();
    let mut neg = false;
    for f in factors {
        match f {
            Expr::Num(r) => {
                let mut r = r.clone();
                if r.is_negative() {
                    neg = !neg;
                    r = -r;
                }
                if !r.is_one() {
                    if rat_is_int(&r) {
                        num_parts.push(format!("{}", r.numer()));
                    } else {
                        if !r.numer().is_one() {
                            num_parts.push(format!("{}", r.numer()));
                        }
                        den_parts.push(format!("{}", r.denom()));
                    }
                }
            }
            Expr::Pow(b, e) if e.is_negative() => {
                let mut s = String::new();
                fmt_pow(b, &(-e.clone()), &mut s);
                den_parts.push(s);
            }
            other => {
                let mut s = String::new();
                fmt_prec(other, Prec::Product, &mut s);
                num_parts.push(s);
            }
        }
    }
    let num = if num_parts.is_empty() {
        "1".to_string()
    } else {
        num_parts.join("*")
    };
    if neg {
        out.push('-');
    }
    out.push_str(&num);
    if !den_parts.is_empty() {
        out.push('/');
        if den_parts.len() == 1 && self_delimiting(&den_parts[0]) {
            out.push_str(&den_parts[0]);
        } else {
            out.push('(');
            out.push_str(&den_parts.join("*"));
            out.push(')');
        }
    }
}

/// True when the rendered factor exposes no operator outside parentheses,
/// so it can follow a `/` without another layer of grouping.
fn self_delimiting(s: &str) -> bool {
    let mut depth = 0u32;
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            '*' | '+' | '-' | ' ' | '/' if depth == 0 => return false,
            _ => {}
        }
    }
    true
}

fn fmt_pow(base: &Expr, e: &Rat, out: &mut String) {
    if *e == rat(1, 2) {
        out.push_str("sqrt(");
        fmt_expr(base, out);
        out.push(')');
        return;
    }
    if e.is_one() {
        fmt_prec(base, Prec::Power, out);
        return;
    }
    fmt_prec(base, Prec::Atom, out);
    out.push('^');
    if rat_is_int(e) && !e.is_negative() {
        out.push_str(&fmt_rat(e));
    } else {
        out.push('(');
        out.push_str(&fmt_rat(e));
        out.push(')');
    }
}

fn fmt_expr(e: &Expr, out: &mut String) {
    match e {
        Expr::Num(r) => out.push_str(&fmt_rat(r)),
        Expr::Sym(n) => out.push_str(n.as_str()),
        Expr::Add(terms) => {
            for (i, t) in terms.iter().enumerate() {
                let (neg, body) = split_sign(t);
                if i == 0 {
                    if neg {
                        out.push('-');
                    }
                } else if neg {
                    out.push_str(" - ");
                } else {
                    out.push_str(" + ");
                }
                fmt_prec(&body, Prec::Sum, out);
                // terms after the first never print their own leading sign
            }
        }
        Expr::Mul(factors) => fmt_mul(factors, out),
        Expr::Pow(b, e) => {
            if e.is_negative() {
                out.push_str("1/");
                let mut s = String::new();
                fmt_pow(b, &(-e.clone()), &mut s);
                if s.contains('*') {
                    out.push('(');
                    out.push_str(&s);
                    out.push(')');
                } else {
                    out.push_str(&s);
                }
            } else {
                fmt_pow(b, e, out);
            }
        }
        Expr::Fun(f, a) => {
            out.push_str(f.name());
            out.push('(');
            fmt_expr(a, out);
            out.push(')');
        }
        Expr::Der { f, args, orders } => out.push_str(&fmt_der(f, args, orders)),
    }
}

/// Extracts a leading minus sign from a term for additive rendering.
fn split_sign(e: &Expr) -> (bool, Expr) {
    match e {
        Expr::Num(r) if r.is_negative() => (true, Expr::Num(-r.clone())),
        Expr::Mul(fs) => {
            if let Some(Expr::Num(r)) = fs.first() {
                if r.is_negative() {
                    let mut rest = fs.clone();
                    let nr = -r.clone();
                    if nr.is_one() && rest.len() == 2 {
                        return (true, rest.pop().unwrap());
                    }
                    rest[0] = Expr::Num(nr);
                    return (true, Expr::Mul(rest));
                }
            }
            (false, e.clone())
        }
        _ => (false, e.clone()),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        fmt_expr(self, &mut s);
        write!(f, "{}", s)
    }
}
