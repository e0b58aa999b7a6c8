//! Differentiation, substitution, and marker rewriting on expression trees.

use crate::context::Context;
use crate::error::{Error, Result};
use crate::expr::{Expr, Fun, Name, rat_int};

/// Partial derivative with respect to a declared coordinate or parameter.
/// Unknown-function markers differentiate by bumping the matching slot of
/// their multi-index; they depend on exactly their declared arguments.
pub fn differentiate(e: &Expr, v: &Name) -> Result<Expr> {
    Ok(match e {
        Expr::Num(_) => Expr::zero(),
        Expr::Sym(n) => {
            if n == v {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Add(ts) => {
            let mut out = Vec::new();
            for t in ts {
                let d = differentiate(t, v)?;
                if !d.is_zero_lit() {
                    out.push(d);
                }
            }
            Expr::add(out)
        }
        Expr::Mul(fs) => {
            let mut terms = Vec::new();
            for (i, f) in fs.iter().enumerate() {
                let d = differentiate(f, v)?;
                if d.is_zero_lit() {
                    continue;
                }
                let mut prod = vec![d];
                for (j, g) in fs.iter().enumerate() {
                    if i != j {
                        prod.push(g.clone());
                    }
                }
                terms.push(Expr::mul(prod));
            }
            Expr::add(terms)
        }
        Expr::Pow(b, q) => {
            let db = differentiate(b, v)?;
            if db.is_zero_lit() {
                return Ok(Expr::zero());
            }
            Expr::mul(vec![
                Expr::Num(q.clone()),
                Expr::powr(b.as_ref().clone(), q.clone() - rat_int(1)),
                db,
            ])
        }
        Expr::Fun(f, a) => {
            let da = differentiate(a, v)?;
            if da.is_zero_lit() {
                return Ok(Expr::zero());
            }
            let outer = match f {
                Fun::Sin => Expr::cos(a.as_ref().clone()),
                Fun::Cos => Expr::sin(a.as_ref().clone()).neg(),
                Fun::Exp => Expr::exp(a.as_ref().clone()),
                Fun::Ln => Expr::powi(a.as_ref().clone(), -1),
            };
            Expr::mul(vec![outer, da])
        }
        Expr::Der { f, args, orders } => {
            match args.iter().position(|a| a == v) {
                None => Expr::zero(),
                Some(i) => {
                    let mut o = orders.clone();
                    o[i] += 1;
                    Expr::Der { f: f.clone(), args: args.clone(), orders: o }
                }
            }
        }
    })
}

/// Replaces a symbol by an expression.  Substituting a name that appears as
/// an unknown-function argument would silently change the meaning of the
/// marker, so that case is rejected.
pub fn substitute(e: &Expr, target: &Name, replacement: &Expr) -> Result<Expr> {
    Ok(match e {
        Expr::Num(_) => e.clone(),
        Expr::Sym(n) => {
            if n == target {
                replacement.clone()
            } else {
                e.clone()
            }
        }
        Expr::Add(ts) => Expr::add(
            ts.iter().map(|t| substitute(t, target, replacement)).collect::<Result<_>>()?,
        ),
        Expr::Mul(fs) => Expr::mul(
            fs.iter().map(|t| substitute(t, target, replacement)).collect::<Result<_>>()?,
        ),
        Expr::Pow(b, q) => Expr::powr(substitute(b, target, replacement)?, q.clone()),
        Expr::Fun(f, a) => Expr::fun(*f, substitute(a, target, replacement)?),
        Expr::Der { f, args, .. } => {
            if args.iter().any(|a| a == target) {
                return Err(Error::Unsupported(format!(
                    "cannot substitute {} inside the unknown function {}",
                    target, f
                )));
            }
            e.clone()
        }
    })
}

/// Replaces every marker of the unknown function `f` by the corresponding
/// partial derivative of a concrete body written in the function's arguments.
pub fn substitute_function(e: &Expr, f: &Name, body: &Expr) -> Result<Expr> {
    Ok(match e {
        Expr::Num(_) | Expr::Sym(_) => e.clone(),
        Expr::Add(ts) => Expr::add(
            ts.iter().map(|t| substitute_function(t, f, body)).collect::<Result<_>>()?,
        ),
        Expr::Mul(fs) => Expr::mul(
            fs.iter().map(|t| substitute_function(t, f, body)).collect::<Result<_>>()?,
        ),
        Expr::Pow(b, q) => Expr::powr(substitute_function(b, f, body)?, q.clone()),
        Expr::Fun(g, a) => Expr::fun(*g, substitute_function(a, f, body)?),
        Expr::Der { f: g, args, orders } => {
            if g != f {
                return Ok(e.clone());
            }
            let mut out = body.clone();
            for (arg, &o) in args.iter().zip(orders.iter()) {
                for _ in 0..o {
                    out = differentiate(&out, arg)?;
                }
            }
            out
        }
    })
}

/// One directed rewrite: a marker of `f` at multi-index `orders` (and any
/// higher derivative of it) is replaced by the matching derivative of `rhs`.
#[derive(Clone, Debug)]
pub struct MarkerRule {
    pub f: Name,
    pub orders: Vec<u32>,
    pub rhs: Expr,
}

impl MarkerRule {
    /// Builds a rule from a marker expression; panics on non-markers, which
    /// only happens on programmer error in case definitions.
    pub fn new(pattern: &Expr, rhs: Expr) -> MarkerRule {
        match pattern {
            Expr::Der { f, orders, .. } => {
                MarkerRule { f: f.clone(), orders: orders.clone(), rhs }
            }
            _ => panic!("marker rule pattern must be a derivative marker"),
        }
    }
}

fn apply_rules_once(e: &Expr, rules: &[MarkerRule]) -> Result<(Expr, bool)> {
    Ok(match e {
        Expr::Num(_) | Expr::Sym(_) => (e.clone(), false),
        Expr::Add(ts) => {
            let mut changed = false;
            let mut out = Vec::with_capacity(ts.len());
            for t in ts {
                let (r, c) = apply_rules_once(t, rules)?;
                changed |= c;
                out.push(r);
            }
            (Expr::add(out), changed)
        }
        Expr::Mul(fs) => {
            let mut changed = false;
            let mut out = Vec::with_capacity(fs.len());
            for t in fs {
                let (r, c) = apply_rules_once(t, rules)?;
                changed |= c;
                out.push(r);
            }
            (Expr::mul(out), changed)
        }
        Expr::Pow(b, q) => {
            let (r, c) = apply_rules_once(b, rules)?;
            (Expr::powr(r, q.clone()), c)
        }
        Expr::Fun(f, a) => {
            let (r, c) = apply_rules_once(a, rules)?;
            (Expr::fun(*f, r), c)
        }
        Expr::Der { f, args, orders } => {
            for rule in rules {
                if rule.f != *f || rule.orders.len() != orders.len() {
                    continue;
                }
                if !orders.iter().zip(&rule.orders).all(|(o, r)| o >= r) {
                    continue;
                }
                // rewrite the base marker, then differentiate the excess
                let mut out = rule.rhs.clone();
                for (arg, (&o, &r)) in args.iter().zip(orders.iter().zip(&rule.orders)) {
                    for _ in 0..(o - r) {
                        out = differentiate(&out, arg)?;
                    }
                }
                return Ok((out, true));
            }
            (e.clone(), false)
        }
    })
}

/// Applies the rule set until no marker matches.  Rules must be terminating
/// (each right-hand side free of its own left-hand side); the iteration cap
/// guards against accidental loops.
pub fn rewrite_markers(e: &Expr, rules: &[MarkerRule], max_passes: usize) -> Result<Expr> {
    let mut cur = e.clone();
    for _ in 0..max_passes {
        let (next, changed) = apply_rules_once(&cur, rules)?;
        cur = next;
        if !changed {
            return Ok(cur);
        }
    }
    Err(Error::Unsupported("marker rewriting did not terminate".into()))
}

/// Convenience: simplify after substituting, used pervasively by the cases.
pub fn substitute_simplified(
    e: &Expr,
    target: &Name,
    replacement: &Expr,
    ctx: &Context,
) -> Result<Expr> {
    crate::normal::simplify(&substitute(e, target, replacement)?, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::Context;
    use crate::normal::{is_zero_sym, simplify};
    use crate::parse::parse;

    fn ctx() -> Context {
        let mut c = Context::new();
        c.coordinate("t");
        c.coordinate("rho");
        c.parameter("a");
        c.function("psi", &["t", "rho"]);
        c.function("gamma", &["t", "rho"]);
        c
    }

    fn d(src: &str, v: &str, c: &Context) -> Expr {
        let e = parse(src, c).unwrap();
        simplify(&differentiate(&e, &Name::new(v)).unwrap(), c).unwrap()
    }

    #[test]
    fn polynomial_and_chain_rules() {
        let c = ctx();
        assert_eq!(d("rho^3", "rho", &c).to_string(), "3*rho^2");
        assert_eq!(d("sin(a*rho)", "rho", &c).to_string(), "a*cos(a*rho)");
        let want = simplify(&parse("2*psi.*exp(2*psi)", &c).unwrap(), &c).unwrap();
        assert_eq!(d("exp(2*psi)", "t", &c), want);
        assert_eq!(d("ln(rho)", "rho", &c).to_string(), "1/rho");
        // denominators are rationalized: 1/(2 sqrt(rho)) = sqrt(rho)/(2 rho)
        assert_eq!(d("sqrt(rho)", "rho", &c).to_string(), "sqrt(rho)/(2*rho)");
    }

    #[test]
    fn markers_accumulate_orders() {
        let c = ctx();
        assert_eq!(d("psi'", "rho", &c), parse("psi''", &c).unwrap());
        assert_eq!(d("psi'", "t", &c), parse("psi'.", &c).unwrap());
        assert_eq!(d("psi", "a", &c).to_string(), "0");
    }

    #[test]
    fn function_substitution_differentiates_the_body() {
        let c = ctx();
        // psi = a*ln(rho): psi' = a/rho, psi'' = -a/rho^2, psi. = 0
        let body = parse("a*ln(rho)", &c).unwrap();
        let e = parse("psi'' + psi'/rho - psi..", &c).unwrap();
        let out = substitute_function(&e, &Name::new("psi"), &body).unwrap();
        assert!(is_zero_sym(&out, &c).unwrap());
    }

    #[test]
    fn marker_rules_rewrite_higher_derivatives() {
        let c = ctx();
        // rule psi.. -> psi'' + psi'/rho lets the wave operator close
        let rule = MarkerRule::new(
            &parse("psi..", &c).unwrap(),
            parse("psi'' + psi'/rho", &c).unwrap(),
        );
        let e = parse("psi.. - psi'' - psi'/rho", &c).unwrap();
        let out = rewrite_markers(&e, &[rule.clone()], 16).unwrap();
        assert!(is_zero_sym(&out, &c).unwrap());
        // a t-derivative of the marker rewrites through the rule
        let e2 = parse("D(psi;3,0)", &c).unwrap();
        let out2 = rewrite_markers(&e2, &[rule], 16).unwrap();
        let want = parse("D(psi;1,2) + D(psi;1,1)/rho", &c).unwrap();
        let diff = Expr::sub(out2, want);
        assert!(is_zero_sym(&diff, &c).unwrap());
    }

    #[test]
    fn substituting_function_arguments_is_rejected() {
        let c = ctx();
        let e = parse("psi'", &c).unwrap();
        assert!(substitute(&e, &Name::new("rho"), &Expr::one()).is_err());
    }
}
