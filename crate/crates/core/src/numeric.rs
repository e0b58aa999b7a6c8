//! Floating-point evaluation and randomized equivalence checking.

use crate::context::{Assumption, Context};
use crate::error::{Error, Result};
use crate::expr::{Expr, Fun, Name, rat_is_int, rat_to_f64, PI};
use num_traits::ToPrimitive;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

/// Bindings for evaluation: plain symbols plus derivative markers, the
/// latter keyed by the whole marker node so distinct multi-indices get
/// independent values.
#[derive(Clone, Debug, Default)]
pub struct NumEnv {
    pub syms: BTreeMap<Name, f64>,
    pub markers: BTreeMap<Expr, f64>,
}

impl NumEnv {
    pub fn new() -> Self {
        Self::default()
    }
    pub fn set(&mut self, name: &str, v: f64) -> &mut Self {
        self.syms.insert(Name::new(name), v);
        self
    }
}

pub fn eval(e: &Expr, env: &NumEnv) -> Result<f64> {
    let v = eval_inner(e, env)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numeric("non-finite result".into()))
    }
}

fn eval_inner(e: &Expr, env: &NumEnv) -> Result<f64> {
    Ok(match e {
        Expr::Num(r) => rat_to_f64(r),
        Expr::Sym(n) => {
            if n.as_str() == PI {
                std::f64::consts::PI
            } else {
                *env.syms.get(n).ok_or(Error::Numeric("unbound value".into()))?
            }
        }
        Expr::Add(ts) => {
            let mut s = 0.0;
            for t in ts {
                s += eval_inner(t, env)?;
            }
            s
        }
        Expr::Mul(fs) => {
            let mut p = 1.0;
            for f in fs {
                p *= eval_inner(f, env)?;
            }
            p
        }
        Expr::Pow(b, q) => {
            let bv = eval_inner(b, env)?;
            if rat_is_int(q) {
                let k = q.to_integer().to_i32().ok_or(Error::Numeric("exponent overflow".into()))?;
                bv.powi(k)
            } else {
                if bv < 0.0 {
                    return Err(Error::Domain(format!("({})^({})", bv, q)));
                }
                bv.powf(rat_to_f64(q))
            }
        }
        Expr::Fun(f, a) => {
            let av = eval_inner(a, env)?;
            match f {
                Fun::Sin => av.sin(),
                Fun::Cos => av.cos(),
                Fun::Exp => av.exp(),
                Fun::Ln => {
                    if av <= 0.0 {
                        return Err(Error::Domain(format!("ln({})", av)));
                    }
                    av.ln()
                }
            }
        }
        Expr::Der { .. } => *env.markers.get(e).ok_or(Error::Numeric("unbound value".into()))?,
    })
}

pub(crate) fn collect_markers(e: &Expr, out: &mut BTreeSet<Expr>) {
    match e {
        Expr::Num(_) | Expr::Sym(_) => {}
        Expr::Add(v) | Expr::Mul(v) => {
            for t in v {
                collect_markers(t, out);
            }
        }
        Expr::Pow(b, _) => collect_markers(b, out),
        Expr::Fun(_, a) => collect_markers(a, out),
        Expr::Der { .. } => {
            out.insert(e.clone());
        }
    }
}

/// Draws an admissible random environment for the free symbols and markers
/// of the given expressions.  Symbol ranges come from the context; markers
/// get generic values in `[-1.5, 1.5]` away from zero.
pub fn sample_env(
    exprs: &[&Expr],
    ctx: &Context,
    rng: &mut ChaCha8Rng,
) -> NumEnv {
    let mut syms = BTreeSet::new();
    let mut markers = BTreeSet::new();
    for e in exprs {
        e.symbols(&mut syms);
        collect_markers(e, &mut markers);
    }
    let mut env = NumEnv::new();
    for n in syms {
        if n.as_str() == PI {
            continue;
        }
        let (lo, hi) = ctx
            .info(&n)
            .map(|i| i.sample_range)
            .unwrap_or((0.15, 1.85));
        let v = if ctx.has_assumption(&n, Assumption::Integer) {
            rng.gen_range(1..=4) as f64
        } else {
            rng.gen_range(lo..hi)
        };
        env.syms.insert(n, v);
    }
    for m in markers {
        let mut v: f64 = rng.gen_range(-1.5..1.5);
        if v.abs() < 0.1 {
            v += 0.3;
        }
        env.markers.insert(m, v);
    }
    env
}

/// Randomized equality at relative tolerance; both sides must evaluate at
/// each drawn point (domain failures draw a fresh point, up to a retry cap).
pub fn probes_agree(
    a: &Expr,
    b: &Expr,
    ctx: &Context,
    seed: u64,
    probes: usize,
    tol: f64,
) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut done = 0;
    let mut attempts = 0;
    while done < probes {
        attempts += 1;
        if attempts > probes * 40 {
            return Err(Error::Numeric("admissible probe retries exhausted".into()));
        }
        let env = sample_env(&[a, b], ctx, &mut rng);
        let (va, vb) = match (eval(a, &env), eval(b, &env)) {
            (Ok(x), Ok(y)) => (x, y),
            _ => continue,
        };
        let scale = 1.0 + va.abs().max(vb.abs());
        if (va - vb).abs() > tol * scale {
            return Ok(false);
        }
        done += 1;
    }
    Ok(true)
}

/// Symbolic proof first, randomized probes as the fallback for forms the
/// normal form cannot close (nested radicals and the like).
pub fn equivalent(a: &Expr, b: &Expr, ctx: &Context, seed: u64) -> Result<bool> {
    let diff = Expr::sub(a.clone(), b.clone());
    match crate::normal::is_zero_sym(&diff, ctx) {
        Ok(true) => return Ok(true),
        Ok(false) => {}
        Err(_) => {}
    }
    probes_agree(a, b, ctx, seed, 50, 1e-8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::differentiate;
    use crate::context::Context;
    use crate::parse::parse;

    fn ctx() -> Context {
        let mut c = Context::new();
        c.coordinate("x");
        c.coordinate("y");
        c.parameter("a");
        c.function("psi", &["x"]);
        c
    }

    #[test]
    fn evaluates_elementary_expressions() {
        let c = ctx();
        let e = parse("x^2 + sin(pi/2)*y", &c).unwrap();
        let mut env = NumEnv::new();
        env.set("x", 3.0).set("y", 4.0);
        assert!((eval(&e, &env).unwrap() - 13.0).abs() < 1e-12);
    }

    #[test]
    fn markers_bind_independently() {
        let c = ctx();
        let e = parse("psi' * psi - psi''", &c).unwrap();
        let mut env = NumEnv::new();
        env.markers.insert(parse("psi", &c).unwrap(), 2.0);
        env.markers.insert(parse("psi'", &c).unwrap(), 3.0);
        env.markers.insert(parse("psi''", &c).unwrap(), 5.0);
        assert!((eval(&e, &env).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn domain_errors_are_reported() {
        let c = ctx();
        let mut env = NumEnv::new();
        env.set("x", -2.0);
        assert!(matches!(
            eval(&parse("ln(x)", &c).unwrap(), &env),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            eval(&parse("sqrt(x)", &c).unwrap(), &env),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn equivalence_falls_back_to_probes() {
        let c = ctx();
        // |x+1| = x+1 on the positive sample range, but the radical normal
        // form does not collapse symbolically
        let a = parse("sqrt(x^2 + 2*x + 1)", &c).unwrap();
        let b = parse("x + 1", &c).unwrap();
        assert!(equivalent(&a, &b, &c, 7).unwrap());
        let wrong = parse("x - 1", &c).unwrap();
        assert!(!equivalent(&a, &wrong, &c, 7).unwrap());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let c = ctx();
        let e = parse("sin(a*x)*exp(x/2) + x^3/(1 + x^2)", &c).unwrap();
        let de = differentiate(&e, &Name::new("x")).unwrap();
        let mut env = NumEnv::new();
        env.set("a", 0.7);
        let h = 1e-6;
        for i in 0..20 {
            let x = 0.3 + 0.07 * i as f64;
            env.set("x", x + h);
            let up = eval(&e, &env).unwrap();
            env.set("x", x - h);
            let dn = eval(&e, &env).unwrap();
            env.set("x", x);
            let got = eval(&de, &env).unwrap();
            let fd = (up - dn) / (2.0 * h);
            assert!(
                (got - fd).abs() <= 1e-6 * (1.0 + got.abs()),
                "x={}: {} vs {}",
                x,
                got,
                fd
            );
        }
    }
}
