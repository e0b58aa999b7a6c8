//! Recursive-descent parser for the expression grammar printed by `Display`.
//!
//! Parsing is context-aware: every identifier must be declared (coordinate,
//! parameter, or function), which turns typos into located errors instead of
//! silently fresh symbols.  There is no implicit multiplication.  Exponents
//! are exact rational literals; decimal literals are exact, never floats.

use crate::context::Context;
use crate::error::{Error, Result};
use crate::expr::{Expr, Rat};
use num::bigint::BigInt;
use num_traits::{One, Zero};

pub fn parse(src: &str, ctx: &Context) -> Result<Expr> {
    let mut p = Parser { src: src.as_bytes(), pos: 0, ctx };
    p.skip_ws();
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    ctx: &'a Context,
}

impl<'a> Parser<'a> {
    fn err(&self, message: &str) -> Error {
        Error::Parse { offset: self.pos, message: message.to_string() }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ') | Some(b'\t')) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut terms = vec![self.term()?];
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    terms.push(self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    terms.push(self.term()?.neg());
                }
                _ => break,
            }
        }
        Ok(Expr::add(terms))
    }

    fn term(&mut self) -> Result<Expr> {
        let mut factors = vec![self.factor()?];
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    factors.push(self.factor()?);
                }
                Some(b'/') => {
                    self.pos += 1;
                    let d = self.factor()?;
                    factors.push(Expr::powi(d, -1));
                }
                _ => break,
            }
        }
        Ok(Expr::mul(factors))
    }

    fn factor(&mut self) -> Result<Expr> {
        self.skip_ws();
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(self.factor()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        self.skip_ws();
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let e = self.exponent()?;
            return Ok(Expr::powr(base, e));
        }
        Ok(base)
    }

    /// Exponent literal: `3`, `-2`, `(1/2)`, `(-3/4)`.
    fn exponent(&mut self) -> Result<Rat> {
        self.skip_ws();
        let parened = self.peek() == Some(b'(');
        if parened {
            self.pos += 1;
        }
        self.skip_ws();
        let neg = self.peek() == Some(b'-');
        if neg {
            self.pos += 1;
        }
        let numer = self.digits()?;
        let denom = if parened && self.eat(b'/') {
            let d = self.digits()?;
            if d.is_zero() {
                return Err(self.err("zero denominator in exponent"));
            }
            d
        } else {
            BigInt::one()
        };
        if parened {
            self.expect(b')')?;
        }
        let mut r = Rat::new(numer, denom);
        if neg {
            r = -r;
        }
        Ok(r)
    }

    fn digits(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected digits"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(s.parse().unwrap())
    }

    fn atom(&mut self) -> Result<Expr> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            _ => Err(self.err("expected a number, identifier, or '('")),
        }
    }

    /// Integer or exact decimal literal.
    fn number(&mut self) -> Result<Expr> {
        let int = self.digits()?;
        if self.peek() == Some(b'.')
            && matches!(self.src.get(self.pos + 1), Some(c) if c.is_ascii_digit())
        {
            self.pos += 1;
            let start = self.pos;
            let frac = self.digits()?;
            let places = (self.pos - start) as u32;
            let scale = BigInt::from(10u32).pow(places);
            return Ok(Expr::Num(Rat::new(int * &scale + frac, scale)));
        }
        Ok(Expr::Num(Rat::from_integer(int)))
    }

    fn ident_text(&mut self) -> String {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string()
    }

    fn ident(&mut self) -> Result<Expr> {
        let start = self.pos;
        let name = self.ident_text();
        match name.as_str() {
            "sqrt" | "sin" | "cos" | "exp" | "ln" => {
                self.expect(b'(')?;
                let arg = self.expr()?;
                self.expect(b')')?;
                return Ok(match name.as_str() {
                    "sqrt" => Expr::sqrt(arg),
                    "sin" => Expr::sin(arg),
                    "cos" => Expr::cos(arg),
                    "exp" => Expr::exp(arg),
                    _ => Expr::ln(arg),
                });
            }
            "D" => return self.explicit_derivative(),
            _ => {}
        }
        let sym_name = crate::expr::Name::new(&name);
        if !self.ctx.is_declared(&sym_name) {
            return Err(Error::Undeclared { name, offset: start });
        }
        let args = self.ctx.function_args(&sym_name);
        match args {
            None => {
                // primes and dots are only meaningful on functions
                if matches!(self.peek(), Some(b'\'')) {
                    return Err(self.err("derivative suffix on a non-function symbol"));
                }
                Ok(Expr::sym(&name))
            }
            Some(args) => {
                let mut primes = 0u32;
                let mut dots = 0u32;
                loop {
                    match self.peek() {
                        Some(b'\'') => {
                            primes += 1;
                            self.pos += 1;
                        }
                        // a dot is a derivative mark only when not starting
                        // a decimal; identifiers can't be followed by one
                        Some(b'.') => {
                            dots += 1;
                            self.pos += 1;
                        }
                        _ => break,
                    }
                }
                let mut orders = vec![0u32; args.len()];
                if dots > 0 {
                    let t_pos = args
                        .iter()
                        .position(|a| a.as_str() == "t")
                        .ok_or_else(|| self.err("dot derivative but no argument named t"))?;
                    orders[t_pos] = dots;
                }
                if primes > 0 {
                    let non_t: Vec<usize> = (0..args.len())
                        .filter(|&i| args[i].as_str() != "t")
                        .collect();
                    if non_t.len() != 1 {
                        return Err(
                            self.err("prime derivative needs exactly one non-t argument")
                        );
                    }
                    orders[non_t[0]] = primes;
                }
                let arg_strs: Vec<&str> = args.iter().map(|a| a.as_str()).collect();
                Ok(Expr::der(&name, &arg_strs, &orders))
            }
        }
    }

    /// `D(f;o1,o2,...)` with one order per declared argument.
    fn explicit_derivative(&mut self) -> Result<Expr> {
        self.expect(b'(')?;
        self.skip_ws();
        let start = self.pos;
        let fname = self.ident_text();
        if fname.is_empty() {
            return Err(self.err("expected a function name"));
        }
        let args = match self.ctx.function_args(&crate::expr::Name::new(&fname)) {
            Some(a) => a,
            None => return Err(Error::Undeclared { name: fname, offset: start }),
        };
        self.expect(b';')?;
        let mut orders = Vec::new();
        loop {
            let d = self.digits()?;
            let o = num_traits::ToPrimitive::to_u32(&d)
                .ok_or_else(|| self.err("derivative order too large"))?;
            orders.push(o);
            if !self.eat(b',') {
                break;
            }
        }
        self.expect(b')')?;
        if orders.len() != args.len() {
            return Err(self.err(&format!(
                "expected {} derivative orders for {}",
                args.len(),
                fname
            )));
        }
        let arg_strs: Vec<&str> = args.iter().map(|a| a.as_str()).collect();
        Ok(Expr::der(&fname, &arg_strs, &orders))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::Context;
    use crate::expr::rat;

    fn ctx() -> Context {
        let mut c = Context::new();
        c.coordinate("t");
        c.coordinate("rho");
        c.parameter("a");
        c.function("psi", &["t", "rho"]);
        c.function("f", &["rho"]);
        c
    }

    #[test]
    fn round_trips_through_display() {
        let c = ctx();
        for src in [
            "psi'' + psi'/rho - psi..",
            "a*rho^2 - 1/rho",
            "sqrt(rho) + rho^(3/2)",
            "exp(2*psi - a)*sin(t)",
            "D(psi;2,1)",
            "-3/4*rho",
        ] {
            let e = parse(src, &c).unwrap();
            let printed = e.to_string();
            let back = parse(&printed, &c).unwrap();
            // printing is stable: a reparse prints to the same text
            assert_eq!(back.to_string(), printed, "print of {} is unstable", src);
        }
    }

    #[test]
    fn derivative_suffixes() {
        let c = ctx();
        assert_eq!(parse("psi'", &c).unwrap(), Expr::der("psi", &["t", "rho"], &[0, 1]));
        assert_eq!(parse("psi.", &c).unwrap(), Expr::der("psi", &["t", "rho"], &[1, 0]));
        assert_eq!(parse("psi'.", &c).unwrap(), Expr::der("psi", &["t", "rho"], &[1, 1]));
        assert_eq!(parse("f''", &c).unwrap(), Expr::der("f", &["rho"], &[2]));
        assert_eq!(parse("D(psi;1,2)", &c).unwrap(), Expr::der("psi", &["t", "rho"], &[1, 2]));
    }

    #[test]
    fn exact_decimals() {
        let c = ctx();
        assert_eq!(parse("0.25", &c).unwrap(), Expr::Num(rat(1, 4)));
        assert_eq!(parse("1.5*rho", &c).unwrap(), Expr::mul(vec![Expr::Num(rat(3, 2)), Expr::sym("rho")]));
    }

    #[test]
    fn undeclared_symbols_are_located() {
        let c = ctx();
        match parse("rho + zeta", &c) {
            Err(Error::Undeclared { name, offset }) => {
                assert_eq!(name, "zeta");
                assert_eq!(offset, 6);
            }
            other => panic!("expected undeclared error, got {:?}", other),
        }
    }

    #[test]
    fn no_implicit_multiplication() {
        let c = ctx();
        assert!(parse("2 rho", &c).is_err());
        assert!(parse("rho(t)", &c).is_err());
    }

    #[test]
    fn dot_on_function_without_t_is_rejected() {
        let c = ctx();
        assert!(parse("f.", &c).is_err());
        assert!(parse("a'", &c).is_err());
    }
}
