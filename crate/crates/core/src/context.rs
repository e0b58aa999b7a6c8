//! Declaration context: symbols, unknown functions, and assumptions.
//!
//! Assumptions gate the branch-sensitive rewrites (square roots of powers,
//! `exp(ln x)` collapse) and drive admissible sampling for numeric probes.

use crate::expr::{Expr, Fun, Name, rat_is_int};
use num_traits::Signed;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Assumption {
    Positive,
    Nonzero,
    Integer,
    /// Marks first-order perturbation quantities for the linearized mode.
    Perturbation,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SymbolKind {
    Coordinate,
    Parameter,
    /// Unknown scalar function of the named coordinates.
    Function(Vec<Name>),
}

#[derive(Clone, Debug)]
pub struct SymbolInfo {
    pub kind: SymbolKind,
    pub assumptions: BTreeSet<Assumption>,
    /// Open interval used when drawing admissible numeric samples.
    pub sample_range: (f64, f64),
}

impl SymbolInfo {
    fn new(kind: SymbolKind) -> Self {
        SymbolInfo {
            kind,
            assumptions: BTreeSet::new(),
            sample_range: (0.15, 1.85),
        }
    }
}

/// Symbol table shared by parsing, simplification, and sampling.
#[derive(Clone, Debug, Default)]
pub struct Context {
    syms: BTreeMap<Name, SymbolInfo>,
    /// Expressions declared to be nonvanishing on the working domain,
    /// stored in printed canonical form.
    nonzero: BTreeSet<String>,
}

impl Context {
    pub fn new() -> Self {
        Context::default()
    }

    pub fn declare(&mut self, name: &str, kind: SymbolKind) -> Name {
        let n = Name::new(name);
        self.syms.entry(n.clone()).or_insert_with(|| SymbolInfo::new(kind));
        n
    }

    pub fn coordinate(&mut self, name: &str) -> Name {
        self.declare(name, SymbolKind::Coordinate)
    }

    pub fn parameter(&mut self, name: &str) -> Name {
        self.declare(name, SymbolKind::Parameter)
    }

    pub fn function(&mut self, name: &str, args: &[&str]) -> Name {
        let args: Vec<Name> = args.iter().map(|a| Name::new(a)).collect();
        self.declare(name, SymbolKind::Function(args))
    }

    pub fn assume(&mut self, name: &str, a: Assumption) {
        if let Some(info) = self.syms.get_mut(&Name::new(name)) {
            info.assumptions.insert(a);
            if a == Assumption::Positive {
                let (lo, hi) = info.sample_range;
                if lo <= 0.0 {
                    info.sample_range = (0.15, hi.max(0.3));
                }
            }
        }
    }

    pub fn set_range(&mut self, name: &str, lo: f64, hi: f64) {
        if let Some(info) = self.syms.get_mut(&Name::new(name)) {
            info.sample_range = (lo, hi);
        }
    }

    /// Declares an expression nonvanishing on the domain of interest
    /// (for example `r - rp` on an outer patch).
    pub fn assume_nonzero_expr(&mut self, printed: &str) {
        self.nonzero.insert(printed.to_string());
    }

    pub fn info(&self, name: &Name) -> Option<&SymbolInfo> {
        self.syms.get(name)
    }

    pub fn is_declared(&self, name: &Name) -> bool {
        name.as_str() == crate::expr::PI || self.syms.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = (&Name, &SymbolInfo)> {
        self.syms.iter()
    }

    pub fn function_args(&self, name: &Name) -> Option<&[Name]> {
        match self.syms.get(name).map(|i| &i.kind) {
            Some(SymbolKind::Function(args)) => Some(args),
            _ => None,
        }
    }

    pub fn has_assumption(&self, name: &Name, a: Assumption) -> bool {
        self.syms
            .get(name)
            .map(|i| i.assumptions.contains(&a))
            .unwrap_or(false)
    }

    pub fn is_perturbation(&self, name: &Name) -> bool {
        self.has_assumption(name, Assumption::Perturbation)
    }

    /// Conservative structural positivity test.
    pub fn is_positive(&self, e: &Expr) -> bool {
        match e {
            Expr::Num(r) => r.is_positive(),
            Expr::Sym(n) => {
                n.as_str() == crate::expr::PI || self.has_assumption(n, Assumption::Positive)
            }
            Expr::Add(ts) => ts.iter().all(|t| self.is_positive(t)),
            Expr::Mul(fs) => fs.iter().all(|f| self.is_positive(f)),
            Expr::Pow(b, e) => {
                self.is_positive(b) || (rat_is_int(e) && num::Integer::is_even(&e.to_integer()))
            }
            Expr::Fun(Fun::Exp, _) => true,
            _ => false,
        }
    }

    /// Conservative structural nonvanishing test.
    pub fn is_nonzero(&self, e: &Expr) -> bool {
        if self.is_positive(e) {
            return true;
        }
        match e {
            Expr::Num(r) => !num_traits::Zero::is_zero(r),
            Expr::Sym(n) => self.has_assumption(n, Assumption::Nonzero),
            Expr::Mul(fs) => fs.iter().all(|f| self.is_nonzero(f)),
            Expr::Pow(b, _) => self.is_nonzero(b),
            _ => self.nonzero.contains(&e.to_string()),
        }
    }
}
