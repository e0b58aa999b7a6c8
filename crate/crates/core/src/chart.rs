//! Charts: named coordinate systems with ranges, periods, and excluded loci.

use crate::expr::{Expr, Name};
use std::collections::BTreeMap;

/// A locus of the form `coord = value`, e.g. `r = r_plus` or `theta = 0`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Locus {
    pub coord: Name,
    pub value: Expr,
}

impl Locus {
    pub fn new(coord: &str, value: Expr) -> Self {
        Locus { coord: Name::new(coord), value }
    }
    pub fn label(&self) -> String {
        format!("{} = {}", self.coord, self.value)
    }
}

/// An ordered coordinate system.  The coordinate order fixes the component
/// index convention for every form on the chart.
#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    pub name: String,
    pub coords: Vec<Name>,
    /// integration bounds, where meaningful (e.g. `theta` in `[0, pi]`)
    pub ranges: BTreeMap<Name, (Expr, Expr)>,
    /// period of each compact coordinate (e.g. `phi` with period `2 pi`)
    pub periods: BTreeMap<Name, Expr>,
    /// loci outside the chart domain (coordinate degeneracies, axes)
    pub excluded: Vec<Locus>,
}

impl Chart {
    pub fn new(name: &str, coords: &[&str]) -> Self {
        Chart {
            name: name.to_string(),
            coords: coords.iter().map(|c| Name::new(c)).collect(),
            ranges: BTreeMap::new(),
            periods: BTreeMap::new(),
            excluded: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn index(&self, name: &Name) -> Option<usize> {
        self.coords.iter().position(|c| c == name)
    }

    pub fn coord(&self, i: usize) -> &Name {
        &self.coords[i]
    }

    pub fn set_range(&mut self, coord: &str, lo: Expr, hi: Expr) -> &mut Self {
        self.ranges.insert(Name::new(coord), (lo, hi));
        self
    }

    pub fn set_period(&mut self, coord: &str, period: Expr) -> &mut Self {
        self.periods.insert(Name::new(coord), period);
        self
    }

    pub fn exclude(&mut self, locus: Locus) -> &mut Self {
        self.excluded.push(locus);
        self
    }

    pub fn is_excluded(&self, locus: &Locus) -> bool {
        self.excluded.iter().any(|l| l == locus)
    }
}
