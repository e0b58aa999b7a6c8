//! Symbolic exterior calculus and topological quantization of gauge patches.
//!
//! The pipeline: declare a chart and an orthonormal coframe, solve the first
//! Cartan structure equation for the spin connection, form the curvature,
//! locate singular loci of connection and potential components, build gauge
//! patches with group-valued transition functions, and integrate first Chern
//! forms to extract the integer conditions that make the bundle well defined.

pub mod calculus;
pub mod cartan;
pub mod cases;
pub mod chart;
pub mod coframe;
pub mod context;
pub mod error;
pub mod expr;
pub mod form;
pub mod gauge;
pub mod bundle;
pub mod normal;
pub mod numeric;
pub mod parse;
pub mod report;
pub mod series;

pub use context::{Assumption, Context, SymbolInfo, SymbolKind};
pub use error::{Error, Result};
pub use expr::{Expr, Fun, Name, Rat};
pub use normal::{is_zero_sym, linearize, simplify};
