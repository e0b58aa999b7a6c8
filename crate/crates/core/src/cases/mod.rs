//! Built-in spacetimes wired through the whole pipeline.
//!
//! Each case declares a chart and an orthonormal coframe, verifies the field
//! equations appropriate to its matter content, then runs the bundle
//! analysis: singular loci, gauge patches, transition phases, integer
//! conditions, Chern numbers.  The result is a [`Record`] that the command
//! line renders as text or JSON.

pub mod einstein_rosen;
pub mod kerr_newman;
pub mod reissner_nordstrom;
pub mod weak_field;

use crate::calculus::{rewrite_markers, MarkerRule};
use crate::cartan::{
    curvature, einstein_maxwell_residual, einstein_tensor, em_stress_energy, ricci,
    scalar_curvature, solve_connection,
};
use crate::chart::Chart;
use crate::coframe::Coframe;
use crate::context::Context;
use crate::error::{Error, Result};
use crate::expr::{Expr, Name};
use crate::form::{Form, MatrixForm};
use crate::normal::{is_zero_sym, linearize, simplify};
use crate::report::{EntryRecord, Record, SectionRecord};

/// What sources the geometry: nothing, an electromagnetic potential, or
/// nothing at first order in declared perturbation parameters.
#[derive(Clone, Debug)]
pub enum SourceType {
    Vacuum,
    /// Potential one-form in coordinate basis, tagged imaginary.
    Electrovac(Form),
    LinearizedVacuum,
}

#[derive(Clone, Debug)]
pub struct FieldCheck {
    pub pass: bool,
    /// Rendered nonzero residual entries, empty when the check passes.
    pub residuals: Vec<String>,
}

/// A spacetime prepared for analysis.  `relations` closes the parameter set
/// (auxiliary symbols such as horizon radii in terms of the physical
/// charges); `rules` are the equations of motion for unknown metric
/// functions, imposed as rewrites.  Both are applied before any residual is
/// tested for zero.
pub struct CaseStudy {
    pub name: String,
    pub chart: Chart,
    pub ctx: Context,
    pub coframe: Coframe,
    pub source: SourceType,
    pub relations: Vec<(Name, Expr)>,
    pub rules: Vec<MarkerRule>,
}

fn close(e: &Expr, case: &CaseStudy, ctx: &Context) -> Result<Expr> {
    let mut out = e.clone();
    if !case.rules.is_empty() {
        out = rewrite_markers(&out, &case.rules, 32)?;
    }
    for (name, value) in &case.relations {
        out = crate::calculus::substitute(&out, name, value)?;
    }
    simplify(&out, ctx)
}

/// Checks the Einstein equations matching the case's source.  Vacuum means
/// the Ricci tensor vanishes; an electromagnetic source must satisfy
/// `G = 8 pi T` with `T` built from `d` of the potential; a linearized
/// vacuum must have an Einstein tensor with no first-order part.
pub fn verify_field_equations(case: &CaseStudy) -> Result<FieldCheck> {
    let ctx = &case.ctx;
    let conn = solve_connection(&case.coframe, &case.chart, ctx)?;
    let curv = curvature(&conn, &case.coframe, &case.chart, ctx)?;
    let ric = ricci(&curv, ctx)?;
    let n = ric.len();
    let mut residuals = Vec::new();
    match &case.source {
        SourceType::Vacuum => {
            for a in 0..n {
                for b in 0..n {
                    let r = close(&ric[a][b], case, ctx)?;
                    if !is_zero_sym(&r, ctx)? {
                        residuals.push(format!("Ric[{}][{}] = {}", a, b, r));
                    }
                }
            }
        }
        SourceType::Electrovac(a_pot) => {
            let scalar = scalar_curvature(&ric, ctx)?;
            let g = einstein_tensor(&ric, &scalar, ctx)?;
            let f_coord = a_pot.clone().with_imaginary(false).d(&case.chart, ctx)?;
            let f = case.coframe.to_frame(&f_coord, ctx)?;
            let t = em_stress_energy(&f, ctx)?;
            let res = einstein_maxwell_residual(&g, &t, ctx)?;
            for a in 0..n {
                for b in 0..n {
                    let r = close(&res[a][b], case, ctx)?;
                    if !is_zero_sym(&r, ctx)? {
                        residuals.push(format!("G[{}][{}] - 8*pi*T[{}][{}] = {}", a, b, a, b, r));
                    }
                }
            }
        }
        SourceType::LinearizedVacuum => {
            let scalar = scalar_curvature(&ric, ctx)?;
            let g = einstein_tensor(&ric, &scalar, ctx)?;
            for a in 0..n {
                for b in 0..n {
                    let r = linearize(&close(&g[a][b], case, ctx)?, ctx)?;
                    if !is_zero_sym(&r, ctx)? {
                        residuals.push(format!("linear G[{}][{}] = {}", a, b, r));
                    }
                }
            }
        }
    }
    Ok(FieldCheck {
        pass: residuals.is_empty(),
        residuals,
    })
}

pub fn field_check_into(record: &mut Record, name: &str, check: &FieldCheck) {
    let detail = if check.pass {
        String::new()
    } else {
        check.residuals.join("; ")
    };
    record.check(name, check.pass, detail);
}

/// Nonzero entries of a matrix of forms as a report section, keys like
/// `w[0][1]`.
pub fn matrix_section(
    title: &str,
    prefix: &str,
    m: &MatrixForm,
    chart: &Chart,
    ctx: &Context,
) -> Result<SectionRecord> {
    let mut entries = Vec::new();
    for a in 0..m.n() {
        for b in 0..m.n() {
            let f = m.entries[a][b].simplified(ctx)?;
            if f.is_structurally_zero() {
                continue;
            }
            entries.push(EntryRecord {
                key: format!("{}[{}][{}]", prefix, a, b),
                value: f.render(chart),
            });
        }
    }
    Ok(SectionRecord {
        title: title.to_string(),
        entries,
    })
}

pub const BUILT_IN: &[&str] = &[
    "einstein-rosen",
    "monopole",
    "reissner-nordstrom",
    "kerr-newman",
];

/// Runs a built-in case end to end.
pub fn analyze(name: &str) -> Result<Record> {
    match name {
        "einstein-rosen" => einstein_rosen::analyze(),
        "monopole" => weak_field::analyze(),
        "reissner-nordstrom" => reissner_nordstrom::analyze(),
        "kerr-newman" => kerr_newman::analyze(),
        other => Err(Error::Unsupported(format!(
            "unknown case '{}'; built in: {}",
            other,
            BUILT_IN.join(", ")
        ))),
    }
}

/// Builds a built-in case without running its analysis.
pub fn study(name: &str) -> Result<CaseStudy> {
    match name {
        "einstein-rosen" => einstein_rosen::build(),
        "monopole" => weak_field::build(),
        "reissner-nordstrom" => reissner_nordstrom::build(&Expr::sym("e")),
        "kerr-newman" => kerr_newman::build(&Expr::sym("e")),
        other => Err(Error::Unsupported(format!(
            "unknown case '{}'; built in: {}",
            other,
            BUILT_IN.join(", ")
        ))),
    }
}
