//! Subcommand bodies.  Each returns a [`Record`]; the binary renders it and
//! turns failing checks into the exit code, so nothing here prints.

use std::path::Path;

use cartanq_core::bundle::{self, Patch};
use cartanq_core::cartan;
use cartanq_core::cases::{self, field_check_into, matrix_section, CaseStudy, SourceType};
use cartanq_core::chart::Chart;
use cartanq_core::coframe::eta;
use cartanq_core::form::{Form, MatrixForm};
use cartanq_core::gauge::{self, GeneratorKind};
use cartanq_core::numeric::equivalent;
use cartanq_core::parse::parse;
use cartanq_core::report::{
    EntryRecord, LocusRecord, PatchRecord, Record, SectionRecord, TransitionRecord,
};
use cartanq_core::{is_zero_sym, Context, Error, Expr, Rat, Result};

use crate::definition;

pub enum Input<'a> {
    Case(&'a str),
    File(&'a Path),
}

/// What a subcommand works on: a built-in case or a parsed definition file.
/// `expected` holds golden connection entries from the file, if any.
pub struct Scene {
    pub study: CaseStudy,
    pub expected: Vec<(usize, usize, Form)>,
}

pub fn scene(input: Input<'_>, linear: bool) -> Result<Scene> {
    match input {
        Input::Case(name) => {
            if linear {
                return Err(Error::Unsupported(
                    "built-in cases declare their own matter content; --linear applies to \
                     definition files"
                        .into(),
                ));
            }
            Ok(Scene {
                study: cases::study(name)?,
                expected: Vec::new(),
            })
        }
        Input::File(path) => {
            let def = definition::load(path)?;
            let source = if linear {
                SourceType::LinearizedVacuum
            } else {
                match &def.potential {
                    Some(a) => SourceType::Electrovac(a.clone()),
                    None => SourceType::Vacuum,
                }
            };
            Ok(Scene {
                study: CaseStudy {
                    name: def.name,
                    chart: def.chart,
                    ctx: def.ctx,
                    coframe: def.coframe,
                    source,
                    relations: Vec::new(),
                    rules: Vec::new(),
                },
                expected: def.expected,
            })
        }
    }
}

fn forms_are_zero(forms: &[Form], ctx: &Context) -> Result<Option<String>> {
    for (i, f) in forms.iter().enumerate() {
        if !f.is_zero(ctx)? {
            return Ok(Some(format!("entry {} is nonzero", i)));
        }
    }
    Ok(None)
}

fn matrix_is_zero(m: &MatrixForm, ctx: &Context) -> Result<Option<String>> {
    for (i, row) in m.entries.iter().enumerate() {
        for (j, f) in row.iter().enumerate() {
            if !f.is_zero(ctx)? {
                return Ok(Some(format!("entry [{}][{}] is nonzero", i, j)));
            }
        }
    }
    Ok(None)
}

fn residual_check(rec: &mut Record, name: &str, failure: Option<String>) {
    match failure {
        None => rec.check(name, true, ""),
        Some(detail) => rec.check(name, false, detail),
    }
}

/// Componentwise equivalence of two stored forms under numeric probing.
fn forms_agree(a: &Form, b: &Form, ctx: &Context, seed: u64) -> Result<bool> {
    let diff = a.sub(b, ctx)?;
    for comp in diff.comps.values() {
        if !equivalent(comp, &Expr::zero(), ctx, seed)? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn connection(sc: &Scene, seed: u64) -> Result<Record> {
    let study = &sc.study;
    let (chart, ctx) = (&study.chart, &study.ctx);
    let mut rec = Record::named(&study.name);
    let conn = cartan::solve_connection(&study.coframe, chart, ctx)?;
    let structure = cartan::first_structure_residual(&study.coframe, &conn, chart, ctx)?;
    residual_check(&mut rec, "structure-equation", forms_are_zero(&structure, ctx)?);
    let anti = cartan::antisymmetry_residual(&conn, ctx)?;
    residual_check(&mut rec, "antisymmetry", forms_are_zero(&anti, ctx)?);
    for (i, j, want) in &sc.expected {
        let got = &conn.coord.entries[*i][*j];
        let ok = forms_agree(got, want, ctx, seed)?;
        let detail = if ok {
            String::new()
        } else {
            format!(
                "engine: {}, expected: {}",
                got.render(chart),
                want.render(chart)
            )
        };
        rec.check(&format!("expected-w[{}][{}]", i, j), ok, detail);
    }
    rec.sections
        .push(matrix_section("connection", "w", &conn.coord, chart, ctx)?);
    Ok(rec)
}

pub fn curvature(sc: &Scene) -> Result<Record> {
    let study = &sc.study;
    let (chart, ctx) = (&study.chart, &study.ctx);
    let mut rec = Record::named(&study.name);
    let conn = cartan::solve_connection(&study.coframe, chart, ctx)?;
    let curv = cartan::curvature(&conn, &study.coframe, chart, ctx)?;
    let bianchi = cartan::bianchi_residual(&conn, &curv, chart, ctx)?;
    residual_check(&mut rec, "bianchi-identity", matrix_is_zero(&bianchi, ctx)?);
    let section = matrix_section("curvature", "Omega", &curv.coord, chart, ctx)?;
    if section.entries.is_empty() {
        rec.notes.push("all curvature two-forms vanish".into());
    }
    rec.sections.push(section);
    Ok(rec)
}

pub fn invariants(sc: &Scene) -> Result<Record> {
    let study = &sc.study;
    let (chart, ctx) = (&study.chart, &study.ctx);
    let mut rec = Record::named(&study.name);
    let conn = cartan::solve_connection(&study.coframe, chart, ctx)?;
    let curv = cartan::curvature(&conn, &study.coframe, chart, ctx)?;
    let ric = cartan::ricci(&curv, ctx)?;
    let scalar = cartan::scalar_curvature(&ric, ctx)?;
    let invariant = cartan::kretschmann(&curv, ctx)?;
    let mut entries = vec![
        EntryRecord {
            key: "scalar-curvature".into(),
            value: scalar.to_string(),
        },
        EntryRecord {
            key: "kretschmann".into(),
            value: invariant.to_string(),
        },
    ];
    if let SourceType::Electrovac(a) = &study.source {
        let f_coord = a.clone().with_imaginary(false).d(chart, ctx)?;
        let f = study.coframe.to_frame(&f_coord, ctx)?;
        entries.push(EntryRecord {
            key: "field-strength-invariant".into(),
            value: cartan::field_strength_invariant(&f, ctx)?.to_string(),
        });
    }
    rec.sections.push(SectionRecord {
        title: "invariants".into(),
        entries,
    });

    // divergence candidates: the frame components and their inverses
    let mut fields: Vec<Expr> = Vec::new();
    for row in study.coframe.mat.iter().chain(study.coframe.inv.iter()) {
        fields.extend(row.iter().cloned());
    }
    for l in bundle::singular_loci(&fields, &invariant, chart, ctx)? {
        rec.loci.push(LocusRecord {
            locus: l.locus.label(),
            kind: l.kind.to_string(),
            detail: l.detail,
        });
    }
    Ok(rec)
}

pub fn verify(sc: &Scene) -> Result<Record> {
    let study = &sc.study;
    let mut rec = Record::named(&study.name);
    let label = match &study.source {
        SourceType::Vacuum => "vacuum-field-equations",
        SourceType::Electrovac(_) => "einstein-maxwell",
        SourceType::LinearizedVacuum => "linearized-field-equations",
    };
    let check = cases::verify_field_equations(study)?;
    field_check_into(&mut rec, label, &check);
    Ok(rec)
}

/// so(1,3) generator of the coordinate plane `(a, b)`: lowered components
/// `T_ab = -T_ba = 1`, first index raised with `eta`.
fn plane_generator(a: usize, b: usize) -> Vec<Vec<Rat>> {
    let mut t = vec![vec![Rat::from_integer(0.into()); 4]; 4];
    t[a][b] = Rat::from_integer(eta(a).into());
    t[b][a] = Rat::from_integer((-eta(b)).into());
    t
}

pub fn gauge_transform(sc: &Scene, a: usize, b: usize, angle_text: &str) -> Result<Record> {
    let study = &sc.study;
    let (chart, ctx) = (&study.chart, &study.ctx);
    if a == b {
        return Err(Error::BadGenerator(
            "the plane needs two distinct frame legs".into(),
        ));
    }
    let angle = parse(angle_text, ctx)?;
    let t = plane_generator(a, b);
    let kind = gauge::classify_generator(&t)?;
    let lam = gauge::frame_rotation(&t, &angle, ctx)?;
    let conn = cartan::solve_connection(&study.coframe, chart, ctx)?;
    let transformed = gauge::transform_connection(&lam, &conn.coord, chart, ctx)?;

    // the transformed pair must still satisfy the structure equation
    let legs = gauge::transform_coframe(&lam, &study.coframe.forms, ctx)?;
    let mut failure = None;
    for i in 0..legs.len() {
        let mut r = legs[i].d(chart, ctx)?;
        for j in 0..legs.len() {
            r = r.add(&transformed.entries[i][j].wedge(&legs[j], ctx)?, ctx)?;
        }
        if !r.is_zero(ctx)? {
            failure = Some(format!("leg {}: {}", i, r.render(chart)));
            break;
        }
    }

    let mut rec = Record::named(&study.name);
    rec.sections.push(SectionRecord {
        title: "transformation".into(),
        entries: vec![
            EntryRecord {
                key: "plane".into(),
                value: format!("({}, {})", a, b),
            },
            EntryRecord {
                key: "kind".into(),
                value: match kind {
                    GeneratorKind::Rotation => "rotation",
                    GeneratorKind::Boost => "boost",
                }
                .into(),
            },
            EntryRecord {
                key: "angle".into(),
                value: angle.to_string(),
            },
        ],
    });
    residual_check(&mut rec, "transformed-structure-equation", failure);
    rec.sections.push(matrix_section(
        "transformed connection",
        "w'",
        &transformed,
        chart,
        ctx,
    )?);
    Ok(rec)
}

fn case_patches(name: &str, chart: &Chart, ctx: &Context) -> Result<(Patch, Patch)> {
    match name {
        "monopole" => cases::weak_field::patches(chart, ctx),
        "reissner-nordstrom" => cases::reissner_nordstrom::patches(chart, &Expr::sym("e"), ctx),
        "kerr-newman" => cases::kerr_newman::patches(chart, &Expr::sym("e"), ctx),
        other => Err(Error::Unsupported(format!(
            "case '{}' carries no u(1) atlas; available: monopole, reissner-nordstrom, kerr-newman",
            other
        ))),
    }
}

pub fn atlas(name: &str) -> Result<Record> {
    let study = cases::study(name)?;
    let (chart, ctx) = (&study.chart, &study.ctx);
    let (p, q) = case_patches(name, chart, ctx)?;
    let mut rec = Record::named(&study.name);
    for patch in [&p, &q] {
        rec.patches.push(PatchRecord {
            name: patch.name.clone(),
            potential: patch.potential.render(chart),
            excluded: patch.excluded.iter().map(|l| l.label()).collect(),
        });
    }
    let forward = bundle::transition(&p, &q, chart, ctx)?;
    let backward = bundle::transition(&q, &p, chart, ctx)?;
    for t in [&forward, &backward] {
        rec.transitions.push(TransitionRecord {
            from: t.from.clone(),
            to: t.to.clone(),
            phase: t.chi.to_string(),
        });
    }
    // on a two-patch cover the triple (p, q, p) closes the cocycle: the
    // round trip must be the identity phase
    let residual = bundle::cocycle_residual(&forward.chi, &backward.chi, &Expr::zero(), ctx)?;
    rec.check(
        "cocycle-identity",
        is_zero_sym(&residual, ctx)?,
        residual.to_string(),
    );
    Ok(rec)
}

/// The quantization view of a full case run: integer conditions, Chern
/// data, axis energies, and the notes that qualify them.
pub fn quantize(name: &str) -> Result<Record> {
    let full = cases::analyze(name)?;
    Ok(Record {
        name: full.name,
        conditions: full.conditions,
        chern: full.chern,
        energies: full.energies,
        notes: full.notes,
        ..Record::default()
    })
}
