//! Charged static black hole in horizon-factored form,
//!
//!   e0 = sqrt(r - r_minus) sqrt(r - r_plus) / r dt
//!   e1 = r / (sqrt(r - r_minus) sqrt(r - r_plus)) dr
//!   e2 = r dtheta,  e3 = r sin(theta) dphi
//!
//! with the horizon radii tied to mass and charge by
//! `r_minus/plus = m -/+ sqrt(m^2 - e^2)`.  The Coulomb potential `e/r dt`
//! is regularized at each horizon by a different phase choice; the two
//! choices differ by `e (1/r_minus - 1/r_plus) t`, and single-valuedness in
//! the periodic time coordinate forces `2 sqrt(m^2 - e^2)/e` to an integer.

use crate::bundle::{
    chern_form, chern_form_unnormalized, chern_number, quantize, singular_loci, Patch,
    QuantizationCondition,
};
use crate::calculus::substitute;
use crate::cartan::{curvature, kretschmann, solve_connection};
use crate::cases::{field_check_into, verify_field_equations, CaseStudy, SourceType};
use crate::chart::{Chart, Locus};
use crate::coframe::Coframe;
use crate::context::{Assumption, Context};
use crate::error::{Error, Result};
use crate::expr::{Expr, Name};
use crate::form::{Basis, Form};
use crate::gauge::phase_transform;
use crate::normal::{is_zero_sym, simplify};
use crate::report::{
    ChernRecord, ConditionRecord, EntryRecord, PatchRecord, Record, SectionRecord,
    TransitionRecord,
};

pub const NAME: &str = "reissner-nordstrom";

pub fn chart() -> Chart {
    let mut chart = Chart::new("static-spherical", &["t", "r", "theta", "phi"]);
    chart.set_period("t", two_pi());
    chart.set_period("phi", two_pi());
    chart.exclude(Locus::new("r", Expr::zero()));
    chart
}

fn two_pi() -> Expr {
    Expr::mul(vec![Expr::int(2), Expr::pi()])
}

pub fn context() -> Context {
    let mut ctx = Context::new();
    for c in ["t", "r", "theta", "phi"] {
        ctx.coordinate(c);
    }
    // sampling keeps r outside the outer horizon so the root factors stay
    // positive
    ctx.set_range("r", 3.0, 3.5);
    ctx.set_range("theta", 0.2, 2.9);
    for (p, lo, hi) in [
        ("m", 1.2, 1.6),
        ("e", 0.3, 0.9),
        ("r_minus", 0.1, 0.2),
        ("r_plus", 2.5, 2.8),
    ] {
        ctx.parameter(p);
        ctx.assume(p, Assumption::Positive);
        ctx.set_range(p, lo, hi);
    }
    ctx
}

fn root_product() -> Expr {
    Expr::mul(vec![
        Expr::sqrt(Expr::sub(Expr::sym("r"), Expr::sym("r_minus"))),
        Expr::sqrt(Expr::sub(Expr::sym("r"), Expr::sym("r_plus"))),
    ])
}

pub fn coframe(chart: &Chart, ctx: &Context) -> Result<Coframe> {
    let r = Expr::sym("r");
    let legs = vec![
        Form::component(
            chart,
            Basis::Coordinate,
            &[0],
            Expr::div(root_product(), r.clone()),
        )?,
        Form::component(
            chart,
            Basis::Coordinate,
            &[1],
            Expr::div(r.clone(), root_product()),
        )?,
        Form::component(chart, Basis::Coordinate, &[2], r.clone())?,
        Form::component(
            chart,
            Basis::Coordinate,
            &[3],
            Expr::mul(vec![r, Expr::sin(Expr::sym("theta"))]),
        )?,
    ];
    Coframe::new(chart, legs, ctx)
}

/// Horizon radii in terms of the mass and the given charge expression.
pub fn relations(charge: &Expr) -> Vec<(Name, Expr)> {
    let root = Expr::sqrt(Expr::sub(
        Expr::powi(Expr::sym("m"), 2),
        Expr::powi(charge.clone(), 2),
    ));
    vec![
        (Name::new("r_minus"), Expr::sub(Expr::sym("m"), root.clone())),
        (Name::new("r_plus"), Expr::add(vec![Expr::sym("m"), root])),
    ]
}

pub fn potential(chart: &Chart, charge: &Expr) -> Result<Form> {
    Form::component(
        chart,
        Basis::Coordinate,
        &[0],
        Expr::div(charge.clone(), Expr::sym("r")),
    )
    .map(|f| f.with_imaginary(true))
}

/// Builds the case for a given charge expression; an uncharged configuration
/// has no potential to patch and is rejected.
pub fn build(charge: &Expr) -> Result<CaseStudy> {
    let chart = chart();
    let ctx = context();
    if is_zero_sym(charge, &ctx)? {
        return Err(Error::CaseRejected(
            "vanishing charge: no gauge potential, nothing to quantize".into(),
        ));
    }
    let coframe = coframe(&chart, &ctx)?;
    let source = SourceType::Electrovac(potential(&chart, charge)?);
    Ok(CaseStudy {
        name: NAME.to_string(),
        chart,
        ctx,
        coframe,
        source,
        relations: relations(charge),
        rules: Vec::new(),
    })
}

/// The two horizon-regular potentials: the Coulomb form shifted by the
/// phase `(charge/r_h) t` vanishes at `r = r_h`.
pub fn patches(chart: &Chart, charge: &Expr, ctx: &Context) -> Result<(Patch, Patch)> {
    let a = potential(chart, charge)?;
    let shift = |horizon: &str| -> Result<Form> {
        phase_transform(
            &a,
            &Expr::mul(vec![
                Expr::div(charge.clone(), Expr::sym(horizon)),
                Expr::sym("t"),
            ]),
            chart,
            ctx,
        )
    };
    let inner = Patch::new(
        "inner",
        shift("r_minus")?,
        vec![Locus::new("r", Expr::sym("r_plus"))],
    )?;
    let outer = Patch::new(
        "outer",
        shift("r_plus")?,
        vec![Locus::new("r", Expr::sym("r_minus"))],
    )?;
    Ok((inner, outer))
}

/// The integer condition: winding of the inner/outer transition phase over
/// the periodic time coordinate, and its closed form in mass and charge.
pub fn charge_condition(
    chart: &Chart,
    charge: &Expr,
    ctx: &Context,
) -> Result<(QuantizationCondition, Expr)> {
    let (inner, outer) = patches(chart, charge, ctx)?;
    let trans = crate::bundle::transition(&outer, &inner, chart, ctx)?;
    let cond = quantize(&trans.chi, &Name::new("t"), &two_pi(), chart, ctx)?;
    let mut closed = cond.winding.clone();
    for (name, value) in relations(charge) {
        closed = substitute(&closed, &name, &value)?;
    }
    Ok((cond, simplify(&closed, ctx)?))
}

pub fn analyze() -> Result<Record> {
    let charge = Expr::sym("e");
    let case = build(&charge)?;
    let ctx = &case.ctx;
    let chart = &case.chart;
    let mut record = Record::named(NAME);

    record.sections.push(SectionRecord {
        title: "coframe".to_string(),
        entries: case
            .coframe
            .forms
            .iter()
            .enumerate()
            .map(|(a, f)| EntryRecord {
                key: format!("e[{}]", a),
                value: f.render(chart),
            })
            .collect(),
    });

    let check = verify_field_equations(&case)?;
    field_check_into(&mut record, "einstein-maxwell", &check);

    // frame representation of the Coulomb potential and its gauged forms
    let a = potential(chart, &charge)?;
    let frame_of = |f: &Form| -> Result<Expr> {
        let fr = case.coframe.to_frame(&f.clone().with_imaginary(false), ctx)?;
        Ok(fr.comps.get(&vec![0u8]).cloned().unwrap_or_else(Expr::zero))
    };
    let golden = [
        (
            "a",
            a.clone(),
            "e/(sqrt(r - r_minus)*sqrt(r - r_plus))",
        ),
        (
            "a_inner",
            phase_transform(
                &a,
                &Expr::mul(vec![
                    Expr::div(charge.clone(), Expr::sym("r_minus")),
                    Expr::sym("t"),
                ]),
                chart,
                ctx,
            )?,
            "-e*sqrt(r - r_minus)/(r_minus*sqrt(r - r_plus))",
        ),
        (
            "a_outer",
            phase_transform(
                &a,
                &Expr::mul(vec![
                    Expr::div(charge.clone(), Expr::sym("r_plus")),
                    Expr::sym("t"),
                ]),
                chart,
                ctx,
            )?,
            "-e*sqrt(r - r_plus)/(r_plus*sqrt(r - r_minus))",
        ),
    ];
    let mut frame_entries = Vec::new();
    let mut bad = Vec::new();
    let mut frame_fields = Vec::new();
    for (label, form, want) in &golden {
        let got = frame_of(form)?;
        let want_expr = crate::parse::parse(want, ctx)?;
        let diff = simplify(&Expr::sub(got.clone(), want_expr), ctx)?;
        if !is_zero_sym(&diff, ctx)? {
            bad.push(format!("{} off by {}", label, diff));
        }
        frame_entries.push(EntryRecord {
            key: format!("{} on e0", label),
            value: got.to_string(),
        });
        frame_fields.push(got);
    }
    record.sections.push(SectionRecord {
        title: "frame-potentials".to_string(),
        entries: frame_entries,
    });
    record.check("frame-potentials-closed-form", bad.is_empty(), bad.join("; "));

    // patches and the transition phase between them
    let (inner, outer) = patches(chart, &charge, ctx)?;
    for p in [&inner, &outer] {
        record.patches.push(PatchRecord {
            name: p.name.clone(),
            potential: p.potential.render(chart),
            excluded: p.excluded.iter().map(|l| l.label()).collect(),
        });
    }
    let trans = crate::bundle::transition(&outer, &inner, chart, ctx)?;
    record.transitions.push(TransitionRecord {
        from: trans.from.clone(),
        to: trans.to.clone(),
        phase: trans.chi.to_string(),
    });

    let (cond, closed) = charge_condition(chart, &charge, ctx)?;
    record.conditions.push(ConditionRecord {
        label: "transition single-valuedness".to_string(),
        coordinate: cond.coordinate.to_string(),
        period: cond.period.to_string(),
        winding: closed.to_string(),
        statement: format!("{} = n", closed),
    });
    record.check(
        "winding-closed-form",
        closed.to_string() == "2*sqrt(-e^2 + m^2)/e",
        closed.to_string(),
    );

    // extremal balance: equal mass and charge close both horizons onto one
    // radius and the integer drops to zero
    let extremal = simplify(&substitute(&closed, &Name::new("e"), &Expr::sym("m"))?, ctx)?;
    record.check(
        "extremal-limit-uncharged-winding",
        extremal.is_zero_lit(),
        format!("winding at e = m: {}", extremal),
    );

    // locate and classify every divergence of the potentials
    let conn = solve_connection(&case.coframe, chart, ctx)?;
    let curv = curvature(&conn, &case.coframe, chart, ctx)?;
    let invariant = kretschmann(&curv, ctx)?;
    record.sections.push(SectionRecord {
        title: "invariants".to_string(),
        entries: vec![EntryRecord {
            key: "kretschmann".to_string(),
            value: invariant.to_string(),
        }],
    });
    let loci = singular_loci(&frame_fields, &invariant, chart, ctx)?;
    for l in &loci {
        record.loci.push(crate::report::LocusRecord {
            locus: l.locus.label(),
            kind: l.kind.to_string(),
            detail: l.detail.clone(),
        });
    }
    let labels: Vec<String> = loci
        .iter()
        .map(|l| format!("{} [{}]", l.locus.label(), l.kind))
        .collect();
    record.check(
        "loci-classified",
        labels
            == [
                "r = 0 [curvature]",
                "r = r_minus [gauge]",
                "r = r_plus [gauge]",
            ],
        labels.join("; "),
    );

    // Chern data over the annulus between the horizons
    let c1 = chern_form(&a, chart, ctx)?;
    let unnorm = chern_form_unnormalized(&a, chart, ctx)?;
    let cycle = [
        (Name::new("t"), Expr::zero(), two_pi()),
        (Name::new("r"), Expr::sym("r_minus"), Expr::sym("r_plus")),
    ];
    let number = chern_number(&c1, &cycle, chart, ctx)?;
    let mut closed_number = number.clone();
    for (name, value) in relations(&charge) {
        closed_number = substitute(&closed_number, &name, &value)?;
    }
    let closed_number = simplify(&closed_number, ctx)?;
    record.chern.push(ChernRecord {
        label: "c1".to_string(),
        form: c1.render(chart),
        cycle: "t in [0, 2*pi], r in [r_minus, r_plus]".to_string(),
        number: closed_number.to_string(),
    });
    let raw_number = chern_number(&unnorm, &cycle, chart, ctx)?;
    record.chern.push(ChernRecord {
        label: "curvature-form".to_string(),
        form: unnorm.render(chart),
        cycle: "t in [0, 2*pi], r in [r_minus, r_plus]".to_string(),
        number: raw_number.to_string(),
    });
    record.check(
        "chern-number-is-minus-winding",
        is_zero_sym(
            &Expr::add(vec![closed_number.clone(), closed.clone()]),
            ctx,
        )?,
        format!("{} vs -({})", closed_number, closed),
    );
    record.notes.push(
        "the normalized c1 integral equals -n and the unnormalized curvature integral -2*pi*n \
         once the winding is pinned to n"
            .to_string(),
    );

    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{eval, NumEnv};

    #[test]
    fn coulomb_sources_exactly_the_factored_geometry() {
        let case = build(&Expr::sym("e")).unwrap();
        let check = verify_field_equations(&case).unwrap();
        assert!(check.pass, "{:?}", check.residuals);
    }

    #[test]
    fn horizon_product_identities_close_the_system() {
        let ctx = context();
        // r_minus r_plus = e^2 and r_minus + r_plus = 2m under the relations
        let product = Expr::mul(vec![Expr::sym("r_minus"), Expr::sym("r_plus")]);
        let total = Expr::add(vec![Expr::sym("r_minus"), Expr::sym("r_plus")]);
        for (expr, want) in [
            (product, Expr::powi(Expr::sym("e"), 2)),
            (total, Expr::mul(vec![Expr::int(2), Expr::sym("m")])),
        ] {
            let mut closed = expr;
            for (name, value) in relations(&Expr::sym("e")) {
                closed = substitute(&closed, &name, &value).unwrap();
            }
            let diff = simplify(&Expr::sub(closed, want), &ctx).unwrap();
            assert!(is_zero_sym(&diff, &ctx).unwrap(), "left {}", diff);
        }
    }

    #[test]
    fn gauged_potentials_vanish_on_their_horizons() {
        let chart = chart();
        let ctx = context();
        let cf = coframe(&chart, &ctx).unwrap();
        let (inner, outer) = patches(&chart, &Expr::sym("e"), &ctx).unwrap();
        // the inner potential pulls back to zero at r = r_minus
        for (p, horizon) in [(&inner, "r_minus"), (&outer, "r_plus")] {
            let frame = cf
                .to_frame(&p.potential.clone().with_imaginary(false), &ctx)
                .unwrap();
            let comp = frame.comps.get(&vec![0u8]).unwrap();
            let at = substitute(comp, &Name::new("r"), &Expr::sym(horizon)).unwrap();
            assert!(
                is_zero_sym(&simplify(&at, &ctx).unwrap(), &ctx).unwrap(),
                "{} at {}",
                p.name,
                horizon
            );
        }
    }

    #[test]
    fn transition_winding_reduces_to_the_closed_form() {
        let chart = chart();
        let ctx = context();
        let (cond, closed) = charge_condition(&chart, &Expr::sym("e"), &ctx).unwrap();
        // r-plus/minus form first
        let want = crate::parse::parse("e*(1/r_minus - 1/r_plus)", &ctx).unwrap();
        let diff = simplify(&Expr::sub(cond.winding.clone(), want), &ctx).unwrap();
        assert!(is_zero_sym(&diff, &ctx).unwrap(), "winding {}", cond.winding);
        assert_eq!(closed.to_string(), "2*sqrt(-e^2 + m^2)/e");
        // numeric confirmation at m = 1.25, e = 1: winding = 2 * 0.75 / 1
        let mut env = NumEnv::new();
        env.set("m", 1.25).set("e", 1.0);
        let v = eval(&closed, &env).unwrap();
        assert!((v - 1.5).abs() < 1e-12);
    }

    #[test]
    fn extremal_and_uncharged_limits() {
        let chart = chart();
        let ctx = context();
        let (_, closed) = charge_condition(&chart, &Expr::sym("m"), &ctx).unwrap();
        assert!(closed.is_zero_lit(), "extremal winding {}", closed);
        assert!(matches!(
            build(&Expr::zero()),
            Err(Error::CaseRejected(_))
        ));
        let m_minus_m = Expr::sub(Expr::sym("m"), Expr::sym("m"));
        assert!(matches!(build(&m_minus_m), Err(Error::CaseRejected(_))));
    }

    #[test]
    fn chern_integral_is_minus_the_winding() {
        let chart = chart();
        let ctx = context();
        let a = potential(&chart, &Expr::sym("e")).unwrap();
        let unnorm = chern_form_unnormalized(&a, &chart, &ctx).unwrap();
        assert_eq!(unnorm.render(&chart), "(-e/r^2) dt^dr");
        let c1 = chern_form(&a, &chart, &ctx).unwrap();
        let cycle = [
            (Name::new("t"), Expr::zero(), two_pi()),
            (Name::new("r"), Expr::sym("r_minus"), Expr::sym("r_plus")),
        ];
        let number = chern_number(&c1, &cycle, &chart, &ctx).unwrap();
        let want = crate::parse::parse("-e*(1/r_minus - 1/r_plus)", &ctx).unwrap();
        let diff = simplify(&Expr::sub(number.clone(), want), &ctx).unwrap();
        assert!(is_zero_sym(&diff, &ctx).unwrap(), "integral {}", number);
        // the unnormalized integral carries the 2 pi
        let raw = chern_number(&unnorm, &cycle, &chart, &ctx).unwrap();
        let want_raw = crate::parse::parse("-2*pi*e*(1/r_minus - 1/r_plus)", &ctx).unwrap();
        let diff = simplify(&Expr::sub(raw, want_raw), &ctx).unwrap();
        assert!(is_zero_sym(&diff, &ctx).unwrap());
    }

    #[test]
    fn center_diverges_and_horizons_are_gauge() {
        let chart = chart();
        let ctx = context();
        let cf = coframe(&chart, &ctx).unwrap();
        let conn = solve_connection(&cf, &chart, &ctx).unwrap();
        let curv = curvature(&conn, &cf, &chart, &ctx).unwrap();
        let k = kretschmann(&curv, &ctx).unwrap();
        // numeric: K stays finite on both horizons and blows up at the center
        let rm = 2f64.sqrt() - 1.0;
        let rp = 2f64.sqrt() + 1.0;
        let k_at = |r: f64| -> f64 {
            let mut env = NumEnv::new();
            env.set("r", r).set("r_minus", rm).set("r_plus", rp);
            eval(&k, &env).unwrap()
        };
        assert!(k_at(rp).is_finite() && k_at(rm).is_finite());
        assert!(k_at(1e-3 * rp).abs() / k_at(rp).abs() > 1e6);

        let a = potential(&chart, &Expr::sym("e")).unwrap();
        let base = cf
            .to_frame(&a.with_imaginary(false), &ctx)
            .unwrap()
            .comps
            .get(&vec![0u8])
            .cloned()
            .unwrap();
        let (inner, outer) = patches(&chart, &Expr::sym("e"), &ctx).unwrap();
        let mut fields = vec![base];
        for p in [&inner, &outer] {
            fields.push(
                cf.to_frame(&p.potential.clone().with_imaginary(false), &ctx)
                    .unwrap()
                    .comps
                    .get(&vec![0u8])
                    .cloned()
                    .unwrap(),
            );
        }
        let loci = singular_loci(&fields, &k, &chart, &ctx).unwrap();
        let got: Vec<String> = loci
            .iter()
            .map(|l| format!("{} [{}]", l.locus.label(), l.kind))
            .collect();
        assert_eq!(
            got,
            vec!["r = 0 [curvature]", "r = r_minus [gauge]", "r = r_plus [gauge]"]
        );
    }

    #[test]
    fn case_record_passes_with_the_integer_condition() {
        let record = analyze().unwrap();
        assert!(record.all_checks_pass(), "{}", record.to_text());
        assert_eq!(record.conditions[0].statement, "2*sqrt(-e^2 + m^2)/e = n");
        assert_eq!(record.chern[0].number, "-2*sqrt(-e^2 + m^2)/e");
    }
}
