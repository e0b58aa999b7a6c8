//! Weak-field monopole: an isotropic mass potential plus a gravitomagnetic
//! monopole term in the time leg,
//!
//!   e0 = (1 - m/r) dt + 2g (1 + cos(theta)) dphi
//!   e1 = (1 + m/r) dr,  e2 = (1 + m/r) r dtheta,  e3 = (1 + m/r) r sin(theta) dphi
//!
//! with `m` and `g` first-order perturbations.  The associated potential
//! one-form is singular along one half-axis per gauge; two patches related
//! by the phase `g phi` cover the sphere, and single-valuedness of
//! `exp(i g phi)` pins `g` to an integer.

use crate::bundle::{chern_form, chern_number, quantize, singular_loci, Patch};
use crate::calculus::differentiate;
use crate::cartan::field_strength_invariant;
use crate::cases::{field_check_into, verify_field_equations, CaseStudy, SourceType};
use crate::chart::{Chart, Locus};
use crate::coframe::Coframe;
use crate::context::{Assumption, Context};
use crate::error::Result;
use crate::expr::{Expr, Name};
use crate::form::{Basis, Form};
use crate::gauge::phase_transform;
use crate::normal::{is_zero_sym, linearize, simplify};
use crate::report::{
    ChernRecord, ConditionRecord, EntryRecord, PatchRecord, Record, SectionRecord,
    TransitionRecord,
};

pub const NAME: &str = "monopole";

pub fn chart() -> Chart {
    let mut chart = Chart::new("spherical", &["t", "r", "theta", "phi"]);
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
    ctx.parameter("m");
    ctx.assume("m", Assumption::Perturbation);
    ctx.set_range("m", 0.010, 0.020);
    ctx.parameter("g");
    ctx.assume("g", Assumption::Perturbation);
    ctx.set_range("g", 0.030, 0.050);
    ctx
}

pub fn coframe(chart: &Chart, ctx: &Context) -> Result<Coframe> {
    let r = Expr::sym("r");
    let m_over_r = Expr::div(Expr::sym("m"), r.clone());
    let shrink = Expr::sub(Expr::one(), m_over_r.clone());
    let swell = Expr::add(vec![Expr::one(), m_over_r]);
    let monopole = Expr::mul(vec![
        Expr::int(2),
        Expr::sym("g"),
        Expr::add(vec![Expr::one(), Expr::cos(Expr::sym("theta"))]),
    ]);
    let mut e0 = Form::component(chart, Basis::Coordinate, &[0], shrink)?;
    e0 = e0.add(
        &Form::component(chart, Basis::Coordinate, &[3], monopole)?,
        ctx,
    )?;
    let legs = vec![
        e0,
        Form::component(chart, Basis::Coordinate, &[1], swell.clone())?,
        Form::component(
            chart,
            Basis::Coordinate,
            &[2],
            Expr::mul(vec![swell.clone(), r.clone()]),
        )?,
        Form::component(
            chart,
            Basis::Coordinate,
            &[3],
            Expr::mul(vec![swell, r, Expr::sin(Expr::sym("theta"))]),
        )?,
    ];
    Coframe::new(chart, legs, ctx)
}

/// The two half-axis patches: the stored potential is regular away from the
/// upper axis; shifting its phase by `g phi` moves the string to the lower
/// axis.
pub fn patches(chart: &Chart, ctx: &Context) -> Result<(Patch, Patch)> {
    let a = potential(chart, ctx)?;
    let south = Patch::new("south", a.clone(), vec![Locus::new("theta", Expr::zero())])?;
    let a_north = phase_transform(
        &a,
        &Expr::mul(vec![Expr::sym("g"), Expr::sym("phi")]),
        chart,
        ctx,
    )?;
    let north = Patch::new("north", a_north, vec![Locus::new("theta", Expr::pi())])?;
    Ok((south, north))
}

/// The gauge potential read off the time leg: `i (m/r dt + g/2 (1 + cos) dphi)`.
pub fn potential(chart: &Chart, ctx: &Context) -> Result<Form> {
    let coulomb = Expr::div(Expr::sym("m"), Expr::sym("r"));
    let cap = Expr::mul(vec![
        Expr::div(Expr::sym("g"), Expr::int(2)),
        Expr::add(vec![Expr::one(), Expr::cos(Expr::sym("theta"))]),
    ]);
    Form::component(chart, Basis::Coordinate, &[0], coulomb)?
        .add(&Form::component(chart, Basis::Coordinate, &[3], cap)?, ctx)
        .map(|f| f.with_imaginary(true))
}

pub fn build() -> Result<CaseStudy> {
    let chart = chart();
    let ctx = context();
    let coframe = coframe(&chart, &ctx)?;
    Ok(CaseStudy {
        name: NAME.to_string(),
        chart,
        ctx,
        coframe,
        source: SourceType::LinearizedVacuum,
        relations: Vec::new(),
        rules: Vec::new(),
    })
}

fn linearize_form(f: &Form, ctx: &Context) -> Result<Form> {
    let mut out = f.clone();
    let comps = std::mem::take(&mut out.comps);
    for (idx, v) in comps {
        let lv = linearize(&v, ctx)?;
        if !lv.is_zero_lit() {
            out.comps.insert(idx, lv);
        }
    }
    Ok(out)
}

/// Flat spherical Laplacian, the operator the linear field equations reduce
/// to for a static potential.
pub fn spherical_laplacian(f: &Expr, ctx: &Context) -> Result<Expr> {
    let r = Name::new("r");
    let theta = Name::new("theta");
    let phi = Name::new("phi");
    let r2 = Expr::powi(Expr::sym("r"), 2);
    let sin = Expr::sin(Expr::sym("theta"));
    let radial = Expr::div(
        differentiate(
            &Expr::mul(vec![r2.clone(), differentiate(f, &r)?]),
            &r,
        )?,
        r2.clone(),
    );
    let polar = Expr::div(
        differentiate(
            &Expr::mul(vec![sin.clone(), differentiate(f, &theta)?]),
            &theta,
        )?,
        Expr::mul(vec![r2.clone(), sin.clone()]),
    );
    let azimuthal = Expr::div(
        differentiate(&differentiate(f, &phi)?, &phi)?,
        Expr::mul(vec![r2, Expr::powi(sin, 2)]),
    );
    simplify(&Expr::add(vec![radial, polar, azimuthal]), ctx)
}

/// First-order frame components of the potential.
pub fn frame_potential(cf: &Coframe, a: &Form, ctx: &Context) -> Result<Vec<Expr>> {
    let untagged = a.clone().with_imaginary(false);
    let frame = cf.to_frame(&untagged, ctx)?;
    let mut out = vec![Expr::zero(); 4];
    for (idx, v) in &frame.comps {
        out[idx[0] as usize] = linearize(v, ctx)?;
    }
    Ok(out)
}

pub fn analyze() -> Result<Record> {
    let case = build()?;
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
    field_check_into(&mut record, "linearized-vacuum", &check);

    // static potential solving the flat Laplace equation off the center
    let coulomb = Expr::div(Expr::sym("m"), Expr::sym("r"));
    let lap = spherical_laplacian(&coulomb, ctx)?;
    record.check(
        "scalar-potential-harmonic",
        is_zero_sym(&lap, ctx)?,
        if is_zero_sym(&lap, ctx)? {
            String::new()
        } else {
            lap.to_string()
        },
    );

    // potential and its first-order frame representation
    let a = potential(chart, ctx)?;
    record.sections.push(SectionRecord {
        title: "potential".to_string(),
        entries: vec![EntryRecord {
            key: "a".to_string(),
            value: a.render(chart),
        }],
    });
    let frame_a = frame_potential(&case.coframe, &a, ctx)?;
    let want_r = Expr::div(Expr::sym("m"), Expr::sym("r"));
    let want_phi = Expr::div(
        Expr::mul(vec![
            Expr::sym("g"),
            Expr::add(vec![Expr::one(), Expr::cos(Expr::sym("theta"))]),
        ]),
        Expr::mul(vec![
            Expr::int(2),
            Expr::sym("r"),
            Expr::sin(Expr::sym("theta")),
        ]),
    );
    let mut bad = Vec::new();
    for (i, want) in [
        (0usize, want_r),
        (1, Expr::zero()),
        (2, Expr::zero()),
        (3, want_phi),
    ] {
        let diff = simplify(&Expr::sub(frame_a[i].clone(), want), ctx)?;
        if !is_zero_sym(&diff, ctx)? {
            bad.push(format!("a[{}] off by {}", i, diff));
        }
    }
    record.check("frame-potential-first-order", bad.is_empty(), bad.join("; "));

    // two patches, each regular on one half-axis
    let (south, north) = patches(chart, ctx)?;
    let a_north = north.potential.clone();
    for p in [&south, &north] {
        record.patches.push(PatchRecord {
            name: p.name.clone(),
            potential: p.potential.render(chart),
            excluded: p.excluded.iter().map(|l| l.label()).collect(),
        });
    }
    let trans = crate::bundle::transition(&south, &north, chart, ctx)?;
    record.transitions.push(TransitionRecord {
        from: trans.from.clone(),
        to: trans.to.clone(),
        phase: trans.chi.to_string(),
    });

    let cond = quantize(&trans.chi, &Name::new("phi"), &two_pi(), chart, ctx)?;
    record.conditions.push(ConditionRecord {
        label: "transition single-valuedness".to_string(),
        coordinate: cond.coordinate.to_string(),
        period: cond.period.to_string(),
        winding: cond.winding.to_string(),
        statement: format!("{} = n", cond.winding),
    });

    // what actually diverges where: the center carries curvature, the
    // remaining half-axis of the north potential is pure gauge
    let f_coord = a.clone().with_imaginary(false).d(chart, ctx)?;
    let f_frame = linearize_form(&case.coframe.to_frame(&f_coord, ctx)?, ctx)?;
    let invariant = field_strength_invariant(&f_frame, ctx)?;
    record.sections.push(SectionRecord {
        title: "field-strength".to_string(),
        entries: vec![
            EntryRecord {
                key: "f".to_string(),
                value: f_frame.render(chart),
            },
            EntryRecord {
                key: "f^2".to_string(),
                value: invariant.to_string(),
            },
        ],
    });
    let north_frame = frame_potential(&case.coframe, &a_north, ctx)?;
    let fields: Vec<Expr> = north_frame
        .into_iter()
        .filter(|e| !e.is_zero_lit())
        .collect();
    let loci = singular_loci(&fields, &invariant, chart, ctx)?;
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
        labels == ["r = 0 [curvature]", "theta = pi [gauge]"],
        labels.join("; "),
    );

    // the integer is the flux through any sphere around the center
    let c1 = chern_form(&a, chart, ctx)?;
    let cycle = [
        (Name::new("theta"), Expr::zero(), Expr::pi()),
        (Name::new("phi"), Expr::zero(), two_pi()),
    ];
    let number = chern_number(&c1, &cycle, chart, ctx)?;
    record.chern.push(ChernRecord {
        label: "c1".to_string(),
        form: c1.render(chart),
        cycle: "theta in [0, pi], phi in [0, 2*pi]".to_string(),
        number: number.to_string(),
    });
    record.check(
        "chern-number-equals-winding",
        is_zero_sym(&Expr::sub(number.clone(), cond.winding.clone()), ctx)?,
        format!("{} vs {}", number, cond.winding),
    );

    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::LocusKind;

    #[test]
    fn linear_field_equations_hold_to_first_order() {
        let case = build().unwrap();
        let check = verify_field_equations(&case).unwrap();
        assert!(check.pass, "{:?}", check.residuals);
    }

    // doubling the mass in the time leg only breaks the isotropic balance
    #[test]
    fn unbalanced_time_leg_fails_the_linear_check() {
        let chart = chart();
        let ctx = context();
        let mut case = build().unwrap();
        let overshoot = Expr::sub(
            Expr::one(),
            Expr::div(Expr::mul(vec![Expr::int(2), Expr::sym("m")]), Expr::sym("r")),
        );
        let mut legs = case.coframe.forms.clone();
        legs[0] = Form::component(&chart, Basis::Coordinate, &[0], overshoot).unwrap();
        case.coframe = Coframe::new(&chart, legs, &ctx).unwrap();
        let check = verify_field_equations(&case).unwrap();
        assert!(!check.pass);
        assert!(!check.residuals.is_empty());
    }

    #[test]
    fn coulomb_part_is_harmonic_and_cap_part_is_not() {
        let ctx = context();
        let lap = spherical_laplacian(&Expr::div(Expr::sym("m"), Expr::sym("r")), &ctx).unwrap();
        assert!(is_zero_sym(&lap, &ctx).unwrap());
        // 1/r^2 is not harmonic: the radial operator leaves 2/r^4
        let lap2 = spherical_laplacian(
            &Expr::powi(Expr::sym("r"), -2),
            &ctx,
        )
        .unwrap();
        assert_eq!(lap2.to_string(), "2/r^4");
    }

    #[test]
    fn frame_potential_reduces_to_the_quoted_components() {
        let chart = chart();
        let ctx = context();
        let cf = coframe(&chart, &ctx).unwrap();
        let a = potential(&chart, &ctx).unwrap();
        let got = frame_potential(&cf, &a, &ctx).unwrap();
        let want = [
            "m/r",
            "0",
            "0",
            "g*(1 + cos(theta))/(2*r*sin(theta))",
        ];
        for (g, w) in got.iter().zip(want) {
            let wexpr = crate::parse::parse(w, &ctx).unwrap();
            let diff = simplify(&Expr::sub(g.clone(), wexpr), &ctx).unwrap();
            assert!(is_zero_sym(&diff, &ctx).unwrap(), "{} vs {}", g, w);
        }
    }

    #[test]
    fn patch_phase_is_linear_in_phi_with_the_charge_as_rate() {
        let chart = chart();
        let ctx = context();
        let a = potential(&chart, &ctx).unwrap();
        let south = Patch::new("south", a.clone(), vec![Locus::new("theta", Expr::zero())])
            .unwrap();
        let chi = Expr::mul(vec![Expr::sym("g"), Expr::sym("phi")]);
        let a_north = phase_transform(&a, &chi, &chart, &ctx).unwrap();
        // the north potential carries (g/2)(cos - 1), regular at theta = 0
        let north_phi = a_north.comps.get(&vec![3u8]).unwrap();
        let want = crate::parse::parse("g*(cos(theta) - 1)/2", &ctx).unwrap();
        assert!(is_zero_sym(
            &simplify(&Expr::sub(north_phi.clone(), want), &ctx).unwrap(),
            &ctx
        )
        .unwrap());
        let north = Patch::new("north", a_north, vec![Locus::new("theta", Expr::pi())]).unwrap();
        let trans = crate::bundle::transition(&south, &north, &chart, &ctx).unwrap();
        let diff = simplify(&Expr::sub(trans.chi.clone(), chi), &ctx).unwrap();
        assert!(is_zero_sym(&diff, &ctx).unwrap(), "chi = {}", trans.chi);
        let cond = quantize(&trans.chi, &Name::new("phi"), &two_pi(), &chart, &ctx).unwrap();
        assert_eq!(cond.winding.to_string(), "g");
    }

    #[test]
    fn sphere_flux_gives_the_charge_with_orientation() {
        let chart = chart();
        let ctx = context();
        let a = potential(&chart, &ctx).unwrap();
        let c1 = chern_form(&a, &chart, &ctx).unwrap();
        let cycle = [
            (Name::new("theta"), Expr::zero(), Expr::pi()),
            (Name::new("phi"), Expr::zero(), two_pi()),
        ];
        let n = chern_number(&c1, &cycle, &chart, &ctx).unwrap();
        assert_eq!(n.to_string(), "g");
        let flipped = [cycle[1].clone(), cycle[0].clone()];
        let m = chern_number(&c1, &flipped, &chart, &ctx).unwrap();
        assert_eq!(m.to_string(), "-g");
    }

    #[test]
    fn center_is_curvature_and_southern_string_is_gauge() {
        let chart = chart();
        let ctx = context();
        let cf = coframe(&chart, &ctx).unwrap();
        let a = potential(&chart, &ctx).unwrap();
        let chi = Expr::mul(vec![Expr::sym("g"), Expr::sym("phi")]);
        let a_north = phase_transform(&a, &chi, &chart, &ctx).unwrap();
        let f_coord = a.clone().with_imaginary(false).d(&chart, &ctx).unwrap();
        let f_frame = linearize_form(&cf.to_frame(&f_coord, &ctx).unwrap(), &ctx).unwrap();
        let invariant = field_strength_invariant(&f_frame, &ctx).unwrap();
        // quadratic in the charges, so it survives as -2 m^2/r^4 + g^2/(2 r^4)
        let want = crate::parse::parse("(g^2/2 - 2*m^2)/r^4", &ctx).unwrap();
        assert!(is_zero_sym(
            &simplify(&Expr::sub(invariant.clone(), want), &ctx).unwrap(),
            &ctx
        )
        .unwrap());
        let fields: Vec<Expr> = frame_potential(&cf, &a_north, &ctx)
            .unwrap()
            .into_iter()
            .filter(|e| !e.is_zero_lit())
            .collect();
        let loci = singular_loci(&fields, &invariant, &chart, &ctx).unwrap();
        let got: Vec<(String, LocusKind)> =
            loci.iter().map(|l| (l.locus.label(), l.kind)).collect();
        assert_eq!(
            got,
            vec![
                ("r = 0".to_string(), LocusKind::Curvature),
                ("theta = pi".to_string(), LocusKind::Gauge),
            ]
        );
    }

    #[test]
    fn case_record_passes_with_integer_charge_condition() {
        let record = analyze().unwrap();
        assert!(record.all_checks_pass(), "{}", record.to_text());
        assert_eq!(record.conditions[0].winding, "g");
        assert_eq!(record.conditions[0].statement, "g = n");
        assert_eq!(record.chern[0].number, "g");
        assert_eq!(record.transitions[0].phase, "g*phi");
    }
}
