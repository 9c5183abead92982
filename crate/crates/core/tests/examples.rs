mod common;

use common::{params, representative};
use trenchfield::geometry::{build_cross_section, mesh_panels, BuildOptions, MeshPolicy, TrapFamily};
use trenchfield::math::point_segment_distance;
use trenchfield::pipeline::{analyze_analytic, scale_to_separation, Constraint, Settings};
use trenchfield::report::{reference_table, regress_entry, ToleranceProfile};
use trenchfield::sweep::{run_sweep, SweepSpec};

#[test]
fn halving_l_max_doubles_the_set_mesh() {
    let cs = build_cross_section(&representative(TrapFamily::SetSymmetric), &BuildOptions::default()).unwrap();
    let coarse = MeshPolicy::default();
    let fine = MeshPolicy {
        l_max: 0.5 * coarse.l_max,
        ..coarse
    };
    let n0 = mesh_panels(&cs, &coarse).unwrap().len() as f64;
    let n1 = mesh_panels(&cs, &fine).unwrap().len() as f64;
    assert!((n1 / n0 - 2.0).abs() <= 0.2, "{n0} -> {n1} panels");
}

#[test]
fn scaling_reaches_its_fixed_point() {
    let s = Settings::default();
    let anti = representative(TrapFamily::SetAntisymmetric);
    let at75 = scale_to_separation(&anti, &s, 75.0).unwrap();
    assert!((at75.scale - 1.0).abs() < 1e-3, "{}", at75.scale);
    let doubled = anti.scaled(2.0);
    let back = scale_to_separation(&doubled, &s, 75.0).unwrap();
    assert!((back.scale - 0.5).abs() < 1e-3, "{}", back.scale);
    assert!((back.ion - at75.ion).norm() < 0.2, "{:?} vs {:?}", back.ion, at75.ion);
}

#[test]
fn antisymmetric_set_ion_height_equals_the_separation() {
    let t = scale_to_separation(&representative(TrapFamily::SetAntisymmetric), &Settings::default(), 75.0).unwrap();
    let nearest = t
        .solution
        .mesh()
        .panels
        .iter()
        .map(|p| point_segment_distance(t.ion, p.a, p.b))
        .fold(f64::INFINITY, f64::min);
    assert!((nearest - 75.0).abs() <= 0.1, "{nearest}");
    // the ion sits over the 1 µm gap, so the nearest point is a gap edge half a micron aside
    let over_gap = (t.ion.y * t.ion.y + 0.25).sqrt();
    assert!((over_gap - nearest).abs() <= 1e-6, "ion {:?}, nearest {nearest}", t.ion);
    assert!((t.ion.y - 75.0).abs() <= 0.1);
}

/// C3' stays at 1 across `a`; C4' follows the gapless closed form, which
/// itself moves with `a`.
#[test]
fn symmetric_set_ratios_hold_across_a_at_fixed_height() {
    let mut settings = Settings::default();
    settings.constraint = Constraint::IonHeight(75.0);
    let mut fixed = settings.clone();
    fixed.constraint = Constraint::Fixed;
    let spec = SweepSpec::new(
        representative(TrapFamily::SetSymmetric),
        "a",
        vec![100.0, 161.2, 250.0],
        settings,
    )
    .unwrap();
    for row in run_sweep(&spec, 0).unwrap() {
        let r = row.report.unwrap();
        assert!((r.ion_position.y - 75.0).abs() <= 0.1);
        let c3 = r.c3_prime.unwrap();
        let c4 = r.c4_prime.unwrap();
        assert!((c3 - 1.0).abs() <= 0.02, "a = {}: C3' {c3}", row.w);
        let exact = analyze_analytic(&r.params, &fixed).unwrap();
        let c4_exact = exact.measurements.ratios.unwrap().2;
        assert!((c4 - c4_exact).abs() <= 0.02 * c4_exact, "a = {}: C4' {c4} vs {c4_exact}", row.w);
    }
}

#[test]
fn corrupted_geometry_fails_the_regression() {
    let reference = &reference_table()[4];
    let good = reference.params().unwrap();
    let settings = Settings::default();
    let clean = regress_entry(reference, &good, ToleranceProfile::Paper, &settings);
    assert!(clean.pass(), "uncorrupted symmetric stacked trench should pass");
    let bad = good.with("g", 1.2 * good.get("g")).unwrap();
    let corrupted = regress_entry(reference, &bad, ToleranceProfile::Paper, &settings);
    assert!(!corrupted.pass(), "a 20% change of g went unnoticed");
}

#[test]
fn wafer_hexapole_vanishes_and_stacked_octupole_matches() {
    let s = Settings::default();
    for family in [TrapFamily::WaferSymmetric, TrapFamily::WaferAntisymmetric] {
        let r = trenchfield::report::analyze(&representative(family), &s).unwrap();
        assert!(r.c3_prime.clone().unwrap().abs() <= 0.005, "{family}");
    }
    let anti = params(TrapFamily::StackedTrenchAntisymmetric, &[("i", 150.0), ("j", 160.0), ("xi", 300.0)]);
    let r = trenchfield::report::analyze(&anti, &s).unwrap();
    let c4 = r.c4_prime.unwrap();
    assert!((c4 - 0.407).abs() <= 0.15 * 0.407, "{c4}");
}
