//! Property checks shared by the proptest suites and the acceptance runner.
//!
//! Each property is a strategy plus a check returning `TestCaseError` on a
//! counterexample, so it can run under `proptest!` or a bare `TestRunner`.

#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config as RunnerConfig, RngAlgorithm, TestRng, TestRunner};
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;
use trenchfield::bem::{coax_mesh, solve_basis, BemSolution};
use trenchfield::field::{FieldSource, Offset};
use trenchfield::geometry::{
    build_cross_section, mesh_panels, BuildOptions, CrossSection, MeshPolicy, Role, TrapFamily, TrapParams,
};
use trenchfield::math::Sym2;
use trenchfield::multipole::{derived_ratios, fit_multipoles, fit_with, FitSettings, MultipoleFit};
use trenchfield::optics::{numerical_aperture, Direction};
use trenchfield::pseudo::{
    calibrate_rf_voltage, find_minimum, secular_frequencies, DriveConfig, IonProperties, Pseudopotential,
};
use trenchfield::sweep::{csv_string, run_sweep, SweepSpec};
use trenchfield::pipeline::Settings;
use trenchfield::{Result, Vec2};

/// A fixed-seed runner, so failures reproduce.
pub fn runner(cases: u32) -> TestRunner {
    let config = RunnerConfig {
        cases,
        failure_persistence: None,
        ..RunnerConfig::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

pub fn params(family: TrapFamily, kv: &[(&str, f64)]) -> TrapParams {
    TrapParams::new(family, kv.iter().copied()).unwrap()
}

pub fn representative(family: TrapFamily) -> TrapParams {
    match family {
        TrapFamily::SetSymmetric => params(family, &[("a", 161.2), ("b", 59.0)]),
        TrapFamily::SetAntisymmetric => params(family, &[("phi", 75.0)]),
        TrapFamily::SimpleTrenchSymmetric => params(family, &[("c", 210.0), ("d", 77.3), ("beta", 600.0)]),
        TrapFamily::SimpleTrenchAntisymmetric => params(family, &[("e", 135.2), ("f", 525.0)]),
        TrapFamily::StackedTrenchSymmetric => params(
            family,
            &[("g", 140.0), ("h", 80.0), ("epsilon", 300.0), ("mu", 150.0)],
        ),
        TrapFamily::StackedTrenchAntisymmetric => params(family, &[("i", 150.0), ("j", 160.0), ("xi", 300.0)]),
        TrapFamily::WaferSymmetric => params(family, &[("k", 50.0)]),
        TrapFamily::WaferAntisymmetric => params(family, &[("k", 53.0)]),
    }
}

/// Random dimensions for any family; some combinations do not build.
pub fn any_geometry() -> impl Strategy<Value = (TrapFamily, Vec<(&'static str, f64)>)> {
    let len = |lo: f64, hi: f64| lo..hi;
    prop_oneof![
        (len(20.0, 300.0), len(20.0, 300.0))
            .prop_map(|(a, b)| (TrapFamily::SetSymmetric, vec![("a", a), ("b", b)])),
        len(20.0, 300.0).prop_map(|phi| (TrapFamily::SetAntisymmetric, vec![("phi", phi)])),
        (len(100.0, 400.0), len(20.0, 200.0), len(50.0, 800.0)).prop_map(|(c, d, beta)| (
            TrapFamily::SimpleTrenchSymmetric,
            vec![("c", c), ("d", d), ("beta", beta)]
        )),
        (len(50.0, 300.0), len(50.0, 800.0))
            .prop_map(|(e, f)| (TrapFamily::SimpleTrenchAntisymmetric, vec![("e", e), ("f", f)])),
        (len(80.0, 300.0), len(20.0, 200.0), len(100.0, 600.0), len(50.0, 300.0)).prop_map(
            |(g, h, epsilon, mu)| (
                TrapFamily::StackedTrenchSymmetric,
                vec![("g", g), ("h", h), ("epsilon", epsilon), ("mu", mu)]
            )
        ),
        (len(80.0, 300.0), len(50.0, 300.0), len(100.0, 600.0)).prop_map(|(i, j, xi)| (
            TrapFamily::StackedTrenchAntisymmetric,
            vec![("i", i), ("j", j), ("xi", xi)]
        )),
        len(20.0, 150.0).prop_map(|k| (TrapFamily::WaferSymmetric, vec![("k", k)])),
        len(20.0, 150.0).prop_map(|k| (TrapFamily::WaferAntisymmetric, vec![("k", k)])),
    ]
}

fn build(family: TrapFamily, kv: &[(&str, f64)]) -> Option<CrossSection> {
    let p = TrapParams::new(family, kv.iter().copied()).ok()?;
    build_cross_section(&p, &BuildOptions::default()).ok()
}

// ---------------------------------------------------------------- geometry

type Edge = (Role, [i64; 4]);

fn edge_set(cs: &CrossSection, mirror: bool, swap: bool) -> Vec<Edge> {
    let q = |v: f64| (v * 1e6).round() as i64;
    let mut out: Vec<Edge> = Vec::new();
    for s in &cs.segments {
        let role = match (swap, s.role) {
            (true, Role::Rf) => Role::Dc,
            (true, Role::Dc) => Role::Rf,
            (_, r) => r,
        };
        for w in s.polyline.windows(2) {
            let (mut a, mut b) = (w[0], w[1]);
            if mirror {
                a.x = -a.x;
                b.x = -b.x;
            }
            let (a, b) = if (a.x, a.y) <= (b.x, b.y) { (a, b) } else { (b, a) };
            out.push((role, [q(a.x), q(a.y), q(b.x), q(b.y)]));
        }
    }
    out.sort();
    out
}

/// Mirroring about x = 0 maps the layout onto itself, with RF and DC
/// exchanged for antisymmetric families; electrodes of different ids keep at
/// least the gap apart; building and meshing twice gives identical meshes.
pub fn check_geometry(case: &(TrapFamily, Vec<(&'static str, f64)>)) -> std::result::Result<(), TestCaseError> {
    let (family, kv) = case;
    let Some(cs) = build(*family, kv) else {
        return Err(TestCaseError::reject("geometry does not build"));
    };
    prop_assert_eq!(edge_set(&cs, false, false), edge_set(&cs, true, !family.is_symmetric()));
    prop_assert!(cs.min_electrode_spacing() >= cs.gap - 1e-9);
    let policy = MeshPolicy::default();
    let m1 = mesh_panels(&cs, &policy).unwrap();
    let m2 = mesh_panels(&build(*family, kv).unwrap(), &policy).unwrap();
    prop_assert_eq!(m1, m2);
    Ok(())
}

// ---------------------------------------------------------------- optics

fn hits(o: Vec2, d: Vec2, len: f64, a: Vec2, b: Vec2) -> bool {
    let e = b - a;
    let denom = d.cross(e);
    let w = a - o;
    if denom.abs() < 1e-15 {
        if w.cross(d).abs() > 1e-12 {
            return false;
        }
        // collinear: project the segment onto the ray
        let (t0, t1) = (w.dot(d), (b - o).dot(d));
        return t0.max(t1) >= 0.0 && t0.min(t1) <= len;
    }
    let t = w.cross(e) / denom;
    let u = w.cross(d) / denom;
    (0.0..=len).contains(&t) && (-1e-12..=1.0 + 1e-12).contains(&u)
}

/// Half-angle of the clear cone found by casting rays: a scan of `n` angles
/// on each side of the axis, then bisection on the first blocked angle.
pub fn ray_cast_half_angle(cs: &CrossSection, ion: Vec2, up: bool, n: usize) -> f64 {
    let flip = if up { 1.0 } else { -1.0 };
    let reach = match (up, cs.domain.substrate) {
        (false, Some(y0)) => Some(ion.y - y0),
        _ => None,
    };
    let mut edges: Vec<(Vec2, Vec2)> = cs
        .segments
        .iter()
        .flat_map(|s| s.polyline.windows(2).map(|w| (w[0], w[1])).collect::<Vec<_>>())
        .collect();
    for r in &cs.domain.solids {
        let c = [
            Vec2::new(r.min.x, r.min.y),
            Vec2::new(r.max.x, r.min.y),
            Vec2::new(r.max.x, r.max.y),
            Vec2::new(r.min.x, r.max.y),
        ];
        for k in 0..4 {
            edges.push((c[k], c[(k + 1) % 4]));
        }
    }
    let blocked = |theta: f64| {
        let d = Vec2::new(theta.sin(), flip * theta.cos());
        let len = match reach {
            Some(r) => ((r - 1e-9) / theta.cos()).min(1e9),
            None => 1e9,
        };
        edges.iter().any(|&(a, b)| hits(ion, d, len, a, b))
    };
    let step = FRAC_PI_2 / n as f64;
    let mut best = FRAC_PI_2;
    for sign in [1.0, -1.0] {
        let mut prev = 0.0;
        for k in 0..n {
            let t = k as f64 * step;
            if t >= best {
                break;
            }
            if blocked(sign * t) {
                let (mut lo, mut hi) = (prev, t);
                for _ in 0..64 {
                    let mid = 0.5 * (lo + hi);
                    if blocked(sign * mid) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                best = best.min(hi);
                break;
            }
            prev = t;
        }
    }
    best
}

/// A random geometry with an ion placed anywhere in its seed box.
pub fn na_case() -> impl Strategy<Value = ((TrapFamily, Vec<(&'static str, f64)>), f64, f64)> {
    (any_geometry(), 0.05..0.95f64, 0.05..0.95f64)
}

/// The aperture matches the brute-force ray cast to 1e-6 in both directions.
pub fn check_na(case: &((TrapFamily, Vec<(&'static str, f64)>), f64, f64)) -> std::result::Result<(), TestCaseError> {
    let ((family, kv), u, v) = case;
    let Some(cs) = build(*family, kv) else {
        return Err(TestCaseError::reject("geometry does not build"));
    };
    let s = cs.seed_region;
    let ion = Vec2::new(s.min.x + u * s.width(), s.min.y + v * s.height());
    if cs.domain.excludes(ion) || cs.nearest_electrode(ion).0 < 1.0 {
        return Err(TestCaseError::reject("ion not in free space"));
    }
    for (up, dir) in [(true, Direction::Up), (false, Direction::Down)] {
        let na = numerical_aperture(&cs, ion, dir).unwrap().na;
        let oracle = ray_cast_half_angle(&cs, ion, up, 20_000).sin();
        prop_assert!(
            (na - oracle).abs() <= 1e-6,
            "{family} {kv:?} ion {ion:?} {dir:?}: na {na} vs ray cast {oracle}"
        );
    }
    Ok(())
}

// ---------------------------------------------------------------- bem

fn set_solution() -> &'static (BemSolution, Vec<String>) {
    static SOL: OnceLock<(BemSolution, Vec<String>)> = OnceLock::new();
    SOL.get_or_init(|| {
        let cs = build_cross_section(&representative(TrapFamily::SetSymmetric), &BuildOptions::default()).unwrap();
        let mesh = mesh_panels(&cs, &MeshPolicy::default()).unwrap();
        let ids = mesh.electrodes.iter().map(|e| e.0.clone()).collect();
        (solve_basis(&mesh, usize::MAX).unwrap().with_domain(cs.domain), ids)
    })
}

fn voltages(ids: &[String], v: &[f64]) -> BTreeMap<String, f64> {
    ids.iter().cloned().zip(v.iter().copied()).collect()
}

/// Free-space point above the symmetric SET, at least 20 µm off the plane.
pub fn field_point() -> impl Strategy<Value = Vec2> {
    (-400.0..400.0f64, 20.0..400.0f64).prop_map(|(x, y)| Vec2::new(x, y))
}

pub fn volts5() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, 5)
}

pub fn set_dims() -> impl Strategy<Value = (f64, f64)> {
    (30.0..300.0f64, 30.0..300.0f64)
}

/// Every basis solution reproduces its boundary values at the collocation
/// points, and the field is divergence free off the boundary.
pub fn check_laplace(case: &((f64, f64), Vec2)) -> std::result::Result<(), TestCaseError> {
    let ((a, b), p) = *case;
    let params = params(TrapFamily::SetSymmetric, &[("a", a), ("b", b)]);
    let cs = build_cross_section(&params, &BuildOptions::default()).unwrap();
    let mesh = mesh_panels(&cs, &MeshPolicy::default()).unwrap();
    let sol = solve_basis(&mesh, usize::MAX).unwrap().with_domain(cs.domain.clone());
    for (id, _) in &mesh.electrodes {
        let r = sol.boundary_residual(id).unwrap();
        prop_assert!(r <= 1e-9, "{id}: boundary residual {r:e}");
    }
    let (_, j): (Vec2, Sym2) = sol.rf_drive(1.0).field_and_jacobian(p).unwrap();
    let scale = j.xx.abs().max(j.yy.abs()).max(j.xy.abs());
    prop_assert!((j.xx + j.yy).abs() <= 1e-9 * scale, "trace {} vs {}", j.xx + j.yy, scale);
    Ok(())
}

/// Potentials and fields are linear in the electrode voltages.
pub fn check_superposition(case: &(Vec<f64>, Vec<f64>, f64, f64, Vec2)) -> std::result::Result<(), TestCaseError> {
    let (v1, v2, alpha, beta, p) = case;
    let (sol, ids) = set_solution();
    let combined: Vec<f64> = v1.iter().zip(v2).map(|(x, y)| alpha * x + beta * y).collect();
    let phi1 = sol.potential_at(*p, &voltages(ids, v1)).unwrap();
    let phi2 = sol.potential_at(*p, &voltages(ids, v2)).unwrap();
    let phi = sol.potential_at(*p, &voltages(ids, &combined)).unwrap();
    let scale = (alpha * phi1).abs() + (beta * phi2).abs() + 1e-12;
    prop_assert!((phi - (alpha * phi1 + beta * phi2)).abs() <= 1e-11 * scale);
    let e1 = sol.field_at(*p, &voltages(ids, v1)).unwrap();
    let e2 = sol.field_at(*p, &voltages(ids, v2)).unwrap();
    let e = sol.field_at(*p, &voltages(ids, &combined)).unwrap();
    let expect = e1 * *alpha + e2 * *beta;
    let scale = e1.norm() * alpha.abs() + e2.norm() * beta.abs() + 1e-15;
    prop_assert!((e - expect).norm() <= 1e-11 * scale);
    Ok(())
}

/// The analytic field equals the negative central-difference gradient of
/// the potential to relative 1e-4.
pub fn check_gradient(case: &(Vec<f64>, Vec2)) -> std::result::Result<(), TestCaseError> {
    let (v, p) = case;
    let (sol, ids) = set_solution();
    let volts = voltages(ids, v);
    let drive = sol.drive(&volts).unwrap();
    let h = 1e-3;
    let phi = |q: Vec2| drive.potential(q).unwrap();
    let fd = Vec2::new(
        -(phi(*p + Vec2::new(h, 0.0)) - phi(*p - Vec2::new(h, 0.0))) / (2.0 * h),
        -(phi(*p + Vec2::new(0.0, h)) - phi(*p - Vec2::new(0.0, h))) / (2.0 * h),
    );
    let e = drive.field(*p).unwrap();
    prop_assert!(
        (e - fd).norm() <= 1e-4 * e.norm() + 1e-12,
        "field {e:?} vs finite difference {fd:?}"
    );
    Ok(())
}

// ---------------------------------------------------------------- multipoles

/// Potential of parallel line charges, `Σ q ln|p − pᵢ|`.
pub struct LineCharges(pub Vec<(Vec2, f64)>);

impl FieldSource for LineCharges {
    fn potential(&self, p: Vec2) -> Result<f64> {
        Ok(self.0.iter().map(|&(c, q)| q * (p - c).norm().ln()).sum())
    }

    fn field(&self, p: Vec2) -> Result<Vec2> {
        Ok(self.field_and_jacobian(p)?.0)
    }

    fn field_and_jacobian(&self, p: Vec2) -> Result<(Vec2, Sym2)> {
        let mut e = Vec2::ZERO;
        let mut j = Sym2::default();
        for &(c, q) in &self.0 {
            let d = p - c;
            let r2 = d.norm_sq();
            e = e + d * (-q / r2);
            j.xx += -q * (r2 - 2.0 * d.x * d.x) / (r2 * r2);
            j.yy += -q * (r2 - 2.0 * d.y * d.y) / (r2 * r2);
            j.xy += 2.0 * q * d.x * d.y / (r2 * r2);
        }
        Ok((e, j))
    }
}

/// Line charges 3 to 6 radii from the origin, with a rotation angle and a
/// constant offset.
pub fn multipole_case() -> impl Strategy<Value = (Vec<(f64, f64, f64)>, f64, f64)> {
    (
        prop::collection::vec((3.0..6.0f64, 0.0..2.0 * PI, -1.0..1.0f64), 2..6),
        0.0..2.0 * PI,
        -100.0..100.0f64,
    )
}

fn charges(raw: &[(f64, f64, f64)], r0: f64, rotation: f64) -> LineCharges {
    LineCharges(
        raw.iter()
            .map(|&(r, t, q)| (Vec2::from_polar(r * r0, t + rotation), q))
            .collect(),
    )
}

fn fit(source: &impl FieldSource, r0: f64) -> MultipoleFit {
    fit_multipoles(source, Vec2::ZERO, r0, 1.0, 6, 0.2 * r0, 64).unwrap()
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Rotating the sources by γ keeps every C_n and shifts φ_n by −nγ; adding
/// a constant potential changes only the offset term.
pub fn check_multipole_covariance(case: &(Vec<(f64, f64, f64)>, f64, f64)) -> std::result::Result<(), TestCaseError> {
    let (raw, gamma, offset) = case;
    let r0 = 75.0;
    let base = fit(&charges(raw, r0, 0.0), r0);
    let turned = fit(&charges(raw, r0, *gamma), r0);
    let shifted = fit(
        &Offset {
            inner: charges(raw, r0, 0.0),
            volts: *offset,
        },
        r0,
    );
    let top = base.c[1..].iter().fold(0.0f64, |m, &c| m.max(c));
    for n in 1..=4 {
        prop_assert!((base.c[n] - turned.c[n]).abs() <= 1e-6 * top, "C{n} under rotation");
        prop_assert!((base.c[n] - shifted.c[n]).abs() <= 1e-9 * top, "C{n} under offset");
        if base.c[n] > 1e-3 * top {
            let expect = base.phi[n] - n as f64 * gamma;
            prop_assert!(angle_gap(turned.phi[n], expect) <= 1e-5, "phase {n}");
        }
    }
    prop_assert!((shifted.v_off - base.v_off - offset).abs() <= 1e-9 * (1.0 + offset.abs()));
    Ok(())
}

// ---------------------------------------------------------------- scaling

/// Ion position, `(C₂, C₃′, C₄′)` and the RF amplitude for 4 MHz of a mesh
/// scaled by `s`.
pub struct ScaledTrap {
    pub ion: Vec2,
    pub ratios: (f64, f64, f64),
    pub rf_voltage: f64,
}

pub fn scaled_trap(params: &TrapParams, s: f64) -> ScaledTrap {
    let cs = build_cross_section(params, &BuildOptions::default()).unwrap();
    let mesh = mesh_panels(&cs, &MeshPolicy::default()).unwrap().scaled(s);
    let sol = solve_basis(&mesh, usize::MAX).unwrap().with_domain(cs.domain.scaled(s));
    let rf = sol.rf_drive(1.0);
    let ion = find_minimum(&rf, cs.seed_region.scaled(s)).unwrap();
    let r0 = s * cs.nearest_electrode(ion * (1.0 / s)).0;
    let fit = fit_with(&rf, ion, r0, 1.0, &FitSettings::default()).unwrap();
    let ion_props = IonProperties::default();
    let rf_voltage = calibrate_rf_voltage(&rf, &ion_props, 40.0, 4.0, ion).unwrap();
    ScaledTrap {
        ion,
        ratios: derived_ratios(&fit).unwrap(),
        rf_voltage,
    }
}

fn unit_scaled(family: TrapFamily) -> &'static ScaledTrap {
    static CACHE: OnceLock<Vec<(TrapFamily, ScaledTrap)>> = OnceLock::new();
    let all = CACHE.get_or_init(|| {
        SCALE_FAMILIES
            .iter()
            .map(|&f| (f, scaled_trap(&representative(f), 1.0)))
            .collect()
    });
    &all.iter().find(|(f, _)| *f == family).unwrap().1
}

pub const SCALE_FAMILIES: [TrapFamily; 3] = [
    TrapFamily::SetSymmetric,
    TrapFamily::SetAntisymmetric,
    TrapFamily::SimpleTrenchAntisymmetric,
];

pub fn scale_case() -> impl Strategy<Value = (usize, f64)> {
    (0..SCALE_FAMILIES.len(), 0.4..3.0f64)
}

/// Scaling every length by s moves the ion to s·ion, leaves the multipole
/// ratios unchanged and needs s² times the RF amplitude for the same
/// secular frequency.
pub fn check_scaling(case: &(usize, f64)) -> std::result::Result<(), TestCaseError> {
    let (k, s) = *case;
    let family = SCALE_FAMILIES[k];
    let one = unit_scaled(family);
    let big = scaled_trap(&representative(family), s);
    prop_assert!((big.ion - one.ion * s).norm() <= 1e-6 * s * one.ion.norm(), "ion position");
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-3);
    prop_assert!(rel(big.ratios.0, one.ratios.0) <= 1e-3, "C2");
    prop_assert!(rel(big.ratios.1, one.ratios.1) <= 1e-3, "C3'");
    prop_assert!(rel(big.ratios.2, one.ratios.2) <= 1e-3, "C4'");
    prop_assert!(
        rel(big.rf_voltage / one.rf_voltage, s * s) <= 1e-3,
        "voltage ratio {} vs s² {}",
        big.rf_voltage / one.rf_voltage,
        s * s
    );
    Ok(())
}

// ---------------------------------------------------------------- fixed checks

/// Worst relative error in potential and field of the coaxial capacitor
/// (50/200 µm) with `n` panels per circle, against `ln(b/r)/ln(b/a)`.
pub fn coax_error(n: usize) -> f64 {
    let (a, b) = (50.0, 200.0);
    let sol = solve_basis(&coax_mesh(a, b, n), usize::MAX).unwrap();
    let v = BTreeMap::from([("inner".to_string(), 1.0)]);
    let log = (b / a).ln();
    let mut worst = 0.0f64;
    for r in [60.0, 100.0, 140.0, 180.0] {
        for t in [0.3, 2.0, 3.7, 5.5] {
            let p = Vec2::from_polar(r, t);
            let phi = sol.potential_at(p, &v).unwrap();
            let e = sol.field_at(p, &v).unwrap();
            let exact_phi = (b / r).ln() / log;
            let exact_e = 1.0 / (r * log);
            worst = worst
                .max((phi - exact_phi).abs() / exact_phi)
                .max((e.norm() - exact_e).abs() / exact_e);
        }
    }
    worst
}

/// Coax errors at 64, 128, 256 and 512 panels.
pub fn coax_errors() -> Vec<f64> {
    [64, 128, 256, 512].iter().map(|&n| coax_error(n)).collect()
}

/// CSV of a three-row symmetric SET sweep over `a` on `jobs` workers.
pub fn sweep_csv(jobs: usize) -> String {
    let spec = SweepSpec::new(
        representative(TrapFamily::SetSymmetric),
        "a",
        vec![120.0, 161.2, 200.0],
        Settings::default(),
    )
    .unwrap();
    csv_string(&spec, &run_sweep(&spec, jobs).unwrap())
}

/// Relative error of the lower secular frequency after calibrating to 4 MHz.
pub fn calibration_error(params: &TrapParams) -> f64 {
    let cs = build_cross_section(params, &BuildOptions::default()).unwrap();
    let mesh = mesh_panels(&cs, &MeshPolicy::default()).unwrap();
    let sol = solve_basis(&mesh, usize::MAX).unwrap().with_domain(cs.domain.clone());
    let rf = sol.rf_drive(1.0);
    let ion = find_minimum(&rf, cs.seed_region).unwrap();
    let props = IonProperties::default();
    let v = calibrate_rf_voltage(&rf, &props, 40.0, 4.0, ion).unwrap();
    let drive = DriveConfig {
        rf_frequency_mhz: 40.0,
        rf_voltage: v,
    };
    let psi = Pseudopotential::new(&rf, &drive, &props);
    let [low, _] = secular_frequencies(&psi, &props, ion).unwrap();
    (low.frequency_mhz - 4.0).abs() / 4.0
}
