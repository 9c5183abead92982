//! Ponderomotive pseudopotential: trap minimum, escape saddle, secular
//! frequencies and RF-voltage calibration.
//!
//! `Ψ = Z² e² |E|² / (4 m Ω²)`, reported in eV with `E` the RF field amplitude.

use crate::error::{Error, Result};
use crate::field::FieldSource;
use crate::math::{solve2, Rect, Sym2, Vec2, ATOMIC_MASS_UNIT, ELEMENTARY_CHARGE, UM_PER_M};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IonProperties {
    pub mass_amu: f64,
    pub charge: u32,
}

impl Default for IonProperties {
    fn default() -> Self {
        Self {
            mass_amu: 40.0,
            charge: 1,
        }
    }
}

impl IonProperties {
    pub fn mass_kg(&self) -> f64 {
        self.mass_amu * ATOMIC_MASS_UNIT
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass_amu > 0.0) || !self.mass_amu.is_finite() || self.charge == 0 {
            return Err(Error::InvalidConfig(
                "ion mass must be positive and charge a positive integer".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    /// Ω/2π in MHz.
    pub rf_frequency_mhz: f64,
    /// RF amplitude in volts.
    pub rf_voltage: f64,
}

impl Default for DriveConfig {
    fn default() -> Self {
        Self {
            rf_frequency_mhz: 40.0,
            rf_voltage: 1.0,
        }
    }
}

impl DriveConfig {
    pub fn omega(&self) -> f64 {
        2.0 * PI * self.rf_frequency_mhz * 1e6
    }
}

/// `Ψ / |E|²` in eV per (V/µm)².
pub fn psi_coefficient(ion: &IonProperties, rf_frequency_mhz: f64) -> f64 {
    let z = ion.charge as f64;
    let omega = 2.0 * PI * rf_frequency_mhz * 1e6;
    z * z * ELEMENTARY_CHARGE * UM_PER_M * UM_PER_M / (4.0 * ion.mass_kg() * omega * omega)
}

/// Pseudopotential (eV) at `p` for the unit-RF field `rf` driven at `drive`.
pub fn pseudopotential_at<F: FieldSource + ?Sized>(
    rf: &F,
    p: Vec2,
    drive: &DriveConfig,
    ion: &IonProperties,
) -> Result<f64> {
    let e = rf.field(p)?;
    Ok(psi_coefficient(ion, drive.rf_frequency_mhz) * drive.rf_voltage.powi(2) * e.norm_sq())
}

/// A scalar energy surface with an analytic gradient (eV, µm).
pub trait Landscape: Sync {
    fn value(&self, p: Vec2) -> Result<f64>;
    fn gradient(&self, p: Vec2) -> Result<Vec2>;
}

/// The pseudopotential of a unit-RF field source at a given drive.
pub struct Pseudopotential<F> {
    pub rf: F,
    /// `psi_coefficient · V²`.
    pub scale: f64,
}

impl<F: FieldSource> Pseudopotential<F> {
    pub fn new(rf: F, drive: &DriveConfig, ion: &IonProperties) -> Self {
        Self {
            rf,
            scale: psi_coefficient(ion, drive.rf_frequency_mhz) * drive.rf_voltage.powi(2),
        }
    }
}

impl<F: FieldSource> Landscape for Pseudopotential<F> {
    fn value(&self, p: Vec2) -> Result<f64> {
        Ok(self.scale * self.rf.field(p)?.norm_sq())
    }

    fn gradient(&self, p: Vec2) -> Result<Vec2> {
        let (e, j) = self.rf.field_and_jacobian(p)?;
        // ∇|E|² = 2 Jᵀ E, and J is symmetric
        Ok(Vec2::new(j.xx * e.x + j.xy * e.y, j.xy * e.x + j.yy * e.y) * (2.0 * self.scale))
    }
}

const PRESCAN: usize = 25;

/// Locates the single RF null inside `seed`.
///
/// Interior local minima of `|E|²` on a 25×25 grid seed a damped Newton
/// iteration on `E = 0` using the analytic Jacobian. Distinct converged nulls
/// inside the box are counted.
pub fn find_minimum<F: FieldSource + ?Sized>(rf: &F, seed: Rect) -> Result<Vec2> {
    let n = PRESCAN;
    let at = |i: usize, j: usize| {
        Vec2::new(
            seed.min.x + seed.width() * i as f64 / (n - 1) as f64,
            seed.min.y + seed.height() * j as f64 / (n - 1) as f64,
        )
    };
    let mut grid = vec![f64::INFINITY; n * n];
    let mut scale: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            if let Ok(e) = rf.field(at(i, j)) {
                grid[j * n + i] = e.norm_sq();
                scale = scale.max(e.norm());
            }
        }
    }
    if scale == 0.0 {
        return Err(Error::NoMinimumFound);
    }
    let mut starts = Vec::new();
    for j in 1..n - 1 {
        for i in 1..n - 1 {
            let v = grid[j * n + i];
            if !v.is_finite() {
                continue;
            }
            let lowest = (j - 1..=j + 1)
                .flat_map(|jj| (i - 1..=i + 1).map(move |ii| (ii, jj)))
                .filter(|&(ii, jj)| (ii, jj) != (i, j))
                .all(|(ii, jj)| v < grid[jj * n + ii]);
            if lowest {
                starts.push(at(i, j));
            }
        }
    }
    let tol = 1e-12 * scale;
    let merge = 1e-4 * seed.width().hypot(seed.height());
    let mut found: Vec<Vec2> = Vec::new();
    for start in starts {
        if let Some(p) = newton_null(rf, start, tol, seed) {
            if !found.iter().any(|q| q.dist(p) < merge) {
                found.push(p);
            }
        }
    }
    match found.len() {
        0 => Err(Error::NoMinimumFound),
        1 => Ok(found[0]),
        k => Err(Error::MultipleMinimaInRegion(k)),
    }
}

fn newton_null<F: FieldSource + ?Sized>(rf: &F, start: Vec2, tol: f64, seed: Rect) -> Option<Vec2> {
    let mut p = start;
    let max_step = 0.25 * seed.width().min(seed.height());
    for _ in 0..100 {
        let (e, j) = rf.field_and_jacobian(p).ok()?;
        if e.norm() <= tol {
            return seed.contains(p).then_some(p);
        }
        let m = [[j.xx, j.xy], [j.xy, j.yy]];
        let mut step = solve2(m, -e)?;
        if step.norm() > max_step {
            step = step * (max_step / step.norm());
        }
        // backtrack until |E| decreases
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let q = p + step * t;
            if let Ok(eq) = rf.field(q) {
                if eq.norm() < e.norm() {
                    p = q;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            return (e.norm() <= 1e3 * tol && seed.contains(p)).then_some(p);
        }
    }
    None
}

/// Lowest saddle bounding the basin around a minimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscapePoint {
    pub point: Vec2,
    /// `Ψ(saddle) - Ψ(minimum)` in eV.
    pub depth: f64,
    /// False when Newton refinement failed and the polar-scan estimate is reported.
    pub refined: bool,
}

const DIRECTIONS: usize = 360;
const RADII: usize = 64;

/// Finds the escape saddle of `psi` around `minimum` inside `window`.
///
/// A 360-direction polar scan at 64 log-spaced radii brackets the lowest
/// barrier: for every ray whose maximum lies strictly inside the ray, the
/// maximum is refined by a parabola through its neighbours, and the lowest
/// such maximum seeds Newton's method on `∇Ψ = 0`. Rays that hit a conductor
/// or leave the window while still climbing carry no barrier.
pub fn find_escape_point<L: Landscape + ?Sized>(
    psi: &L,
    minimum: Vec2,
    window: Rect,
) -> Result<EscapePoint> {
    let psi_min = psi.value(minimum)?;
    let mut best: Option<(f64, Vec2)> = None;
    let mut window_max = psi_min;
    for k in 0..DIRECTIONS {
        let theta = 2.0 * PI * (k as f64 + 0.5) / DIRECTIONS as f64;
        let dir = Vec2::from_polar(1.0, theta);
        let r_max = window.exit_distance(minimum, dir);
        if !(r_max > 0.0) {
            continue;
        }
        let r_min = 1e-3 * r_max;
        let radius = |i: usize| r_min * (r_max / r_min).powf(i as f64 / (RADII - 1) as f64);
        let mut values = Vec::with_capacity(RADII);
        for i in 0..RADII {
            match psi.value(minimum + dir * radius(i)) {
                Ok(v) => values.push(v),
                Err(_) => break,
            }
        }
        let Some((imax, &vmax)) = values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
        else {
            continue;
        };
        window_max = window_max.max(vmax);
        if imax == 0 || imax + 1 >= values.len() {
            continue;
        }
        // parabola in log-radius through the three samples around the max
        let (a, b, c) = (values[imax - 1], vmax, values[imax + 1]);
        let denom = a - 2.0 * b + c;
        let shift = if denom < 0.0 {
            (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
        } else {
            0.0
        };
        let r = r_min * (r_max / r_min).powf((imax as f64 + shift) / (RADII - 1) as f64);
        let q = minimum + dir * r;
        let v = psi.value(q).unwrap_or(vmax).max(vmax);
        if best.map_or(true, |(bv, _)| v < bv) {
            best = Some((v, q));
        }
    }
    let Some((estimate, start)) = best else {
        return Err(Error::NoSaddleFound {
            window_max: window_max - psi_min,
        });
    };
    if let Some((p, v)) = refine_saddle(psi, start, minimum) {
        if v <= estimate * (1.0 + 1e-9) && v > psi_min {
            return Ok(EscapePoint {
                point: p,
                depth: v - psi_min,
                refined: true,
            });
        }
    }
    log::debug!("saddle refinement failed near {start:?}; using scan estimate");
    Ok(EscapePoint {
        point: start,
        depth: estimate - psi_min,
        refined: false,
    })
}

fn refine_saddle<L: Landscape + ?Sized>(psi: &L, start: Vec2, minimum: Vec2) -> Option<(Vec2, f64)> {
    let mut p = start;
    let reach = start.dist(minimum);
    let g0 = psi.gradient(start).ok()?.norm().max(1e-300);
    let mut g = g0;
    for _ in 0..60 {
        let h = hessian(psi, p, 1e-3 * reach.max(1.0)).ok()?;
        let grad = psi.gradient(p).ok()?;
        g = grad.norm();
        if g <= 1e-10 * g0 || g == 0.0 {
            break;
        }
        let mut step = solve2([[h.xx, h.xy], [h.xy, h.yy]], -grad)?;
        let limit = 0.1 * reach;
        if step.norm() > limit {
            step = step * (limit / step.norm());
        }
        // backtrack on the gradient norm
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..30 {
            let q = p + step * t;
            if let Ok(gq) = psi.gradient(q) {
                if gq.norm() < g {
                    p = q;
                    moved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    if p.dist(start) > 0.5 * reach || g > 1e-6 * g0 {
        return None;
    }
    let h = hessian(psi, p, 1e-3 * reach.max(1.0)).ok()?;
    let [(lo, _), (hi, _)] = h.eigen();
    (lo < 0.0 && hi > 0.0).then(|| psi.value(p).ok().map(|v| (p, v))).flatten()
}

/// Hessian of `psi` by central differences of its analytic gradient with
/// steps `h` and `h/2`, Richardson-extrapolated and symmetrised.
pub fn hessian<L: Landscape + ?Sized>(psi: &L, p: Vec2, h: f64) -> Result<Sym2> {
    let raw = |h: f64| -> Result<[[f64; 2]; 2]> {
        let dx = Vec2::new(h, 0.0);
        let dy = Vec2::new(0.0, h);
        let gx = (psi.gradient(p + dx)? - psi.gradient(p - dx)?) * (0.5 / h);
        let gy = (psi.gradient(p + dy)? - psi.gradient(p - dy)?) * (0.5 / h);
        // column j holds ∂g/∂x_j
        Ok([[gx.x, gy.x], [gx.y, gy.y]])
    };
    let a = raw(h)?;
    let b = raw(0.5 * h)?;
    let r = |i: usize, j: usize| (4.0 * b[i][j] - a[i][j]) / 3.0;
    Ok(Sym2 {
        xx: r(0, 0),
        xy: 0.5 * (r(0, 1) + r(1, 0)),
        yy: r(1, 1),
    })
}

/// Raw (unsymmetrised) off-diagonal Hessian entries, for symmetry checks.
pub fn hessian_off_diagonals<L: Landscape + ?Sized>(psi: &L, p: Vec2, h: f64) -> Result<(f64, f64)> {
    let dx = Vec2::new(h, 0.0);
    let dy = Vec2::new(0.0, h);
    let gx = (psi.gradient(p + dx)? - psi.gradient(p - dx)?) * (0.5 / h);
    let gy = (psi.gradient(p + dy)? - psi.gradient(p - dy)?) * (0.5 / h);
    Ok((gy.x, gx.y))
}

/// Finite-difference step for the secular Hessian (µm).
pub const SECULAR_STEP: f64 = 0.1;

/// A secular mode: frequency (MHz) and principal-axis angle (rad from +x).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecularMode {
    pub frequency_mhz: f64,
    pub angle: f64,
}

/// Secular modes at `minimum`, lower frequency first.
pub fn secular_frequencies<L: Landscape + ?Sized>(
    psi: &L,
    ion: &IonProperties,
    minimum: Vec2,
) -> Result<[SecularMode; 2]> {
    let h = hessian(psi, minimum, SECULAR_STEP)?;
    let [(lo, a_lo), (hi, a_hi)] = h.eigen();
    if !(lo > 0.0) {
        return Err(Error::NonPositiveCurvature(lo));
    }
    let f = |lambda: f64| {
        // eV/µm² → J/m²
        let k = lambda * ELEMENTARY_CHARGE * UM_PER_M * UM_PER_M;
        (k / ion.mass_kg()).sqrt() / (2.0 * PI) / 1e6
    };
    Ok([
        SecularMode {
            frequency_mhz: f(lo),
            angle: a_lo,
        },
        SecularMode {
            frequency_mhz: f(hi),
            angle: a_hi,
        },
    ])
}

/// RF amplitude that puts the lower secular mode at `target_mhz`.
///
/// Frequencies are linear in the RF amplitude, so one unit-voltage evaluation
/// fixes the answer.
pub fn calibrate_rf_voltage<F: FieldSource>(
    rf: F,
    ion: &IonProperties,
    rf_frequency_mhz: f64,
    target_mhz: f64,
    minimum: Vec2,
) -> Result<f64> {
    if !(target_mhz > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "target secular frequency must be positive (got {target_mhz})"
        )));
    }
    let unit = DriveConfig {
        rf_frequency_mhz,
        rf_voltage: 1.0,
    };
    let psi = Pseudopotential::new(rf, &unit, ion);
    let [low, _] = secular_frequencies(&psi, ion, minimum)?;
    Ok(target_mhz / low.frequency_mhz)
}

/// Mathieu `q` parameter of a mode at `secular_mhz` under an `rf_mhz` drive,
/// in the pseudopotential limit.
pub fn stability_q(secular_mhz: f64, rf_mhz: f64) -> f64 {
    2.0 * std::f64::consts::SQRT_2 * secular_mhz / rf_mhz
}

/// Pseudopotential approximation is flagged above this `q`.
pub const Q_WARN: f64 = 0.3;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{IdealQuadrupole, Offset};

    struct Synthetic;

    impl Landscape for Synthetic {
        fn value(&self, p: Vec2) -> Result<f64> {
            Ok((p.x * p.x + p.y * p.y) * (-p.y / 100.0).exp())
        }
        fn gradient(&self, p: Vec2) -> Result<Vec2> {
            let e = (-p.y / 100.0).exp();
            let r2 = p.x * p.x + p.y * p.y;
            Ok(Vec2::new(2.0 * p.x * e, (2.0 * p.y - r2 / 100.0) * e))
        }
    }

    fn window() -> Rect {
        Rect::new(Vec2::new(-1000.0, -1000.0), Vec2::new(1000.0, 1000.0))
    }

    #[test]
    fn unit_field_pseudopotential_value() {
        // e·(1e6)² / (4·m·Ω²) for ⁴⁰Ca⁺ at 40 MHz, evaluated separately
        let q = IdealQuadrupole::new(Vec2::ZERO, 1.0, 75.0);
        let psi = pseudopotential_at(&q, Vec2::new(75.0, 0.0), &DriveConfig::default(), &IonProperties::default())
            .unwrap();
        assert!((psi - 9.546_882_869_371_311).abs() < 1e-9, "{psi}");
        assert_eq!(
            pseudopotential_at(&q, Vec2::ZERO, &DriveConfig::default(), &IonProperties::default())
                .unwrap(),
            0.0
        );
    }

    #[test]
    fn doubling_voltage_quadruples_psi() {
        let q = IdealQuadrupole::new(Vec2::ZERO, 1.0, 75.0);
        let ion = IonProperties::default();
        let p = Vec2::new(12.0, -7.0);
        let d1 = DriveConfig::default();
        let d2 = DriveConfig {
            rf_voltage: 2.0,
            ..d1
        };
        let a = pseudopotential_at(&q, p, &d1, &ion).unwrap();
        let b = pseudopotential_at(&q, p, &d2, &ion).unwrap();
        assert!((b - 4.0 * a).abs() < 1e-12 * b);
    }

    #[test]
    fn quadrupole_minimum_at_centre() {
        let q = IdealQuadrupole::new(Vec2::new(3.0, -2.0), 1.0, 75.0);
        let seed = Rect::new(Vec2::new(-20.0, -30.0), Vec2::new(25.0, 10.0));
        let p = find_minimum(&q, seed).unwrap();
        assert!(p.dist(Vec2::new(3.0, -2.0)) < 1e-6);
        let far = Rect::new(Vec2::new(100.0, 100.0), Vec2::new(200.0, 200.0));
        assert_eq!(find_minimum(&q, far), Err(Error::NoMinimumFound));
    }

    #[test]
    fn quadrupole_has_no_saddle() {
        let q = IdealQuadrupole::new(Vec2::ZERO, 1.0, 75.0);
        let psi = Pseudopotential::new(q, &DriveConfig::default(), &IonProperties::default());
        assert!(matches!(
            find_escape_point(&psi, Vec2::ZERO, window()),
            Err(Error::NoSaddleFound { .. })
        ));
    }

    #[test]
    fn synthetic_saddle() {
        let esc = find_escape_point(&Synthetic, Vec2::ZERO, window()).unwrap();
        assert!(esc.refined);
        assert!(esc.point.dist(Vec2::new(0.0, 200.0)) < 1e-6, "{:?}", esc.point);
        // 4e4·e⁻²
        assert!((esc.depth - 5_413.411_329_464_508).abs() < 1e-6, "{}", esc.depth);
    }

    #[test]
    fn quadrupole_secular_frequencies_are_degenerate_and_linear() {
        let ion = IonProperties::default();
        let q = IdealQuadrupole::new(Vec2::ZERO, 1.0, 75.0);
        let run = |v: f64| {
            let d = DriveConfig {
                rf_voltage: v,
                ..Default::default()
            };
            secular_frequencies(&Pseudopotential::new(q, &d, &ion), &ion, Vec2::ZERO).unwrap()
        };
        let one = run(1.0);
        assert!((one[0].frequency_mhz - one[1].frequency_mhz).abs() < 1e-9 * one[0].frequency_mhz);
        let three = run(3.0);
        assert!((three[0].frequency_mhz - 3.0 * one[0].frequency_mhz).abs() < 1e-9 * three[0].frequency_mhz);
    }

    #[test]
    fn calibration_is_exact() {
        let ion = IonProperties::default();
        let q = IdealQuadrupole::new(Vec2::ZERO, 0.02, 75.0);
        let v = calibrate_rf_voltage(q, &ion, 40.0, 4.0, Vec2::ZERO).unwrap();
        let d = DriveConfig {
            rf_frequency_mhz: 40.0,
            rf_voltage: v,
        };
        let [low, _] = secular_frequencies(&Pseudopotential::new(q, &d, &ion), &ion, Vec2::ZERO).unwrap();
        assert!((low.frequency_mhz - 4.0).abs() < 4e-9);
        let half = calibrate_rf_voltage(q, &ion, 40.0, 2.0, Vec2::ZERO).unwrap();
        assert!((half - 0.5 * v).abs() < 1e-12 * v);
    }

    #[test]
    fn potential_offset_changes_nothing() {
        let ion = IonProperties::default();
        let d = DriveConfig::default();
        let q = IdealQuadrupole::new(Vec2::new(1.0, 1.0), 1.0, 75.0);
        let shifted = Offset { inner: q, volts: 17.0 };
        let seed = Rect::new(Vec2::new(-10.0, -10.0), Vec2::new(10.0, 10.0));
        assert_eq!(find_minimum(&q, seed).unwrap(), find_minimum(&shifted, seed).unwrap());
        let a = secular_frequencies(&Pseudopotential::new(q, &d, &ion), &ion, Vec2::new(1.0, 1.0)).unwrap();
        let b = secular_frequencies(&Pseudopotential::new(shifted, &d, &ion), &ion, Vec2::new(1.0, 1.0))
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn q_parameter_of_the_standard_drive() {
        assert!((stability_q(4.0, 40.0) - 0.282_842_712_474_619).abs() < 1e-12);
    }
}
