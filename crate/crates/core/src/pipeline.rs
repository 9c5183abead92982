//! Single-trap analysis: build, scale to the separation rule, solve, then
//! locate the ion and measure depth, multipoles and optical access.

use crate::analytic::StripSet;
use crate::bem::{solve_basis, BemSolution};
use crate::error::{Error, Result};
use crate::field::FieldSource;
use crate::geometry::{
    build_cross_section, mesh_panels, BuildOptions, CrossSection, MeshPolicy, TrapParams,
};
use crate::math::{Rect, Vec2};
use crate::multipole::{derived_ratios, fit_with, radius_robustness, FitSettings, MultipoleFit, RadiusCheck};
use crate::optics::{apertures, ApertureResult};
use crate::pseudo::{
    calibrate_rf_voltage, find_escape_point, find_minimum, hessian, hessian_off_diagonals,
    secular_frequencies, stability_q, DriveConfig, EscapePoint, IonProperties, Pseudopotential,
    SecularMode, Q_WARN, SECULAR_STEP,
};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Scale tolerance of the separation rule (µm).
pub const SEPARATION_TOLERANCE: f64 = 0.1;
const MAX_SCALE_ITERATIONS: usize = 12;

/// Which length the geometry is scaled to hold fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "um")]
pub enum Constraint {
    /// Minimum ion-electrode distance.
    Separation(f64),
    /// Ion height above the substrate.
    IonHeight(f64),
    /// Use the parameters as given.
    Fixed,
}

/// Stacked-trench operating regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// The ion sits `separation` above the trench floor.
    GroundPlane,
    /// The nearest wall electrode sets the separation.
    Walls,
}

impl Regime {
    pub fn constraint(self, separation: f64) -> Constraint {
        match self {
            Regime::GroundPlane => Constraint::IonHeight(separation),
            Regime::Walls => Constraint::Separation(separation),
        }
    }
}

impl FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ground_plane" => Ok(Regime::GroundPlane),
            "walls" => Ok(Regime::Walls),
            _ => Err(Error::InvalidConfig(format!(
                "unknown regime `{s}` (expected ground_plane or walls)"
            ))),
        }
    }
}

/// Everything besides the family parameters that shapes an analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub build: BuildOptions,
    pub mesh: MeshPolicy,
    pub ion: IonProperties,
    pub rf_frequency_mhz: f64,
    /// Target lower secular frequency (MHz).
    pub secular_mhz: f64,
    pub fit: FitSettings,
    pub constraint: Constraint,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            build: BuildOptions::default(),
            mesh: MeshPolicy::default(),
            ion: IonProperties::default(),
            rf_frequency_mhz: 40.0,
            secular_mhz: 4.0,
            fit: FitSettings::default(),
            constraint: Constraint::Separation(75.0),
        }
    }
}

impl Settings {
    pub fn validate(&self) -> Result<()> {
        self.mesh.validate()?;
        self.ion.validate()?;
        for (name, v) in [
            ("rf_frequency_mhz", self.rf_frequency_mhz),
            ("secular_mhz", self.secular_mhz),
            ("gap", self.build.gap),
            ("separation", self.build.separation),
            ("extent_factor", self.build.extent_factor),
            ("fit_radius_factor", self.fit.fit_radius_factor),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::NonPositiveLength {
                    name: name.into(),
                    value: v,
                });
            }
        }
        match self.constraint {
            Constraint::Separation(v) | Constraint::IonHeight(v) if !(v > 0.0) => {
                Err(Error::NonPositiveLength {
                    name: "separation".into(),
                    value: v,
                })
            }
            _ => Ok(()),
        }
    }
}

/// A built, meshed and solved geometry with its ion located.
#[derive(Debug, Clone)]
pub struct SolvedTrap {
    pub params: TrapParams,
    /// Product of all scale factors applied to the input parameters.
    pub scale: f64,
    pub cross_section: CrossSection,
    pub solution: BemSolution,
    pub ion: Vec2,
    /// Minimum ion-electrode distance (µm).
    pub separation: f64,
    /// Number of solves spent meeting the constraint.
    pub solves: usize,
}

/// Builds, meshes and solves one geometry, then finds the RF null.
pub fn solve_trap(params: &TrapParams, settings: &Settings) -> Result<SolvedTrap> {
    let cs = build_cross_section(params, &settings.build)?;
    let mesh = mesh_panels(&cs, &settings.mesh)?;
    let solution = solve_basis(&mesh, settings.mesh.max_panels)?.with_domain(cs.domain.clone());
    let ion = find_minimum(&solution.rf_drive(1.0), cs.seed_region)?;
    let separation = cs.nearest_electrode(ion).0;
    Ok(SolvedTrap {
        params: params.clone(),
        scale: 1.0,
        cross_section: cs,
        solution,
        ion,
        separation,
        solves: 1,
    })
}

fn measure(t: &SolvedTrap, c: Constraint) -> Result<Option<(f64, f64)>> {
    match c {
        Constraint::Fixed => Ok(None),
        Constraint::Separation(target) => Ok(Some((t.separation, target))),
        Constraint::IonHeight(target) => match t.cross_section.domain.substrate {
            Some(y0) => Ok(Some((t.ion.y - y0, target))),
            None => Err(Error::InvalidConfig(format!(
                "{} has no substrate to measure an ion height from",
                t.params.family()
            ))),
        },
    }
}

/// Solves `params` and rescales them uniformly until `constraint` holds to
/// [`SEPARATION_TOLERANCE`]. Gap, mesh policy and truncation extent are not
/// scaled.
pub fn scale_to_constraint(
    params: &TrapParams,
    settings: &Settings,
    constraint: Constraint,
) -> Result<SolvedTrap> {
    let mut current = solve_trap(params, settings)?;
    let mut solves = 1;
    let mut scale = 1.0;
    for _ in 0..MAX_SCALE_ITERATIONS {
        let Some((value, target)) = measure(&current, constraint)? else {
            break;
        };
        if (value - target).abs() <= SEPARATION_TOLERANCE {
            current.scale = scale;
            current.solves = solves;
            return Ok(current);
        }
        if !(value > 0.0) {
            return Err(Error::NoMinimumFound);
        }
        scale *= target / value;
        current = solve_trap(&params.scaled(scale), settings)?;
        solves += 1;
    }
    if measure(&current, constraint)?.is_some() {
        return Err(Error::InvalidConfig(format!(
            "scaling to {constraint:?} did not converge in {MAX_SCALE_ITERATIONS} solves"
        )));
    }
    current.scale = scale;
    current.solves = solves;
    Ok(current)
}

/// [`scale_to_constraint`] with the minimum-separation rule.
pub fn scale_to_separation(params: &TrapParams, settings: &Settings, separation: f64) -> Result<SolvedTrap> {
    scale_to_constraint(params, settings, Constraint::Separation(separation))
}

/// A failed quantity with the stage that failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub stage: String,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            stage: e.stage().to_string(),
            message: e.to_string(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.stage, self.message)
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;

/// The calibrated drive and everything derived from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub rf_voltage: f64,
    pub modes: [SecularMode; 2],
    /// Stability parameter of each mode.
    pub q: [f64; 2],
    /// Relative mismatch of the finite-difference Hessian off-diagonals.
    pub hessian_asymmetry: f64,
}

/// Measurements at a located ion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurements {
    pub calibration: Outcome<Calibration>,
    pub escape: Outcome<EscapePoint>,
    pub multipoles: Outcome<MultipoleFit>,
    /// `(C₂, C₃′, C₄′)`.
    pub ratios: Outcome<(f64, f64, f64)>,
    pub radius_check: Outcome<RadiusCheck>,
    pub apertures: Outcome<ApertureResult>,
    pub warnings: Vec<String>,
}

/// Escape-search window: the electrode bounding box centre, extended by
/// twice the box's larger half-extent in every direction.
pub fn escape_window(cs: &CrossSection) -> Rect {
    let bb = cs.bounding_box();
    let half = 0.5 * bb.width().max(bb.height());
    let c = bb.center();
    Rect::new(
        Vec2::new(c.x - 2.0 * half, c.y - 2.0 * half),
        Vec2::new(c.x + 2.0 * half, c.y + 2.0 * half),
    )
}

/// Calibration, depth, multipoles and apertures for a unit-RF field `rf`
/// whose null is at `ion`, a distance `r0` from the nearest electrode.
pub fn measure_at<F: FieldSource>(
    cs: &CrossSection,
    rf: &F,
    ion: Vec2,
    r0: f64,
    settings: &Settings,
) -> Measurements {
    let mut warnings = Vec::new();
    let calibration = calibrate(rf, ion, settings).map_err(Failure::from);
    if let Ok(c) = &calibration {
        let q = c.q[0].max(c.q[1]);
        if q > Q_WARN {
            warnings.push(format!(
                "stability parameter q = {q:.3} exceeds {Q_WARN}; the pseudopotential approximation is degrading"
            ));
        }
        if c.hessian_asymmetry > 1e-6 {
            warnings.push(format!(
                "pseudopotential Hessian off-diagonals differ by {:.2e} (relative)",
                c.hessian_asymmetry
            ));
        }
    }
    let escape = match &calibration {
        Ok(c) => {
            let drive = DriveConfig {
                rf_frequency_mhz: settings.rf_frequency_mhz,
                rf_voltage: c.rf_voltage,
            };
            let psi = Pseudopotential::new(rf, &drive, &settings.ion);
            find_escape_point(&psi, ion, escape_window(cs)).map_err(Failure::from)
        }
        Err(f) => Err(f.clone()),
    };
    if let Ok(e) = &escape {
        if !e.refined {
            warnings.push("escape saddle not refined; depth is the polar-scan estimate".into());
        }
    }
    let multipoles = fit_with(rf, ion, r0, 1.0, &settings.fit).map_err(Failure::from);
    let ratios = multipoles
        .as_ref()
        .map_err(Clone::clone)
        .and_then(|f| derived_ratios(f).map_err(Failure::from));
    let radius_check = multipoles
        .as_ref()
        .map_err(Clone::clone)
        .and_then(|f| radius_robustness(rf, f, settings.fit.n_samples).map_err(Failure::from));
    if let Ok(f) = &multipoles {
        if f.residual_flag() {
            warnings.push(format!("multipole fit residual {:.2e} V exceeds 1e-4·V0", f.residual));
        }
        if f.dipole_flag() {
            warnings.push(format!(
                "dipole term C1 = {:.2e} exceeds 1e-3·C2; the fit centre is off the null",
                f.coefficient(1)
            ));
        }
    }
    if let Ok(r) = &radius_check {
        if !r.robust {
            warnings.push(format!(
                "multipoles depend on the fit radius (C2 {:.2e}, C3' {:.2e}, C4' {:.2e})",
                r.c2_change, r.c3p_change, r.c4p_change
            ));
        }
    }
    let apertures = apertures(cs, ion).map_err(Failure::from);
    Measurements {
        calibration,
        escape,
        multipoles,
        ratios,
        radius_check,
        apertures,
        warnings,
    }
}

fn calibrate<F: FieldSource>(rf: &F, ion: Vec2, settings: &Settings) -> Result<Calibration> {
    let v = calibrate_rf_voltage(rf, &settings.ion, settings.rf_frequency_mhz, settings.secular_mhz, ion)?;
    let drive = DriveConfig {
        rf_frequency_mhz: settings.rf_frequency_mhz,
        rf_voltage: v,
    };
    let psi = Pseudopotential::new(rf, &drive, &settings.ion);
    let modes = secular_frequencies(&psi, &settings.ion, ion)?;
    let (hxy, hyx) = hessian_off_diagonals(&psi, ion, SECULAR_STEP)?;
    let h = hessian(&psi, ion, SECULAR_STEP)?;
    let scale = h.xx.abs().max(h.yy.abs()).max(h.xy.abs());
    let hessian_asymmetry = if scale > 0.0 { (hxy - hyx).abs() / scale } else { 0.0 };
    Ok(Calibration {
        rf_voltage: v,
        q: modes.map(|m| stability_q(m.frequency_mhz, settings.rf_frequency_mhz)),
        modes,
        hessian_asymmetry,
    })
}

/// Full analysis of one trap with the BEM solver.
#[derive(Debug, Clone)]
pub struct TrapAnalysis {
    pub trap: SolvedTrap,
    pub measurements: Measurements,
}

pub fn analyze_trap(params: &TrapParams, settings: &Settings) -> Result<TrapAnalysis> {
    settings.validate()?;
    let trap = scale_to_constraint(params, settings, settings.constraint)?;
    let rf = trap.solution.rf_drive(1.0);
    let measurements = measure_at(&trap.cross_section, &rf, trap.ion, trap.separation, settings);
    Ok(TrapAnalysis { trap, measurements })
}

/// Analysis of a surface-electrode trap with the gapless closed-form field.
#[derive(Debug, Clone)]
pub struct AnalyticAnalysis {
    pub ion: Vec2,
    pub separation: f64,
    pub measurements: Measurements,
}

/// Runs the measurement chain on the gapless strip model of `params`. The
/// geometry is used as given; the cross-section only supplies the seed box,
/// the escape window and the optics.
pub fn analyze_analytic(params: &TrapParams, settings: &Settings) -> Result<AnalyticAnalysis> {
    settings.validate()?;
    let strips = StripSet::from_params(params)?;
    let cs = build_cross_section(params, &settings.build)?;
    let ion = find_minimum(&strips, cs.seed_region)?;
    // the grounded plane runs under the ion, so the nearest electrode is straight below
    let separation = ion.y;
    let measurements = measure_at(&cs, &strips, ion, separation, settings);
    Ok(AnalyticAnalysis {
        ion,
        separation,
        measurements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TrapFamily;

    fn sym_set() -> TrapParams {
        TrapParams::new(TrapFamily::SetSymmetric, [("a", 161.2), ("b", 59.0)]).unwrap()
    }

    #[test]
    fn analytic_sym_set_matches_frozen_values() {
        let a = analyze_analytic(&sym_set(), &Settings::default()).unwrap();
        assert!((a.ion.y - 75.00433320815539).abs() < 1e-6);
        assert!(a.ion.x.abs() < 1e-9);
        let m = &a.measurements;
        let (c2, c3, c4) = m.ratios.clone().unwrap();
        assert!((c2 - 0.15872549986201526).abs() < 2e-4);
        assert!((c3 - 0.999942227229129).abs() < 2e-3);
        assert!((c4 - 0.76786848024773).abs() < 2e-3);
        let cal = m.calibration.clone().unwrap();
        assert!((cal.rf_voltage - 65.62050331875285).abs() < 1e-4 * 65.6);
        assert!((cal.modes[0].frequency_mhz - 4.0).abs() < 1e-9);
        let e = m.escape.clone().unwrap();
        assert!((e.depth - 0.06514832253922895).abs() < 1e-5);
        assert!((e.point.y - 148.80).abs() < 0.05);
        assert_eq!(m.apertures.clone().unwrap().above.na, 1.0);
    }

    #[test]
    fn analytic_rejects_trench_family() {
        let p = TrapParams::new(
            TrapFamily::SimpleTrenchSymmetric,
            [("c", 75.0), ("d", 50.0), ("beta", 600.0)],
        )
        .unwrap();
        assert!(matches!(
            analyze_analytic(&p, &Settings::default()),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn regime_maps_to_constraint() {
        assert_eq!(Regime::GroundPlane.constraint(75.0), Constraint::IonHeight(75.0));
        assert_eq!(Regime::Walls.constraint(75.0), Constraint::Separation(75.0));
        assert!("sideways".parse::<Regime>().is_err());
    }
}
