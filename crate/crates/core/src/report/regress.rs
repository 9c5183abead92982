//! Comparison of the representative traps against the reference table.

use super::reference::{reference_table, ReferenceTrap};
use super::{analyze, TrapReport};
use crate::geometry::{TrapFamily, TrapParams};
use crate::pipeline::{Failure, Outcome, Settings};
use serde::Serialize;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

pub const REGRESSION_SCHEMA: &str = "trenchfield.regression/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ToleranceProfile {
    /// Acceptance tolerances, loosened for the 2D model.
    Paper,
    /// Roughly half the acceptance tolerances.
    Strict,
}

impl FromStr for ToleranceProfile {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "paper" => Ok(Self::Paper),
            "strict" => Ok(Self::Strict),
            _ => Err(crate::Error::InvalidConfig(format!(
                "unknown tolerance profile `{s}` (expected paper or strict)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Quantity {
    Depth,
    C2,
    C3Prime,
    C4Prime,
}

impl Quantity {
    pub const ALL: [Quantity; 4] = [Quantity::Depth, Quantity::C2, Quantity::C3Prime, Quantity::C4Prime];

    pub fn label(self) -> &'static str {
        match self {
            Quantity::Depth => "depth",
            Quantity::C2 => "C2",
            Quantity::C3Prime => "C3'",
            Quantity::C4Prime => "C4'",
        }
    }

    fn reference(self, r: &ReferenceTrap) -> f64 {
        match self {
            Quantity::Depth => r.depth,
            Quantity::C2 => r.c2,
            Quantity::C3Prime => r.c3_prime,
            Quantity::C4Prime => r.c4_prime,
        }
    }

    fn measured(self, r: &TrapReport) -> Outcome<f64> {
        match self {
            Quantity::Depth => r.depth.clone(),
            Quantity::C2 => r.c2.clone(),
            Quantity::C3Prime => r.c3_prime.clone(),
            Quantity::C4Prime => r.c4_prime.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Tolerance {
    Relative(f64),
    Absolute(f64),
    /// Measured magnitude may not exceed this bound.
    AtMost(f64),
}

impl Tolerance {
    pub fn for_cell(profile: ToleranceProfile, family: TrapFamily, q: Quantity, reference: f64) -> Self {
        let strict = profile == ToleranceProfile::Strict;
        let wafer = matches!(family, TrapFamily::WaferSymmetric | TrapFamily::WaferAntisymmetric);
        match q {
            Quantity::C2 => Tolerance::Relative(if strict { 0.05 } else { 0.10 }),
            Quantity::Depth => Tolerance::Relative(if strict { 0.10 } else { 0.15 }),
            Quantity::C3Prime if wafer => Tolerance::AtMost(if strict { 0.001 } else { 0.005 }),
            Quantity::C3Prime | Quantity::C4Prime if reference < 0.1 => {
                Tolerance::Absolute(if strict { 0.02 } else { 0.05 })
            }
            Quantity::C3Prime | Quantity::C4Prime => Tolerance::Relative(if strict { 0.10 } else { 0.15 }),
        }
    }

    pub fn accepts(self, reference: f64, measured: f64) -> bool {
        match self {
            Tolerance::Relative(t) => (measured - reference).abs() <= t * reference.abs(),
            Tolerance::Absolute(t) => (measured - reference).abs() <= t,
            Tolerance::AtMost(t) => measured.abs() <= t,
        }
    }
}

impl fmt::Display for Tolerance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tolerance::Relative(t) => write!(f, "±{:.0}%", t * 100.0),
            Tolerance::Absolute(t) => write!(f, "±{t}"),
            Tolerance::AtMost(t) => write!(f, "≤{t}"),
        }
    }
}

/// Why a cell failed: the same trap on a refined mesh, and the layout note.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Attribution {
    /// Value with `l_max`, `l_min` and grading all halved.
    pub refined: Outcome<f64>,
    pub refined_panels: Option<usize>,
    /// Relative change from the default mesh.
    pub mesh_change: Option<f64>,
    /// True when the refined mesh moves the value inside tolerance.
    pub mesh_limited: bool,
    pub geometry_note: String,
}

impl fmt::Display for Attribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.refined, self.mesh_change) {
            (Ok(v), Some(c)) => write!(
                f,
                "refined mesh ({} panels) gives {v:.4} ({:+.2}%); ",
                self.refined_panels.unwrap_or(0),
                100.0 * c
            )?,
            (Err(e), _) => write!(f, "refined mesh failed ({e}); ")?,
            _ => {}
        }
        if self.mesh_limited {
            write!(f, "mesh-limited")
        } else {
            write!(f, "not mesh-limited; layout: {}", self.geometry_note)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub quantity: Quantity,
    pub reference: f64,
    pub measured: Outcome<f64>,
    pub tolerance: Tolerance,
    pub pass: bool,
    pub attribution: Option<Attribution>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrapRegression {
    pub family: TrapFamily,
    pub params: TrapParams,
    pub report: Outcome<TrapReport>,
    pub cells: Vec<Cell>,
    /// Wall time of the default-mesh analysis (s).
    pub seconds: f64,
}

impl TrapRegression {
    pub fn pass(&self) -> bool {
        self.cells.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionReport {
    pub schema: String,
    pub profile: ToleranceProfile,
    pub traps: Vec<TrapRegression>,
}

impl RegressionReport {
    pub fn pass(&self) -> bool {
        self.traps.iter().all(TrapRegression::pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("regression serialises")
    }
}

fn refined(settings: &Settings) -> Settings {
    let mut s = settings.clone();
    s.mesh.l_max *= 0.5;
    s.mesh.l_min *= 0.5;
    s.mesh.grading *= 0.5;
    s.mesh.max_panels = s.mesh.max_panels.max(12_000);
    s
}

/// Analyses `params` and scores it against `reference`. Failing cells are
/// rerun once on a refined mesh for attribution.
pub fn regress_entry(
    reference: &ReferenceTrap,
    params: &TrapParams,
    profile: ToleranceProfile,
    settings: &Settings,
) -> TrapRegression {
    let start = Instant::now();
    let report = analyze(params, settings).map_err(Failure::from);
    let seconds = start.elapsed().as_secs_f64();
    let mut cells: Vec<Cell> = Quantity::ALL
        .iter()
        .map(|&q| {
            let r = q.reference(reference);
            let tolerance = Tolerance::for_cell(profile, reference.family, q, r);
            let measured = report.as_ref().map_err(Clone::clone).and_then(|rep| q.measured(rep));
            let pass = measured.as_ref().is_ok_and(|&m| tolerance.accepts(r, m));
            Cell {
                quantity: q,
                reference: r,
                measured,
                tolerance,
                pass,
                attribution: None,
            }
        })
        .collect();
    if cells.iter().any(|c| !c.pass) {
        let fine = analyze(params, &refined(settings)).map_err(Failure::from);
        for c in cells.iter_mut().filter(|c| !c.pass) {
            let refined = fine.as_ref().map_err(Clone::clone).and_then(|rep| c.quantity.measured(rep));
            let mesh_change = match (&c.measured, &refined) {
                (Ok(a), Ok(b)) if *a != 0.0 => Some((b - a) / a),
                _ => None,
            };
            let mesh_limited = refined.as_ref().is_ok_and(|&v| c.tolerance.accepts(c.reference, v));
            c.attribution = Some(Attribution {
                refined,
                refined_panels: fine.as_ref().ok().map(|r| r.diagnostics.panels),
                mesh_change,
                mesh_limited,
                geometry_note: reference.geometry_note.to_string(),
            });
        }
    }
    TrapRegression {
        family: reference.family,
        params: params.clone(),
        report,
        cells,
        seconds,
    }
}

/// Runs every representative trap under `settings`.
pub fn regress_table1(profile: ToleranceProfile, settings: &Settings) -> RegressionReport {
    let traps = reference_table()
        .iter()
        .map(|r| match r.params() {
            Ok(p) => regress_entry(r, &p, profile, settings),
            Err(e) => TrapRegression {
                family: r.family,
                params: TrapParams::new(r.family, r.dims.iter().copied())
                    .expect("reference dims are valid"),
                report: Err(Failure::from(e.clone())),
                cells: Quantity::ALL
                    .iter()
                    .map(|&q| Cell {
                        quantity: q,
                        reference: q.reference(r),
                        measured: Err(Failure::from(e.clone())),
                        tolerance: Tolerance::for_cell(profile, r.family, q, q.reference(r)),
                        pass: false,
                        attribution: None,
                    })
                    .collect(),
                seconds: 0.0,
            },
        })
        .collect();
    RegressionReport {
        schema: REGRESSION_SCHEMA.into(),
        profile,
        traps,
    }
}

impl fmt::Display for RegressionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<30} {:<6} {:>9} {:>9} {:>9} {:>7}  result",
            "trap", "qty", "reference", "measured", "diff", "tol"
        )?;
        for t in &self.traps {
            for c in &t.cells {
                let (m, d) = match &c.measured {
                    Ok(m) => (format!("{m:.4}"), format!("{:+.4}", m - c.reference)),
                    Err(_) => ("-".into(), "-".into()),
                };
                writeln!(
                    f,
                    "{:<30} {:<6} {:>9} {:>9} {:>9} {:>7}  {}",
                    t.family.name(),
                    c.quantity.label(),
                    c.reference,
                    m,
                    d,
                    c.tolerance.to_string(),
                    if c.pass { "PASS" } else { "FAIL" }
                )?;
            }
        }
        let mut any = false;
        for t in &self.traps {
            if let Err(e) = &t.report {
                writeln!(f, "{}: analysis failed: {e}", t.family)?;
            }
            for c in &t.cells {
                if let Some(a) = &c.attribution {
                    if !any {
                        writeln!(f, "\nattribution of failing cells:")?;
                        any = true;
                    }
                    writeln!(f, "  {} {}: {a}", t.family, c.quantity.label())?;
                }
            }
        }
        writeln!(f, "\noverall: {}", if self.pass() { "PASS" } else { "FAIL" })
    }
}
