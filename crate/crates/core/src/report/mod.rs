//! Per-trap reports, the reference regression and solver validation.
//!
//! Machine-readable output carries a schema tag: JSON documents in a
//! `schema` field, CSV files in a leading `# schema:` comment line.

mod reference;
mod regress;
mod validate;

pub use reference::{reference_table, ReferenceTrap, Supplement, REFERENCE_VERSION};
pub use regress::{
    regress_entry, regress_table1, Attribution, Cell, Quantity, RegressionReport, Tolerance,
    ToleranceProfile, TrapRegression, REGRESSION_SCHEMA,
};
pub use validate::{
    compare_set_sweep, validate_solver, CoaxLevel, CoaxStudy, ExtentStudy, MeshLevel, MeshStudy, SetComparison,
    ValidationReport, VALIDATION_SCHEMA,
};

use crate::error::Result;
use crate::geometry::{PanelMesh, TrapFamily, TrapParams};
use crate::math::{fmt_sig9, Vec2};
use crate::multipole::RadiusCheck;
use crate::optics::Aperture;
use crate::pipeline::{analyze_trap, Constraint, Outcome, Settings, TrapAnalysis};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;

pub const REPORT_SCHEMA: &str = "trenchfield.report/1";
pub const MESH_SCHEMA: &str = "trenchfield.mesh/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub panels: usize,
    /// 1-norm condition estimate of the collocation matrix.
    pub conditioning: f64,
    /// Solves spent meeting the scaling constraint.
    pub solves: usize,
    /// RMS misfit of the multipole fit at unit RF voltage (V).
    pub fit_residual: Outcome<f64>,
    pub radius_check: Outcome<RadiusCheck>,
    pub secular_mhz: Outcome<[f64; 2]>,
    pub q: Outcome<[f64; 2]>,
    pub hessian_asymmetry: Outcome<f64>,
    pub warnings: Vec<String>,
}

/// Everything measured for one trap. Quantities that could not be computed
/// hold the failing stage and message instead of a value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapReport {
    pub schema: String,
    pub family: TrapFamily,
    pub input_params: TrapParams,
    /// Parameters after scaling to the constraint.
    pub params: TrapParams,
    pub scale: f64,
    pub constraint: Constraint,
    pub ion_position: Vec2,
    /// Minimum ion-electrode distance (µm).
    pub separation: f64,
    pub nearest_electrode: String,
    pub rf_voltage: Outcome<f64>,
    pub depth: Outcome<f64>,
    pub escape_point: Outcome<Vec2>,
    pub c2: Outcome<f64>,
    pub c3_prime: Outcome<f64>,
    pub c4_prime: Outcome<f64>,
    pub na_above: Outcome<Aperture>,
    pub na_below: Outcome<Aperture>,
    pub diagnostics: Diagnostics,
}

impl TrapReport {
    pub fn from_analysis(input: &TrapParams, settings: &Settings, a: &TrapAnalysis) -> Self {
        let m = &a.measurements;
        let t = &a.trap;
        let ratio = |k: usize| {
            m.ratios.clone().map(|r| match k {
                2 => r.0,
                3 => r.1,
                _ => r.2,
            })
        };
        Self {
            schema: REPORT_SCHEMA.into(),
            family: input.family(),
            input_params: input.clone(),
            params: t.params.clone(),
            scale: t.scale,
            constraint: settings.constraint,
            ion_position: t.ion,
            separation: t.separation,
            nearest_electrode: t.cross_section.nearest_electrode(t.ion).1.to_string(),
            rf_voltage: m.calibration.clone().map(|c| c.rf_voltage),
            depth: m.escape.clone().map(|e| e.depth),
            escape_point: m.escape.clone().map(|e| e.point),
            c2: ratio(2),
            c3_prime: ratio(3),
            c4_prime: ratio(4),
            na_above: m.apertures.clone().map(|r| r.above),
            na_below: m.apertures.clone().map(|r| r.below),
            diagnostics: Diagnostics {
                panels: t.solution.mesh().len(),
                conditioning: t.solution.conditioning(),
                solves: t.solves,
                fit_residual: m.multipoles.clone().map(|f| f.residual),
                radius_check: m.radius_check.clone(),
                secular_mhz: m
                    .calibration
                    .clone()
                    .map(|c| [c.modes[0].frequency_mhz, c.modes[1].frequency_mhz]),
                q: m.calibration.clone().map(|c| c.q),
                hessian_asymmetry: m.calibration.clone().map(|c| c.hessian_asymmetry),
                warnings: m.warnings.clone(),
            },
        }
    }

    /// Names of the headline quantities that failed.
    pub fn failed_fields(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.rf_voltage.is_err() {
            out.push("rf_voltage");
        }
        if self.depth.is_err() {
            out.push("depth");
        }
        if self.c2.is_err() {
            out.push("multipoles");
        }
        if self.na_above.is_err() || self.na_below.is_err() {
            out.push("na");
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// Runs the full chain on one trap.
pub fn analyze(params: &TrapParams, settings: &Settings) -> Result<TrapReport> {
    let a = analyze_trap(params, settings)?;
    Ok(TrapReport::from_analysis(params, settings, &a))
}

fn show<T, F: Fn(&T) -> String>(o: &Outcome<T>, f: F) -> String {
    match o {
        Ok(v) => f(v),
        Err(e) => format!("failed ({e})"),
    }
}

impl fmt::Display for TrapReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params = |p: &TrapParams| {
            p.iter()
                .map(|(k, v)| format!("{k}={v:.2}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        writeln!(f, "trap            {}", self.family)?;
        writeln!(f, "parameters      {} (scale {:.4})", params(&self.params), self.scale)?;
        writeln!(
            f,
            "ion             ({:.3}, {:.3}) µm, {:.3} µm from {}",
            self.ion_position.x, self.ion_position.y, self.separation, self.nearest_electrode
        )?;
        writeln!(f, "rf voltage      {}", show(&self.rf_voltage, |v| format!("{v:.3} V")))?;
        writeln!(
            f,
            "secular         {}",
            show(&self.diagnostics.secular_mhz, |s| format!("{:.4} / {:.4} MHz", s[0], s[1]))
        )?;
        writeln!(f, "depth           {}", show(&self.depth, |v| format!("{v:.4} eV")))?;
        writeln!(f, "C2              {}", show(&self.c2, |v| format!("{v:.4}")))?;
        writeln!(f, "C3'             {}", show(&self.c3_prime, |v| format!("{v:.4}")))?;
        writeln!(f, "C4'             {}", show(&self.c4_prime, |v| format!("{v:.4}")))?;
        writeln!(f, "NA above        {}", show(&self.na_above, |a| a.to_string()))?;
        writeln!(f, "NA below        {}", show(&self.na_below, |a| a.to_string()))?;
        writeln!(
            f,
            "mesh            {} panels, condition {:.2e}, {} solve(s)",
            self.diagnostics.panels, self.diagnostics.conditioning, self.diagnostics.solves
        )?;
        for w in &self.diagnostics.warnings {
            writeln!(f, "warning         {w}")?;
        }
        Ok(())
    }
}

/// Writes the panels of `mesh` as CSV: `electrode, role, ax, ay, bx, by`.
pub fn write_mesh_csv<W: Write>(mesh: &PanelMesh, out: W) -> Result<()> {
    let io = |e: csv::Error| crate::Error::Io(e.to_string());
    let mut out = out;
    writeln!(out, "# schema: {MESH_SCHEMA}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["electrode", "role", "ax_um", "ay_um", "bx_um", "by_um"])
        .map_err(io)?;
    for p in &mesh.panels {
        let (id, role) = &mesh.electrodes[p.electrode];
        let role = match role {
            crate::geometry::Role::Rf => "rf",
            crate::geometry::Role::Dc => "dc",
            crate::geometry::Role::Ground => "ground",
        };
        w.write_record([
            id.clone(),
            role.to_string(),
            fmt_sig9(p.a.x),
            fmt_sig9(p.a.y),
            fmt_sig9(p.b.x),
            fmt_sig9(p.b.y),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
