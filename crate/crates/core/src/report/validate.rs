//! Solver validation against closed forms and under refinement.

use super::reference::reference_table;
use crate::bem::{coax_mesh, solve_basis};
use crate::geometry::{TrapFamily, TrapParams};
use crate::math::Vec2;
use crate::pipeline::{analyze_analytic, analyze_trap, Constraint, Failure, Outcome, Settings};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

pub const VALIDATION_SCHEMA: &str = "trenchfield.validation/1";

const COAX_INNER: f64 = 50.0;
const COAX_OUTER: f64 = 200.0;
const COAX_PANELS: [usize; 4] = [64, 128, 256, 512];
/// RF-to-centre width ratios of the closed-form comparison.
const SET_RATIOS: [f64; 10] = [0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoaxLevel {
    /// Panels per circle.
    pub panels: usize,
    /// Worst relative error of potential and field over the sample points.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoaxStudy {
    pub levels: Vec<Outcome<CoaxLevel>>,
    pub monotone: bool,
    pub pass: bool,
}

/// BEM against the gapless closed form for one symmetric SET.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetComparison {
    pub ratio: f64,
    pub a: f64,
    pub b: f64,
    /// Relative deviation of height, depth, C2, C3', C4' in that order.
    pub deviations: Outcome<[f64; 5]>,
    pub tolerance: f64,
    pub pass: bool,
}

impl SetComparison {
    pub fn max_deviation(&self) -> Option<f64> {
        self.deviations.as_ref().ok().map(|d| d.iter().fold(0.0f64, |m, v| m.max(*v)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshLevel {
    /// Factor applied to `l_max`, `l_min` and grading.
    pub factor: f64,
    pub panels: usize,
    pub c2: f64,
    pub depth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshStudy {
    pub levels: Outcome<Vec<MeshLevel>>,
    /// Relative change of C2 and depth between the two finest levels.
    pub final_change: Option<(f64, f64)>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtentStudy {
    pub family: TrapFamily,
    pub c2: Outcome<(f64, f64)>,
    pub change: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub schema: String,
    pub coax: CoaxStudy,
    pub set_sweep: Vec<SetComparison>,
    pub mesh: MeshStudy,
    pub extent: Vec<ExtentStudy>,
    pub seconds: f64,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.coax.pass
            && self.set_sweep.iter().all(|c| c.pass)
            && self.mesh.pass
            && self.extent.iter().all(|e| e.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("validation serialises")
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub(crate) fn coax_error(panels: usize) -> crate::Result<f64> {
    let sol = solve_basis(&coax_mesh(COAX_INNER, COAX_OUTER, panels), usize::MAX)?;
    let v = BTreeMap::from([("inner".to_string(), 1.0)]);
    let log = (COAX_OUTER / COAX_INNER).ln();
    let mut worst = 0.0f64;
    for r in [75.0, 100.0, 150.0] {
        for t in [0.1, 1.3, 2.9, 4.4] {
            let p = Vec2::from_polar(r, t);
            let phi = sol.potential_at(p, &v)?;
            let e = sol.field_at(p, &v)?;
            worst = worst
                .max(rel(phi, (COAX_OUTER / r).ln() / log))
                .max(rel(e.norm(), 1.0 / (r * log)));
        }
    }
    Ok(worst)
}

fn coax_study() -> CoaxStudy {
    let levels: Vec<Outcome<CoaxLevel>> = COAX_PANELS
        .iter()
        .map(|&n| {
            coax_error(n)
                .map(|error| CoaxLevel { panels: n, error })
                .map_err(Failure::from)
        })
        .collect();
    let errors: Vec<f64> = levels.iter().filter_map(|l| l.as_ref().ok().map(|l| l.error)).collect();
    let monotone = errors.len() == levels.len() && errors.windows(2).all(|w| w[1] < w[0]);
    let pass = monotone && errors.last().is_some_and(|&e| e <= 0.005);
    CoaxStudy { levels, monotone, pass }
}

/// Symmetric SET dimensions with `a/b = ratio` whose gapless RF null sits
/// at `height`.
pub(crate) fn set_dims(ratio: f64, height: f64) -> (f64, f64) {
    let b = height / (0.25 + 0.5 * ratio).sqrt();
    (ratio * b, b)
}

fn compare_set(ratio: f64, settings: &Settings) -> SetComparison {
    let (a, b) = set_dims(ratio, 75.0);
    let tolerance = if ratio >= 0.5 { 0.02 } else { 0.10 };
    let run = || -> crate::Result<[f64; 5]> {
        let params = TrapParams::new(TrapFamily::SetSymmetric, [("a", a), ("b", b)])?;
        let mut fixed = settings.clone();
        fixed.constraint = Constraint::Fixed;
        let bem = analyze_trap(&params, &fixed)?;
        let exact = analyze_analytic(&params, &fixed)?;
        let pick = |m: &crate::pipeline::Measurements| -> crate::Result<(f64, f64, f64, f64)> {
            let depth = m.escape.clone().map_err(to_error)?.depth;
            let (c2, c3, c4) = m.ratios.clone().map_err(to_error)?;
            Ok((depth, c2, c3, c4))
        };
        let (d0, c20, c30, c40) = pick(&bem.measurements)?;
        let (d1, c21, c31, c41) = pick(&exact.measurements)?;
        Ok([
            rel(bem.trap.ion.y, exact.ion.y),
            rel(d0, d1),
            rel(c20, c21),
            rel(c30, c31),
            rel(c40, c41),
        ])
    };
    let deviations = run().map_err(Failure::from);
    let pass = deviations.as_ref().is_ok_and(|d| d.iter().all(|&v| v <= tolerance));
    SetComparison {
        ratio,
        a,
        b,
        deviations,
        tolerance,
        pass,
    }
}

fn to_error(f: Failure) -> crate::Error {
    crate::Error::InvalidConfig(format!("{}: {}", f.stage, f.message))
}

fn headline(params: &TrapParams, settings: &Settings) -> crate::Result<(usize, f64, f64)> {
    let a = analyze_trap(params, settings)?;
    let depth = a.measurements.escape.map_err(to_error)?.depth;
    let c2 = a.measurements.ratios.map_err(to_error)?.0;
    Ok((a.trap.solution.mesh().len(), c2, depth))
}

fn mesh_study(settings: &Settings) -> MeshStudy {
    let params = reference_table()[0].params().expect("reference params");
    let levels: crate::Result<Vec<MeshLevel>> = [1.0, 0.5, 0.25]
        .iter()
        .map(|&factor| {
            let mut s = settings.clone();
            s.constraint = Constraint::Fixed;
            s.mesh.l_max *= factor;
            s.mesh.l_min *= factor;
            s.mesh.grading *= factor;
            s.mesh.max_panels = usize::MAX;
            let (panels, c2, depth) = headline(&params, &s)?;
            Ok(MeshLevel {
                factor,
                panels,
                c2,
                depth,
            })
        })
        .collect();
    let final_change = levels.as_ref().ok().map(|l| {
        let (a, b) = (&l[l.len() - 2], &l[l.len() - 1]);
        (rel(a.c2, b.c2), rel(a.depth, b.depth))
    });
    let pass = final_change.is_some_and(|(c2, depth)| c2 < 0.005 && depth < 0.01);
    MeshStudy {
        levels: levels.map_err(Failure::from),
        final_change,
        pass,
    }
}

fn extent_study(settings: &Settings) -> Vec<ExtentStudy> {
    reference_table()
        .iter()
        .map(|r| {
            let run = || -> crate::Result<(f64, f64)> {
                let params = r.params()?;
                let mut s = settings.clone();
                s.constraint = Constraint::Fixed;
                let base = headline(&params, &s)?.1;
                s.build.extent_factor *= 2.0;
                s.mesh.max_panels = usize::MAX;
                Ok((base, headline(&params, &s)?.1))
            };
            let c2 = run().map_err(Failure::from);
            let change = c2.as_ref().ok().map(|&(a, b)| rel(b, a));
            ExtentStudy {
                family: r.family,
                c2,
                change,
                pass: change.is_some_and(|c| c < 0.005),
            }
        })
        .collect()
}

/// BEM against the gapless closed form over the standard `a/b` ratios.
pub fn compare_set_sweep(settings: &Settings) -> Vec<SetComparison> {
    SET_RATIOS.iter().map(|&r| compare_set(r, settings)).collect()
}

/// Runs every validation study with the mesh and drive of `settings`.
pub fn validate_solver(settings: &Settings) -> ValidationReport {
    let start = Instant::now();
    let coax = coax_study();
    let set_sweep = compare_set_sweep(settings);
    let mesh = mesh_study(settings);
    let extent = extent_study(settings);
    ValidationReport {
        schema: VALIDATION_SCHEMA.into(),
        coax,
        set_sweep,
        mesh,
        extent,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "coaxial capacitor ({COAX_INNER}/{COAX_OUTER} µm)")?;
        for l in &self.coax.levels {
            match l {
                Ok(l) => writeln!(f, "  {:>4} panels/circle  error {:.3e}", l.panels, l.error)?,
                Err(e) => writeln!(f, "  failed: {e}")?,
            }
        }
        writeln!(
            f,
            "  monotone {}, 512 panels within 0.5%: {}",
            self.coax.monotone,
            verdict(self.coax.pass)
        )?;
        writeln!(f, "\nsymmetric SET, BEM vs closed form (relative deviation)")?;
        writeln!(
            f,
            "  {:>5} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}  tol",
            "a/b", "a", "b", "height", "depth", "C2", "C3'", "C4'"
        )?;
        for c in &self.set_sweep {
            match &c.deviations {
                Ok(d) => writeln!(
                    f,
                    "  {:>5.2} {:>8.2} {:>8.2} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4}  {:.0}% {}",
                    c.ratio,
                    c.a,
                    c.b,
                    d[0],
                    d[1],
                    d[2],
                    d[3],
                    d[4],
                    c.tolerance * 100.0,
                    verdict(c.pass)
                )?,
                Err(e) => writeln!(f, "  {:>5.2} failed: {e}", c.ratio)?,
            }
        }
        writeln!(f, "\nmesh refinement (symmetric SET reference dimensions)")?;
        match &self.mesh.levels {
            Ok(levels) => {
                for l in levels {
                    writeln!(
                        f,
                        "  factor {:<5} {:>5} panels  C2 {:.6}  depth {:.6}",
                        l.factor, l.panels, l.c2, l.depth
                    )?;
                }
            }
            Err(e) => writeln!(f, "  failed: {e}")?,
        }
        if let Some((c2, depth)) = self.mesh.final_change {
            writeln!(f, "  last step: C2 {:.2e}, depth {:.2e}  {}", c2, depth, verdict(self.mesh.pass))?;
        }
        writeln!(f, "\nground-plane extent doubling (C2 change)")?;
        for e in &self.extent {
            match e.change {
                Some(c) => writeln!(f, "  {:<30} {:.2e}  {}", e.family.name(), c, verdict(e.pass))?,
                None => writeln!(f, "  {:<30} failed  FAIL", e.family.name())?,
            }
        }
        writeln!(f, "\noverall: {} ({:.1} s)", verdict(self.pass()), self.seconds)
    }
}
