//! One-parameter sweeps across a trap family.
//!
//! Each value of the swept parameter `w` is scaled to the constraint,
//! analysed and reported independently; a failing row never stops the sweep.
//! Rows come back in input order whatever the worker count.

use crate::config::Config;
use crate::error::{Error, Result};
use crate::geometry::TrapParams;
use crate::math::fmt_sig9;
use crate::pipeline::{Failure, Outcome, Settings};
use crate::report::{analyze, TrapReport};
use rayon::prelude::*;
use std::io::Write;

pub const SWEEP_SCHEMA: &str = "trenchfield.sweep/1";

pub const CSV_COLUMNS: [&str; 13] = [
    "family",
    "w_name",
    "w_um",
    "depth_eV",
    "C2",
    "C3p",
    "C4p",
    "na_above",
    "na_below",
    "ion_x_um",
    "ion_y_um",
    "rf_voltage_V",
    "status",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Fixed parameters; the swept entry is overwritten per row.
    pub base: TrapParams,
    pub swept: String,
    /// Ascending values of the swept parameter (µm).
    pub values: Vec<f64>,
    pub settings: Settings,
}

impl SweepSpec {
    pub fn new(base: TrapParams, swept: &str, values: Vec<f64>, settings: Settings) -> Result<Self> {
        base.with(swept, base.try_get(swept).unwrap_or(1.0))?;
        if values.is_empty() {
            return Err(Error::InvalidConfig("sweep has no values".into()));
        }
        if values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidConfig("sweep values must be strictly ascending".into()));
        }
        settings.validate()?;
        Ok(Self {
            base,
            swept: swept.to_string(),
            values,
            settings,
        })
    }

    /// The spec described by a config's `[sweep]` section.
    pub fn from_config(config: &Config) -> Result<Self> {
        let s = config
            .sweep
            .as_ref()
            .ok_or_else(|| Error::MissingRequiredKey("sweep".into()))?;
        Self::new(config.params.clone(), &s.parameter, s.values.clone(), config.settings.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub w: f64,
    pub report: Outcome<TrapReport>,
}

impl SweepRow {
    /// `ok`, `partial: <fields>` or `failed: <stage>: <message>`.
    pub fn status(&self) -> String {
        status_of(&self.report)
    }
}

fn status_of(report: &Outcome<TrapReport>) -> String {
    match report {
        Ok(r) => {
            let failed = r.failed_fields();
            if failed.is_empty() {
                "ok".into()
            } else {
                format!("partial: {}", failed.join(" "))
            }
        }
        Err(f) => format!("failed: {f}"),
    }
}

fn run_row(spec: &SweepSpec, w: f64) -> SweepRow {
    let report = spec
        .base
        .with(&spec.swept, w)
        .and_then(|p| analyze(&p, &spec.settings))
        .map_err(Failure::from);
    SweepRow { w, report }
}

/// Runs every row on `jobs` worker threads; `jobs = 1` runs serially on the
/// calling thread and `jobs = 0` uses one worker per core.
pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> Result<Vec<SweepRow>> {
    if jobs == 1 {
        return Ok(spec.values.iter().map(|&w| run_row(spec, w)).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start {jobs} workers: {e}")))?;
    Ok(pool.install(|| spec.values.par_iter().map(|&w| run_row(spec, w)).collect()))
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_sig9).unwrap_or_default()
}

fn record(family: &str, w: Option<(&str, f64)>, report: &Outcome<TrapReport>) -> Vec<String> {
    let r = report.as_ref().ok();
    let ok = |f: fn(&TrapReport) -> Option<f64>| r.and_then(f);
    vec![
        family.to_string(),
        w.map(|w| w.0.to_string()).unwrap_or_default(),
        opt(w.map(|w| w.1)),
        opt(ok(|r| r.depth.clone().ok())),
        opt(ok(|r| r.c2.clone().ok())),
        opt(ok(|r| r.c3_prime.clone().ok())),
        opt(ok(|r| r.c4_prime.clone().ok())),
        opt(ok(|r| r.na_above.as_ref().ok().map(|a| a.na))),
        opt(ok(|r| r.na_below.as_ref().ok().map(|a| a.na))),
        opt(ok(|r| Some(r.ion_position.x))),
        opt(ok(|r| Some(r.ion_position.y))),
        opt(ok(|r| r.rf_voltage.clone().ok())),
        status_of(report),
    ]
}

fn write_records<W: Write>(mut out: W, records: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let io = |e: csv::Error| Error::Io(e.to_string());
    writeln!(out, "# schema: {SWEEP_SCHEMA}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS).map_err(io)?;
    for r in records {
        w.write_record(r).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the schema line, the header and one record per row.
pub fn write_csv<W: Write>(spec: &SweepSpec, rows: &[SweepRow], out: W) -> Result<()> {
    let family = spec.base.family().name();
    write_records(
        out,
        rows.iter()
            .map(|row| record(family, Some((&spec.swept, row.w)), &row.report)),
    )
}

/// A single analysis in the sweep CSV layout, with `w_name` and `w_um` empty.
pub fn write_report_csv<W: Write>(report: &TrapReport, out: W) -> Result<()> {
    write_records(out, [record(report.family.name(), None, &Ok(report.clone()))])
}

pub fn csv_string(spec: &SweepSpec, rows: &[SweepRow]) -> String {
    let mut buf = Vec::new();
    write_csv(spec, rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}
