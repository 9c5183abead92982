//! TOML configuration documents.
//!
//! ```toml
//! [trap]
//! family = "wafer_antisymmetric"
//! k = 53              # family parameters, µm
//! gap = 1.0
//! separation = 75.0
//!
//! [mesh]
//! l_max = 5.0
//!
//! [drive]
//! rf_frequency_mhz = 40.0
//! secular_mhz = 4.0
//!
//! [ion]
//! mass_amu = 40.0
//!
//! [roles]
//! rf_left = "dc"
//!
//! [sweep]
//! parameter = "k"
//! values = [40, 50, 60]
//! ```
//!
//! Every section except `[trap]` is optional. Unknown keys are rejected.

use crate::error::{Error, Result};
use crate::geometry::{BuildOptions, MeshPolicy, Role, TrapFamily, TrapParams};
use crate::multipole::FitSettings;
use crate::pipeline::{Constraint, Regime, Settings};
use crate::pseudo::IonProperties;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;

/// `[trap]` keys that are not family parameters.
pub const TRAP_OPTION_KEYS: [&str; 6] =
    ["family", "gap", "separation", "extent_factor", "constraint", "regime"];

/// A parsed document with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub params: TrapParams,
    pub settings: Settings,
    pub sweep: Option<SweepSection>,
}

/// The `[sweep]` section.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Name of the swept family parameter.
    pub parameter: String,
    /// Values in µm, ascending.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct DriveSection {
    rf_frequency_mhz: f64,
    secular_mhz: f64,
}

impl Default for DriveSection {
    fn default() -> Self {
        let s = Settings::default();
        Self {
            rf_frequency_mhz: s.rf_frequency_mhz,
            secular_mhz: s.secular_mhz,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    trap: Option<toml::Table>,
    #[serde(default)]
    mesh: MeshPolicy,
    #[serde(default)]
    drive: DriveSection,
    #[serde(default)]
    ion: IonProperties,
    #[serde(default)]
    multipole: FitSettings,
    #[serde(default)]
    roles: BTreeMap<String, String>,
    sweep: Option<SweepSection>,
}

/// 1-based line and column of byte `offset` in `text`.
fn location(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn number(key: &str, v: &toml::Value) -> Result<f64> {
    match v {
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        other => Err(Error::InvalidConfig(format!(
            "`trap.{key}` must be a number, got {}",
            other.type_str()
        ))),
    }
}

fn string<'a>(key: &str, v: &'a toml::Value) -> Result<&'a str> {
    v.as_str()
        .ok_or_else(|| Error::InvalidConfig(format!("`trap.{key}` must be a string")))
}

pub fn parse_config(text: &str) -> Result<Config> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| location(text, s.start));
        Error::ParseError {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    let trap = raw.trap.unwrap_or_default();
    let family: TrapFamily = match trap.get("family") {
        Some(v) => string("family", v)?.parse()?,
        None => return Err(Error::MissingRequiredKey("family".into())),
    };

    let mut build = BuildOptions::default();
    let mut constraint_kind: Option<&str> = None;
    let mut regime: Option<Regime> = None;
    let mut entries: Vec<(&str, f64)> = Vec::new();
    for (key, value) in &trap {
        match key.as_str() {
            "family" => {}
            "gap" => build.gap = number(key, value)?,
            "separation" => build.separation = number(key, value)?,
            "extent_factor" => build.extent_factor = number(key, value)?,
            "constraint" => constraint_kind = Some(string(key, value)?),
            "regime" => regime = Some(string(key, value)?.parse()?),
            _ => entries.push((key.as_str(), number(key, value)?)),
        }
    }
    if let Some(sweep) = &raw.sweep {
        if !family.parameters().iter().any(|(k, _)| *k == sweep.parameter) {
            return Err(Error::UnknownParameter {
                family: family.name().into(),
                name: sweep.parameter.clone(),
            });
        }
        // the swept parameter need not appear in [trap]
        if !entries.iter().any(|(k, _)| *k == sweep.parameter) {
            let first = *sweep.values.first().ok_or_else(|| {
                Error::InvalidConfig("`sweep.values` must not be empty".into())
            })?;
            entries.push((sweep.parameter.as_str(), first));
        }
    }
    let params = TrapParams::new(family, entries)?;

    let target = build.separation;
    let constraint = match (constraint_kind, regime) {
        (Some(_), Some(_)) => {
            return Err(Error::InvalidConfig(
                "`trap.constraint` and `trap.regime` are mutually exclusive".into(),
            ))
        }
        (_, Some(r)) => {
            match (family, r) {
                (TrapFamily::StackedTrenchAntisymmetric, _)
                | (TrapFamily::StackedTrenchSymmetric, Regime::Walls) => {}
                (TrapFamily::StackedTrenchSymmetric, Regime::GroundPlane) => {
                    return Err(Error::InvalidConfig(
                        "stacked_trench_symmetric supports only the walls regime".into(),
                    ))
                }
                _ => {
                    return Err(Error::InvalidConfig(format!(
                        "`trap.regime` applies only to stacked trenches, not {family}"
                    )))
                }
            }
            r.constraint(target)
        }
        (Some("separation") | None, None) => Constraint::Separation(target),
        (Some("ion_height"), None) => Constraint::IonHeight(target),
        (Some("fixed"), None) => Constraint::Fixed,
        (Some(other), None) => {
            return Err(Error::InvalidConfig(format!(
                "unknown constraint `{other}` (expected separation, ion_height or fixed)"
            )))
        }
    };
    if matches!(constraint, Constraint::IonHeight(_)) && !family.has_substrate() {
        return Err(Error::InvalidConfig(format!(
            "{family} has no substrate to hold an ion height against"
        )));
    }

    for (id, role) in &raw.roles {
        build.roles.insert(id.clone(), role.parse::<Role>()?);
    }

    if let Some(sweep) = &raw.sweep {
        if sweep.values.is_empty() {
            return Err(Error::InvalidConfig("`sweep.values` must not be empty".into()));
        }
        if let Some(&v) = sweep.values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::NonPositiveLength {
                name: sweep.parameter.clone(),
                value: v,
            });
        }
        if sweep.values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidConfig(
                "`sweep.values` must be strictly ascending".into(),
            ));
        }
    }

    let settings = Settings {
        build,
        mesh: raw.mesh,
        ion: raw.ion,
        rf_frequency_mhz: raw.drive.rf_frequency_mhz,
        secular_mhz: raw.drive.secular_mhz,
        fit: raw.multipole,
        constraint,
    };
    settings.validate()?;
    Ok(Config {
        params,
        settings,
        sweep: raw.sweep,
    })
}

pub fn load_config(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}
