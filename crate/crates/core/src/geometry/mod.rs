//! Trap cross-sections: families, parameters, electrode layouts and meshing.
//!
//! Coordinates are in micrometres in the plane transverse to the trap axis.
//! Substrate-based traps (surface-electrode and trench) sit on the plane
//! y = 0 with vacuum above it; wafer traps are free-standing and centred on
//! the origin.

mod builders;
pub mod mesh;

use crate::error::{Error, Result};
use crate::math::{segment_segment_distance, Rect, Vec2};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

pub use builders::build_cross_section;
pub use mesh::{mesh_panels, MeshPolicy, Panel, PanelMesh};

/// The eight cross-section families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrapFamily {
    SetSymmetric,
    SetAntisymmetric,
    SimpleTrenchSymmetric,
    SimpleTrenchAntisymmetric,
    StackedTrenchSymmetric,
    StackedTrenchAntisymmetric,
    WaferSymmetric,
    WaferAntisymmetric,
}

impl TrapFamily {
    pub const ALL: [TrapFamily; 8] = [
        TrapFamily::SetSymmetric,
        TrapFamily::SetAntisymmetric,
        TrapFamily::SimpleTrenchSymmetric,
        TrapFamily::SimpleTrenchAntisymmetric,
        TrapFamily::StackedTrenchSymmetric,
        TrapFamily::StackedTrenchAntisymmetric,
        TrapFamily::WaferSymmetric,
        TrapFamily::WaferAntisymmetric,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TrapFamily::SetSymmetric => "set_symmetric",
            TrapFamily::SetAntisymmetric => "set_antisymmetric",
            TrapFamily::SimpleTrenchSymmetric => "simple_trench_symmetric",
            TrapFamily::SimpleTrenchAntisymmetric => "simple_trench_antisymmetric",
            TrapFamily::StackedTrenchSymmetric => "stacked_trench_symmetric",
            TrapFamily::StackedTrenchAntisymmetric => "stacked_trench_antisymmetric",
            TrapFamily::WaferSymmetric => "wafer_symmetric",
            TrapFamily::WaferAntisymmetric => "wafer_antisymmetric",
        }
    }

    /// True when mirroring about x = 0 preserves electrode roles.
    pub fn is_symmetric(self) -> bool {
        matches!(
            self,
            TrapFamily::SetSymmetric
                | TrapFamily::SimpleTrenchSymmetric
                | TrapFamily::StackedTrenchSymmetric
                | TrapFamily::WaferSymmetric
        )
    }

    /// Wafer traps have no substrate.
    pub fn has_substrate(self) -> bool {
        !matches!(self, TrapFamily::WaferSymmetric | TrapFamily::WaferAntisymmetric)
    }

    /// Parameter keys in canonical order, with the default of fixed parameters.
    pub fn parameters(self) -> &'static [(&'static str, Option<f64>)] {
        match self {
            TrapFamily::SetSymmetric => &[("a", None), ("b", None)],
            TrapFamily::SetAntisymmetric => &[("phi", None)],
            TrapFamily::SimpleTrenchSymmetric => {
                &[("c", None), ("d", None), ("beta", None), ("alpha", Some(WALL_THICKNESS))]
            }
            TrapFamily::SimpleTrenchAntisymmetric => {
                &[("e", None), ("f", None), ("alpha", Some(WALL_THICKNESS))]
            }
            TrapFamily::StackedTrenchSymmetric => &[
                ("g", None),
                ("h", None),
                ("epsilon", None),
                ("mu", None),
                ("alpha", Some(WALL_THICKNESS)),
            ],
            TrapFamily::StackedTrenchAntisymmetric => &[
                ("i", None),
                ("j", None),
                ("xi", None),
                ("alpha", Some(WALL_THICKNESS)),
            ],
            TrapFamily::WaferSymmetric | TrapFamily::WaferAntisymmetric => &[
                ("k", None),
                ("lambda", Some(WAFER_THICKNESS)),
                ("tau", Some(WAFER_DEPTH)),
            ],
        }
    }
}

impl fmt::Display for TrapFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TrapFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        TrapFamily::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }
}

/// Trench wall thickness used for every trench simulation (µm).
pub const WALL_THICKNESS: f64 = 100.0;
/// Wafer thickness (µm).
pub const WAFER_THICKNESS: f64 = 50.0;
/// Horizontal depth of each wafer electrode (µm).
pub const WAFER_DEPTH: f64 = 1000.0;

/// Named lengths (µm) for one family, defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapParams {
    family: TrapFamily,
    values: BTreeMap<String, f64>,
}

impl TrapParams {
    /// Validates keys against the family and fills fixed-parameter defaults.
    pub fn new<'a, I>(family: TrapFamily, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, f64)>,
    {
        let spec = family.parameters();
        let mut values = BTreeMap::new();
        for (name, value) in entries {
            if !spec.iter().any(|(k, _)| *k == name) {
                return Err(Error::UnknownParameter {
                    family: family.name().into(),
                    name: name.into(),
                });
            }
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::NonPositiveLength {
                    name: name.into(),
                    value,
                });
            }
            values.insert(name.to_string(), value);
        }
        for (name, default) in spec {
            if !values.contains_key(*name) {
                match default {
                    Some(v) => {
                        values.insert(name.to_string(), *v);
                    }
                    None => return Err(Error::MissingRequiredKey(name.to_string())),
                }
            }
        }
        Ok(Self { family, values })
    }

    pub fn family(&self) -> TrapFamily {
        self.family
    }

    /// Value of a parameter. Panics on a key outside the family's set, which the
    /// constructor makes impossible for the builders.
    pub fn get(&self, name: &str) -> f64 {
        self.values[name]
    }

    pub fn try_get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    /// Returns a copy with one parameter replaced.
    pub fn with(&self, name: &str, value: f64) -> Result<Self> {
        let mut entries: Vec<(&str, f64)> =
            self.values.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        match entries.iter_mut().find(|(k, _)| *k == name) {
            Some(e) => e.1 = value,
            None => {
                return Err(Error::UnknownParameter {
                    family: self.family.name().into(),
                    name: name.into(),
                })
            }
        }
        Self::new(self.family, entries)
    }

    /// Multiplies every length by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            family: self.family,
            values: self.values.iter().map(|(k, v)| (k.clone(), v * s)).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// Electrical role of an electrode in the transverse analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Rf,
    Dc,
    Ground,
}

impl Role {
    /// Voltage applied in the unit-RF drive: RF at 1 V, everything else grounded.
    pub fn unit_rf_voltage(self) -> f64 {
        match self {
            Role::Rf => 1.0,
            Role::Dc | Role::Ground => 0.0,
        }
    }
}

impl FromStr for Role {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rf" => Ok(Role::Rf),
            "dc" => Ok(Role::Dc),
            "ground" => Ok(Role::Ground),
            other => Err(Error::InvalidConfig(format!("unknown electrode role `{other}`"))),
        }
    }
}

/// How finely an edge of a polyline is meshed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeDetail {
    Fine,
    /// Shielded faces (outer wall faces, floors outside a trench).
    Coarse,
}

/// One conductor surface drawn as a polyline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectrodeSegment {
    pub electrode_id: String,
    pub role: Role,
    pub polyline: Vec<Vec2>,
    /// One entry per edge (`polyline.len() - 1`).
    pub detail: Vec<EdgeDetail>,
}

impl ElectrodeSegment {
    pub fn new(id: &str, role: Role, polyline: Vec<Vec2>) -> Self {
        let detail = vec![EdgeDetail::Fine; polyline.len().saturating_sub(1)];
        Self {
            electrode_id: id.to_string(),
            role,
            polyline,
            detail,
        }
    }

    pub fn with_detail(mut self, detail: Vec<EdgeDetail>) -> Self {
        self.detail = detail;
        self
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2, EdgeDetail)> + '_ {
        self.polyline
            .windows(2)
            .zip(self.detail.iter())
            .map(|(w, d)| (w[0], w[1], *d))
    }

    pub fn is_closed(&self) -> bool {
        self.polyline.len() > 2 && self.polyline.first() == self.polyline.last()
    }

    pub fn mirrored(&self, id: &str, role: Role) -> Self {
        Self {
            electrode_id: id.to_string(),
            role,
            polyline: self.polyline.iter().map(|p| p.mirror_x()).collect(),
            detail: self.detail.clone(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.polyline.len() < 2 || self.detail.len() + 1 != self.polyline.len() {
            return Err(Error::DegeneratePolyline(self.electrode_id.clone()));
        }
        for w in self.polyline.windows(2) {
            if !(w[0].is_finite() && w[1].is_finite()) || w[0].dist(w[1]) <= 1e-12 {
                return Err(Error::DegeneratePolyline(self.electrode_id.clone()));
            }
        }
        Ok(())
    }
}

/// Regions the ion can never occupy: solid bodies and the substrate.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Domain {
    /// Solid conductor or dielectric bodies (trench walls, wafer slabs).
    pub solids: Vec<Rect>,
    /// Top surface of the substrate; everything below is excluded.
    pub substrate: Option<f64>,
}

impl Domain {
    pub fn excludes(&self, p: Vec2) -> bool {
        if let Some(y0) = self.substrate {
            if p.y <= y0 {
                return true;
            }
        }
        self.solids.iter().any(|r| r.contains_strict(p))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            solids: self.solids.iter().map(|r| r.scaled(s)).collect(),
            substrate: self.substrate.map(|y| y * s),
        }
    }
}

/// Options that shape a cross-section beyond the family parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildOptions {
    /// Inter-electrode gap (µm).
    pub gap: f64,
    /// Target minimum ion-electrode separation (µm); sets the truncation
    /// extent and the derived wafer slot width.
    pub separation: f64,
    /// Truncation half-width of nominally infinite planes, in units of `separation`.
    pub extent_factor: f64,
    /// Role overrides keyed by electrode id.
    pub roles: BTreeMap<String, Role>,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            gap: 1.0,
            separation: 75.0,
            extent_factor: 20.0,
            roles: BTreeMap::new(),
        }
    }
}

/// A complete transverse slice of a trap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSection {
    pub family: TrapFamily,
    pub segments: Vec<ElectrodeSegment>,
    pub gap: f64,
    /// Truncation half-width of infinite planes (µm).
    pub extent: f64,
    pub domain: Domain,
    /// Box expected to hold exactly one pseudopotential minimum.
    pub seed_region: Rect,
}

impl CrossSection {
    /// Distinct electrode ids with their roles, in first-appearance order.
    pub fn electrodes(&self) -> Vec<(String, Role)> {
        let mut out: Vec<(String, Role)> = Vec::new();
        for s in &self.segments {
            if !out.iter().any(|(id, _)| *id == s.electrode_id) {
                out.push((s.electrode_id.clone(), s.role));
            }
        }
        out
    }

    pub fn bounding_box(&self) -> Rect {
        Rect::from_points(self.segments.iter().flat_map(|s| s.polyline.iter().copied()))
            .expect("cross-section has segments")
    }

    /// Minimum distance from `p` to any electrode surface, with the electrode id.
    pub fn nearest_electrode(&self, p: Vec2) -> (f64, &str) {
        let mut best = (f64::INFINITY, "");
        for s in &self.segments {
            for (a, b, _) in s.edges() {
                let d = crate::math::point_segment_distance(p, a, b);
                if d < best.0 {
                    best = (d, s.electrode_id.as_str());
                }
            }
        }
        best
    }

    /// Minimum distance between edges of different electrodes.
    pub fn min_electrode_spacing(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, si) in self.segments.iter().enumerate() {
            for sj in &self.segments[i + 1..] {
                if si.electrode_id == sj.electrode_id {
                    continue;
                }
                for (a0, a1, _) in si.edges() {
                    for (b0, b1, _) in sj.edges() {
                        best = best.min(segment_segment_distance(a0, a1, b0, b1));
                    }
                }
            }
        }
        best
    }

    fn validate(&self) -> Result<()> {
        for s in &self.segments {
            s.validate()?;
        }
        let ids = self.electrodes();
        for (id, role) in &ids {
            if self
                .segments
                .iter()
                .any(|s| &s.electrode_id == id && s.role != *role)
            {
                return Err(Error::SelfIntersectingGeometry(format!(
                    "electrode `{id}` has inconsistent roles"
                )));
            }
        }
        // Edges of one polyline may only touch their neighbours.
        for s in &self.segments {
            let edges: Vec<_> = s.edges().collect();
            let closed = s.is_closed();
            for i in 0..edges.len() {
                for j in i + 2..edges.len() {
                    if closed && i == 0 && j == edges.len() - 1 {
                        continue;
                    }
                    if segment_segment_distance(edges[i].0, edges[i].1, edges[j].0, edges[j].1)
                        < 1e-9
                    {
                        return Err(Error::SelfIntersectingGeometry(format!(
                            "electrode `{}` crosses itself",
                            s.electrode_id
                        )));
                    }
                }
            }
        }
        let spacing = self.min_electrode_spacing();
        if spacing < self.gap - 1e-9 {
            return Err(Error::SelfIntersectingGeometry(format!(
                "electrodes are {spacing:.4} µm apart, below the {} µm gap",
                self.gap
            )));
        }
        Ok(())
    }
}
