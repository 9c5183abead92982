//! Graded straight-panel discretisation of a cross-section.
//!
//! The target panel length at a point is `grading · d`, clamped to
//! `[ℓ_min, ℓ_max]`, where `d` is the distance to the nearest polyline vertex
//! of any electrode. Vertices are where gaps and corners sit, which is where
//! the surface charge is singular. Nodes along each edge equidistribute the
//! density `1/h`, so panels are short near vertices and grow geometrically away
//! from them.

use super::{CrossSection, EdgeDetail, Role};
use crate::error::{Error, Result};
use crate::math::{point_segment_distance, Vec2};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshPolicy {
    pub l_min: f64,
    pub l_max: f64,
    pub grading: f64,
    /// Multiplier on `l_max` for coarse (shielded) edges.
    pub coarse_factor: f64,
    /// Largest mesh the solver will factorise.
    pub max_panels: usize,
}

impl Default for MeshPolicy {
    fn default() -> Self {
        Self {
            l_min: 0.25,
            l_max: 5.0,
            grading: 0.3,
            coarse_factor: 4.0,
            max_panels: 6000,
        }
    }
}

impl MeshPolicy {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("l_min", self.l_min),
            ("l_max", self.l_max),
            ("grading", self.grading),
            ("coarse_factor", self.coarse_factor),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::NonPositiveLength {
                    name: name.into(),
                    value: v,
                });
            }
        }
        if self.l_min > self.l_max {
            return Err(Error::InvalidConfig(format!(
                "mesh l_min {} exceeds l_max {}",
                self.l_min, self.l_max
            )));
        }
        Ok(())
    }
}

/// A straight boundary panel carrying a constant charge density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    pub a: Vec2,
    pub b: Vec2,
    /// Index into [`PanelMesh::electrodes`].
    pub electrode: usize,
}

impl Panel {
    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }

    pub fn midpoint(&self) -> Vec2 {
        (self.a + self.b) * 0.5
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelMesh {
    pub panels: Vec<Panel>,
    /// Electrode ids and roles, indexed by [`Panel::electrode`].
    pub electrodes: Vec<(String, Role)>,
}

impl PanelMesh {
    pub fn len(&self) -> usize {
        self.panels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.panels.is_empty()
    }

    pub fn electrode_index(&self, id: &str) -> Option<usize> {
        self.electrodes.iter().position(|(e, _)| e == id)
    }

    /// Uniform scaling of every coordinate.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            panels: self
                .panels
                .iter()
                .map(|p| Panel {
                    a: p.a * s,
                    b: p.b * s,
                    electrode: p.electrode,
                })
                .collect(),
            electrodes: self.electrodes.clone(),
        }
    }

    /// Smallest distance from `p` to any panel, and the length of that panel.
    pub fn nearest_panel(&self, p: Vec2) -> (f64, f64) {
        let mut best = (f64::INFINITY, 0.0);
        for panel in &self.panels {
            let d = point_segment_distance(p, panel.a, panel.b);
            if d < best.0 {
                best = (d, panel.length());
            }
        }
        best
    }
}

/// Meshes every edge of every electrode of `cs` under `policy`.
pub fn mesh_panels(cs: &CrossSection, policy: &MeshPolicy) -> Result<PanelMesh> {
    policy.validate()?;
    let electrodes = cs.electrodes();
    let vertices: Vec<Vec2> = cs
        .segments
        .iter()
        .flat_map(|s| s.polyline.iter().copied())
        .collect();
    let mut panels = Vec::new();
    for seg in &cs.segments {
        if seg.polyline.len() < 2 {
            return Err(Error::DegeneratePolyline(seg.electrode_id.clone()));
        }
        let electrode = electrodes
            .iter()
            .position(|(id, _)| *id == seg.electrode_id)
            .expect("segment id is listed");
        for (a, b, detail) in seg.edges() {
            let len = a.dist(b);
            if !(len > 1e-12) {
                return Err(Error::DegeneratePolyline(seg.electrode_id.clone()));
            }
            let cap = match detail {
                EdgeDetail::Fine => policy.l_max,
                EdgeDetail::Coarse => policy.l_max * policy.coarse_factor,
            };
            let ts = edge_nodes(a, b, &vertices, policy, cap);
            let dir = b - a;
            for w in ts.windows(2) {
                let pa = if w[0] == 0.0 { a } else { a + dir * w[0] };
                let pb = if w[1] == 1.0 { b } else { a + dir * w[1] };
                panels.push(Panel {
                    a: pa,
                    b: pb,
                    electrode,
                });
            }
        }
    }
    Ok(PanelMesh { panels, electrodes })
}

/// Parametric node positions in [0, 1] along the edge `a → b`.
fn edge_nodes(a: Vec2, b: Vec2, vertices: &[Vec2], policy: &MeshPolicy, cap: f64) -> Vec<f64> {
    let len = a.dist(b);
    let dir = b - a;
    let size = |t: f64| {
        let q = a + dir * t;
        let d = vertices
            .iter()
            .map(|v| v.dist(q))
            .fold(f64::INFINITY, f64::min);
        (policy.grading * d).clamp(policy.l_min, cap)
    };
    let samples = ((len / (0.25 * policy.l_min)).ceil() as usize).clamp(8, 200_000);
    let mut cum = Vec::with_capacity(samples + 1);
    cum.push(0.0);
    let mut prev = 1.0 / size(0.0);
    for k in 1..=samples {
        let t = k as f64 / samples as f64;
        let cur = 1.0 / size(t);
        let last = *cum.last().unwrap();
        cum.push(last + 0.5 * (prev + cur) * len / samples as f64);
        prev = cur;
    }
    let total = *cum.last().unwrap();
    let n = ((total * 1.02).ceil() as usize).max(1);
    let mut ts = Vec::with_capacity(n + 1);
    ts.push(0.0);
    let mut k = 0;
    for i in 1..n {
        let target = total * i as f64 / n as f64;
        while cum[k + 1] < target {
            k += 1;
        }
        let frac = (target - cum[k]) / (cum[k + 1] - cum[k]);
        ts.push((k as f64 + frac) / samples as f64);
    }
    ts.push(1.0);
    ts
}
