//! Open numerical aperture above and below the ion.
//!
//! The collection cone is a wedge about the vertical through the ion. Every
//! electrode edge and solid-body edge on the blocking side bounds it; since
//! the angle to the vertical is monotone along a straight edge that misses
//! the ion, only clipped endpoints and axis crossings need checking.
//! Upward the detector is at infinity. Downward it is the substrate top,
//! and metal lying in that plane does not clip; without a substrate the
//! detector is at infinity as well.

use crate::error::{Error, Result};
use crate::geometry::CrossSection;
use crate::math::Vec2;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

/// The edge point that clips the cone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Limit {
    /// Electrode id, or `dielectric` for a bare solid face.
    pub electrode: String,
    pub point: Vec2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aperture {
    pub na: f64,
    /// Half-angle of the cone (rad).
    pub half_angle: f64,
    /// `None` when unobstructed.
    pub limit: Option<Limit>,
}

impl fmt::Display for Aperture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.limit {
            None => write!(f, "NA {:.4} (unobstructed)", self.na),
            Some(l) => write!(
                f,
                "NA {:.4} (limited by {} at ({:.2}, {:.2}))",
                self.na, l.electrode, l.point.x, l.point.y
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApertureResult {
    pub above: Aperture,
    pub below: Aperture,
}

/// Both apertures at once.
pub fn apertures(cs: &CrossSection, ion: Vec2) -> Result<ApertureResult> {
    Ok(ApertureResult {
        above: numerical_aperture(cs, ion, Direction::Up)?,
        below: numerical_aperture(cs, ion, Direction::Down)?,
    })
}

/// All edges that can block light, tagged with their owner.
fn blockers(cs: &CrossSection) -> Vec<(Vec2, Vec2, &str)> {
    let mut out: Vec<(Vec2, Vec2, &str)> = Vec::new();
    for s in &cs.segments {
        for (a, b, _) in s.edges() {
            out.push((a, b, s.electrode_id.as_str()));
        }
    }
    for r in &cs.domain.solids {
        let c = [
            Vec2::new(r.min.x, r.min.y),
            Vec2::new(r.max.x, r.min.y),
            Vec2::new(r.max.x, r.max.y),
            Vec2::new(r.min.x, r.max.y),
        ];
        for k in 0..4 {
            out.push((c[k], c[(k + 1) % 4], "dielectric"));
        }
    }
    out
}

pub fn numerical_aperture(cs: &CrossSection, ion: Vec2, direction: Direction) -> Result<Aperture> {
    if !ion.is_finite() || cs.domain.excludes(ion) {
        return Err(Error::IonInsideConductor);
    }
    let flip = match direction {
        Direction::Up => 1.0,
        Direction::Down => -1.0,
    };
    // local frame: the cone axis is +y, the detector plane sits at y = depth
    let depth = match (direction, cs.domain.substrate) {
        (Direction::Down, Some(y0)) => ion.y - y0,
        _ => f64::INFINITY,
    };
    let local = |p: Vec2| Vec2::new(p.x - ion.x, flip * (p.y - ion.y));
    let mut best = FRAC_PI_2;
    let mut limit: Option<Limit> = None;
    for (a, b, owner) in blockers(cs) {
        let (mut p, mut q) = (local(a), local(b));
        if p.y > q.y {
            std::mem::swap(&mut p, &mut q);
        }
        if q.y <= 0.0 || p.y >= depth {
            continue;
        }
        if p.y < 0.0 {
            p = p + (q - p) * (-p.y / (q.y - p.y));
        }
        if q.y > depth {
            q = p + (q - p) * ((depth - p.y) / (q.y - p.y));
        }
        let (tp, tq) = (p.x.atan2(p.y), q.x.atan2(q.y));
        let (angle, at) = if tp * tq <= 0.0 {
            // crosses the axis; locate the crossing for reporting
            let s = if p.x == q.x { 0.0 } else { p.x / (p.x - q.x) };
            (0.0, p + (q - p) * s)
        } else if tp.abs() <= tq.abs() {
            (tp.abs(), p)
        } else {
            (tq.abs(), q)
        };
        if angle < best {
            best = angle;
            limit = Some(Limit {
                electrode: owner.to_string(),
                point: Vec2::new(at.x + ion.x, flip * at.y + ion.y),
            });
        }
    }
    Ok(Aperture {
        na: best.sin(),
        half_angle: best,
        limit,
    })
}
