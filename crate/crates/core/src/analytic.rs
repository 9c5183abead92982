//! Gapless-plane model of a surface-electrode trap.
//!
//! Strips on `y = 0` are held at 1 V and the rest of the plane is grounded.
//! A strip `(x_l, x_r)` contributes `(1/π)[atan2(x_r - x, y) - atan2(x_l - x, y)]`
//! to the potential; strips may extend to infinity.

use crate::error::{Error, Result};
use crate::field::FieldSource;
use crate::geometry::{TrapFamily, TrapParams};
use crate::math::{Sym2, Vec2};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct StripSet {
    strips: Vec<(f64, f64)>,
}

impl StripSet {
    /// Strips must be ordered and non-overlapping; infinite ends are allowed.
    pub fn new(strips: Vec<(f64, f64)>) -> Result<Self> {
        let mut prev = f64::NEG_INFINITY;
        for &(l, r) in &strips {
            if l.is_nan() || r.is_nan() || !(l < r) || l < prev {
                return Err(Error::InvalidConfig(format!(
                    "strip ({l}, {r}) is empty, unordered or overlapping"
                )));
            }
            prev = r;
        }
        Ok(Self { strips })
    }

    /// RF strips of the surface-electrode families, from the same parameters
    /// as the cross-section builder.
    pub fn from_params(params: &TrapParams) -> Result<Self> {
        match params.family() {
            TrapFamily::SetSymmetric => {
                let (a, b) = (params.get("a"), params.get("b"));
                Self::new(vec![(-b / 2.0 - a, -b / 2.0), (b / 2.0, b / 2.0 + a)])
            }
            TrapFamily::SetAntisymmetric => {
                let phi = params.get("phi");
                Self::new(vec![(-phi, 0.0), (phi, f64::INFINITY)])
            }
            other => Err(Error::InvalidConfig(format!(
                "no gapless strip model for {other}"
            ))),
        }
    }

    pub fn strips(&self) -> &[(f64, f64)] {
        &self.strips
    }

    fn check(p: Vec2) -> Result<()> {
        if p.y > 0.0 {
            Ok(())
        } else {
            Err(Error::NonPositiveHeight(p.y))
        }
    }

    /// Sum over strip ends of `±f(x_e - x, y)` with `f = atan2`, its gradient
    /// and Hessian (with respect to the field point).
    fn sum(&self, p: Vec2, derivs: u8) -> (f64, Vec2, Sym2) {
        let mut v = 0.0;
        let mut g = Vec2::ZERO;
        let mut h = Sym2::default();
        let y = p.y;
        for &(l, r) in &self.strips {
            for (xe, sign) in [(r, 1.0), (l, -1.0)] {
                if xe.is_infinite() {
                    v += sign * xe.signum() * PI / 2.0;
                    continue;
                }
                let u = xe - p.x;
                v += sign * u.atan2(y);
                if derivs > 0 {
                    let r2 = u * u + y * y;
                    g += Vec2::new(-y / r2, -u / r2) * sign;
                    if derivs > 1 {
                        let r4 = r2 * r2;
                        h.xx += sign * (-2.0 * u * y / r4);
                        h.xy += sign * ((y * y - u * u) / r4);
                        h.yy += sign * (2.0 * u * y / r4);
                    }
                }
            }
        }
        (v / PI, g * (1.0 / PI), h.scaled(1.0 / PI))
    }

    /// Potential of the strips at 1 V.
    pub fn strip_potential(&self, p: Vec2) -> Result<f64> {
        Self::check(p)?;
        Ok(self.sum(p, 0).0)
    }

    /// Electric field `-∇φ`.
    pub fn set_field(&self, p: Vec2) -> Result<Vec2> {
        Self::check(p)?;
        Ok(-self.sum(p, 1).1)
    }
}

impl FieldSource for StripSet {
    fn potential(&self, p: Vec2) -> Result<f64> {
        self.strip_potential(p)
    }

    fn field(&self, p: Vec2) -> Result<Vec2> {
        self.set_field(p)
    }

    fn field_and_jacobian(&self, p: Vec2) -> Result<(Vec2, Sym2)> {
        Self::check(p)?;
        let (_, g, h) = self.sum(p, 2);
        Ok((-g, h.scaled(-1.0)))
    }
}

/// Height of the RF null above the symmetric five-wire layout with RF strip
/// width `a` and centre width `b`.
pub fn set_symmetric_height(a: f64, b: f64) -> f64 {
    ((b / 2.0) * (b / 2.0 + a)).sqrt()
}
