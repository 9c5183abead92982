//! Common interface of electrostatic field evaluators.

use crate::error::Result;
use crate::math::{Sym2, Vec2};

/// A 2D electrostatic potential with analytic derivatives.
///
/// Units are volts and micrometres, so fields are in V/µm. The Jacobian
/// `∂E_i/∂x_j` of a curl-free field is symmetric, hence [`Sym2`].
pub trait FieldSource: Sync {
    fn potential(&self, p: Vec2) -> Result<f64>;

    fn field(&self, p: Vec2) -> Result<Vec2>;

    fn field_and_jacobian(&self, p: Vec2) -> Result<(Vec2, Sym2)>;
}

impl<F: FieldSource + ?Sized> FieldSource for &F {
    fn potential(&self, p: Vec2) -> Result<f64> {
        (**self).potential(p)
    }

    fn field(&self, p: Vec2) -> Result<Vec2> {
        (**self).field(p)
    }

    fn field_and_jacobian(&self, p: Vec2) -> Result<(Vec2, Sym2)> {
        (**self).field_and_jacobian(p)
    }
}

/// Pure 2D quadrupole `φ = (E₀ / 2r₀)·((x-x_c)² - (y-y_c)²) + offset`, whose
/// field magnitude is `E₀·r/r₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealQuadrupole {
    pub center: Vec2,
    /// Field magnitude (V/µm) at radius `r0`.
    pub e0: f64,
    pub r0: f64,
    pub offset: f64,
}

impl IdealQuadrupole {
    pub fn new(center: Vec2, e0: f64, r0: f64) -> Self {
        Self {
            center,
            e0,
            r0,
            offset: 0.0,
        }
    }
}

impl FieldSource for IdealQuadrupole {
    fn potential(&self, p: Vec2) -> Result<f64> {
        let d = p - self.center;
        Ok(0.5 * self.e0 / self.r0 * (d.x * d.x - d.y * d.y) + self.offset)
    }

    fn field(&self, p: Vec2) -> Result<Vec2> {
        let d = p - self.center;
        let k = self.e0 / self.r0;
        Ok(Vec2::new(-k * d.x, k * d.y))
    }

    fn field_and_jacobian(&self, p: Vec2) -> Result<(Vec2, Sym2)> {
        let k = self.e0 / self.r0;
        Ok((
            self.field(p)?,
            Sym2 {
                xx: -k,
                xy: 0.0,
                yy: k,
            },
        ))
    }
}

/// A field source multiplied by a constant voltage factor.
#[derive(Debug, Clone, Copy)]
pub struct Scaled<F> {
    pub inner: F,
    pub factor: f64,
}

impl<F: FieldSource> FieldSource for Scaled<F> {
    fn potential(&self, p: Vec2) -> Result<f64> {
        Ok(self.inner.potential(p)? * self.factor)
    }

    fn field(&self, p: Vec2) -> Result<Vec2> {
        Ok(self.inner.field(p)? * self.factor)
    }

    fn field_and_jacobian(&self, p: Vec2) -> Result<(Vec2, Sym2)> {
        let (e, j) = self.inner.field_and_jacobian(p)?;
        Ok((e * self.factor, j.scaled(self.factor)))
    }
}

/// A field source with a constant added to its potential.
#[derive(Debug, Clone, Copy)]
pub struct Offset<F> {
    pub inner: F,
    pub volts: f64,
}

impl<F: FieldSource> FieldSource for Offset<F> {
    fn potential(&self, p: Vec2) -> Result<f64> {
        Ok(self.inner.potential(p)? + self.volts)
    }

    fn field(&self, p: Vec2) -> Result<Vec2> {
        self.inner.field(p)
    }

    fn field_and_jacobian(&self, p: Vec2) -> Result<(Vec2, Sym2)> {
        self.inner.field_and_jacobian(p)
    }
}
