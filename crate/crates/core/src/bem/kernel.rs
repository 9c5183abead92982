//! Closed-form integrals of the 2D logarithmic kernel over a straight panel.
//!
//! For a panel of length `L` and a field point with local coordinates
//! `(ξ, η)` (along and normal to the panel, origin at its start), with
//! `t1 = -ξ`, `t2 = L - ξ` and `r1`, `r2` the distances to the endpoints:
//!
//! ```text
//! I      = ∫ ln|p - q(s)| ds = t2 ln r2 - t1 ln r1 - L + η θ
//! θ      = atan2(η L, η² + t1 t2)          (angle subtended by the panel)
//! ∂I/∂ξ  = ln(r1 / r2)
//! ∂I/∂η  = θ
//! ∂²I/∂ξ² = t2/r2² - t1/r1² = -∂²I/∂η²
//! ∂²I/∂ξ∂η = η/r1² - η/r2²
//! ```
//!
//! At the panel's own midpoint this reduces to `L (ln(L/2) - 1)`.

use crate::math::{Sym2, Vec2};

/// Precomputed frame of one panel.
#[derive(Debug, Clone, Copy)]
pub struct PanelFrame {
    pub a: Vec2,
    pub t: Vec2,
    pub n: Vec2,
    pub len: f64,
}

impl PanelFrame {
    pub fn new(a: Vec2, b: Vec2) -> Self {
        let len = a.dist(b);
        let t = (b - a) * (1.0 / len);
        Self {
            a,
            t,
            n: t.perp(),
            len,
        }
    }

    #[inline]
    fn local(&self, p: Vec2) -> Local {
        let d = p - self.a;
        let xi = d.dot(self.t);
        let eta = d.dot(self.n);
        let t1 = -xi;
        let t2 = self.len - xi;
        let eta2 = eta * eta;
        Local {
            eta,
            t1,
            t2,
            r1_sq: t1 * t1 + eta2,
            r2_sq: t2 * t2 + eta2,
        }
    }

    /// Euclidean distance from `p` to the panel.
    #[inline]
    pub fn distance(&self, p: Vec2) -> f64 {
        let l = self.local(p);
        if l.t1 <= 0.0 && l.t2 >= 0.0 {
            l.eta.abs()
        } else {
            l.r1_sq.min(l.r2_sq).sqrt()
        }
    }

    /// `∫ ln|p - q| ds` over the panel.
    #[inline]
    pub fn integral(&self, p: Vec2) -> f64 {
        let l = self.local(p);
        let theta = (l.eta * self.len).atan2(l.eta * l.eta + l.t1 * l.t2);
        let end1 = if l.t1 == 0.0 { 0.0 } else { 0.5 * l.t1 * l.r1_sq.ln() };
        let end2 = if l.t2 == 0.0 { 0.0 } else { 0.5 * l.t2 * l.r2_sq.ln() };
        end2 - end1 - self.len + l.eta * theta
    }

    /// Gradient of [`Self::integral`] with respect to `p`.
    #[inline]
    pub fn gradient(&self, p: Vec2) -> Vec2 {
        let l = self.local(p);
        let d_xi = 0.5 * (l.r1_sq / l.r2_sq).ln();
        let d_eta = (l.eta * self.len).atan2(l.eta * l.eta + l.t1 * l.t2);
        self.t * d_xi + self.n * d_eta
    }

    /// Gradient and Hessian of [`Self::integral`] with respect to `p`.
    #[inline]
    pub fn gradient_hessian(&self, p: Vec2) -> (Vec2, Sym2) {
        let l = self.local(p);
        let d_xi = 0.5 * (l.r1_sq / l.r2_sq).ln();
        let d_eta = (l.eta * self.len).atan2(l.eta * l.eta + l.t1 * l.t2);
        let (i1, i2) = (1.0 / l.r1_sq, 1.0 / l.r2_sq);
        let h_xx = l.t2 * i2 - l.t1 * i1;
        let h_xy = l.eta * (i1 - i2);
        let (t, n) = (self.t, self.n);
        // H = h_xx (t tᵀ - n nᵀ) + h_xy (t nᵀ + n tᵀ)
        let hess = Sym2 {
            xx: h_xx * (t.x * t.x - n.x * n.x) + 2.0 * h_xy * t.x * n.x,
            xy: h_xx * (t.x * t.y - n.x * n.y) + h_xy * (t.x * n.y + n.x * t.y),
            yy: h_xx * (t.y * t.y - n.y * n.y) + 2.0 * h_xy * t.y * n.y,
        };
        (t * d_xi + n * d_eta, hess)
    }
}

struct Local {
    eta: f64,
    t1: f64,
    t2: f64,
    r1_sq: f64,
    r2_sq: f64,
}
