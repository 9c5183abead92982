//! Cylindrical-harmonic expansion of the potential around the ion:
//!
//! ```text
//! V(r, θ) = V0 Σ_{n≥1} C_n (r/r0)^n cos(nθ + φ_n) + V_off
//! ```
//!
//! fitted by linear least squares on two concentric sample circles.

use crate::error::{Error, Result};
use crate::field::FieldSource;
use crate::math::Vec2;
use faer::linalg::solvers::SolveLstsq;
use faer::Mat;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitSettings {
    pub n_max: usize,
    /// Outer circle radius as a fraction of `r0`; the inner circle is half of it.
    pub fit_radius_factor: f64,
    /// Samples per circle.
    pub n_samples: usize,
}

impl Default for FitSettings {
    fn default() -> Self {
        Self {
            n_max: 6,
            fit_radius_factor: 0.2,
            n_samples: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultipoleFit {
    pub center: Vec2,
    pub r0: f64,
    pub v0: f64,
    pub fit_radius: f64,
    pub n_max: usize,
    /// `c[n]` for `n = 0..=n_max`; `c[0]` is unused and zero.
    pub c: Vec<f64>,
    /// Phase of each order in `[0, 2π)`.
    pub phi: Vec<f64>,
    pub v_off: f64,
    /// RMS misfit over all samples (V).
    pub residual: f64,
}

impl MultipoleFit {
    pub fn coefficient(&self, n: usize) -> f64 {
        self.c.get(n).copied().unwrap_or(0.0)
    }

    /// Residual above `1e-4·V0`.
    pub fn residual_flag(&self) -> bool {
        self.residual > 1e-4 * self.v0.abs()
    }

    /// Dipole term above `1e-3·C₂`, meaning the centre is off the field null.
    pub fn dipole_flag(&self) -> bool {
        self.coefficient(1) > 1e-3 * self.coefficient(2)
    }
}

/// Fits the expansion to the potential of `source` around `center`.
pub fn fit_multipoles<F: FieldSource + ?Sized>(
    source: &F,
    center: Vec2,
    r0: f64,
    v0: f64,
    n_max: usize,
    fit_radius: f64,
    n_samples: usize,
) -> Result<MultipoleFit> {
    if n_max == 0 || n_samples < 4 * n_max || !(r0 > 0.0) || !(fit_radius > 0.0) || v0 == 0.0 {
        return Err(Error::IllConditionedFit(format!(
            "need n_max ≥ 1, n_samples ≥ 4·n_max and positive radii (n_max {n_max}, samples {n_samples})"
        )));
    }
    let mut rows: Vec<(f64, f64, f64)> = Vec::with_capacity(2 * n_samples);
    for radius in [0.5 * fit_radius, fit_radius] {
        for k in 0..n_samples {
            let theta = 2.0 * PI * k as f64 / n_samples as f64;
            let p = center + Vec2::from_polar(radius, theta);
            let v = source.potential(p).map_err(|e| match e {
                Error::PointInsideConductor { .. }
                | Error::PointTooCloseToBoundary { .. }
                | Error::NonPositiveHeight(_) => Error::FitCircleIntersectsElectrode,
                other => other,
            })?;
            rows.push((radius / r0, theta, v));
        }
    }
    let cols = 1 + 2 * n_max;
    let basis = |row: usize, col: usize| {
        let (rho, theta, _) = rows[row];
        if col == 0 {
            return 1.0;
        }
        let n = (col + 1) / 2;
        let radial = rho.powi(n as i32);
        if col % 2 == 1 {
            radial * (n as f64 * theta).cos()
        } else {
            radial * (n as f64 * theta).sin()
        }
    };
    let m = rows.len();
    let norms: Vec<f64> = (0..cols)
        .map(|j| (0..m).map(|i| basis(i, j).powi(2)).sum::<f64>().sqrt())
        .collect();
    let a = Mat::<f64>::from_fn(m, cols, |i, j| basis(i, j) / norms[j]);
    let b = Mat::<f64>::from_fn(m, 1, |i, _| rows[i].2);
    let qr = a.qr();
    let r = qr.thin_R();
    let diag: Vec<f64> = (0..cols).map(|i| r[(i, i)].abs()).collect();
    let (lo, hi) = diag
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &d| (lo.min(d), hi.max(d)));
    if !(lo > 1e-10 * hi) {
        return Err(Error::IllConditionedFit(format!(
            "design matrix diagonal ratio {:.3e}",
            lo / hi
        )));
    }
    let x = qr.solve_lstsq(&b);
    let coef: Vec<f64> = (0..cols).map(|j| x[(j, 0)] / norms[j]).collect();
    let residual = ((0..m)
        .map(|i| {
            let model: f64 = (0..cols).map(|j| coef[j] * basis(i, j)).sum();
            (model - rows[i].2).powi(2)
        })
        .sum::<f64>()
        / m as f64)
        .sqrt();
    let mut c = vec![0.0; n_max + 1];
    let mut phi = vec![0.0; n_max + 1];
    for n in 1..=n_max {
        let (an, bn) = (coef[2 * n - 1], coef[2 * n]);
        // a cos nθ + b sin nθ = C cos(nθ + φ) with a = C cos φ, b = -C sin φ
        c[n] = an.hypot(bn) / v0.abs();
        phi[n] = (-bn).atan2(an).rem_euclid(2.0 * PI) + if v0 < 0.0 { PI } else { 0.0 };
        phi[n] = phi[n].rem_euclid(2.0 * PI);
    }
    Ok(MultipoleFit {
        center,
        r0,
        v0,
        fit_radius,
        n_max,
        c,
        phi,
        v_off: coef[0],
        residual,
    })
}

/// Fit with [`FitSettings`], the outer radius being `fit_radius_factor·r0`.
pub fn fit_with<F: FieldSource + ?Sized>(
    source: &F,
    center: Vec2,
    r0: f64,
    v0: f64,
    settings: &FitSettings,
) -> Result<MultipoleFit> {
    fit_multipoles(
        source,
        center,
        r0,
        v0,
        settings.n_max,
        settings.fit_radius_factor * r0,
        settings.n_samples,
    )
}

/// `(C₂, C₃/C₂, C₄/C₂)`.
pub fn derived_ratios(fit: &MultipoleFit) -> Result<(f64, f64, f64)> {
    let c2 = fit.coefficient(2);
    if !(c2 > 0.0) {
        return Err(Error::ZeroQuadrupole);
    }
    Ok((c2, fit.coefficient(3) / c2, fit.coefficient(4) / c2))
}

/// Relative changes of `(C₂, C₃′, C₄′)` when the fit radius is scaled by 0.75
/// and 1.25, with whether they stay under 0.5% / 2% / 2%.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusCheck {
    pub c2_change: f64,
    pub c3p_change: f64,
    pub c4p_change: f64,
    pub robust: bool,
}

pub fn radius_robustness<F: FieldSource + ?Sized>(
    source: &F,
    fit: &MultipoleFit,
    n_samples: usize,
) -> Result<RadiusCheck> {
    let (c2, c3, c4) = derived_ratios(fit)?;
    let mut worst = [0.0f64; 3];
    for factor in [0.75, 1.25] {
        let other = fit_multipoles(
            source,
            fit.center,
            fit.r0,
            fit.v0,
            fit.n_max,
            factor * fit.fit_radius,
            n_samples,
        )?;
        let (d2, d3, d4) = derived_ratios(&other)?;
        // ratios under 1e-3 are compared absolutely
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-3);
        worst[0] = worst[0].max(rel(d2, c2));
        worst[1] = worst[1].max(rel(d3, c3));
        worst[2] = worst[2].max(rel(d4, c4));
    }
    Ok(RadiusCheck {
        c2_change: worst[0],
        c3p_change: worst[1],
        c4p_change: worst[2],
        robust: worst[0] < 5e-3 && worst[1] < 2e-2 && worst[2] < 2e-2,
    })
}
