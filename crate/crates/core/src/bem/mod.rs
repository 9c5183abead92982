//! First-kind boundary-element solver for the 2D exterior Laplace problem.
//!
//! Each panel carries a constant line-charge density `σ`. The potential is
//!
//! ```text
//! φ(p) = -(1/2π) Σ_j σ_j ∫_j ln|p - q| ds + C
//! ```
//!
//! where `C` is the potential at infinity. Collocating at panel midpoints and
//! adding the zero-net-charge row `Σ σ_j L_j = 0` gives a bordered system whose
//! solution is the bounded exterior field and does not depend on the unit of
//! length. One LU factorisation serves the unit-voltage basis of every
//! electrode.

mod cache;
pub mod kernel;

use crate::error::{Error, Result};
use crate::field::FieldSource;
use crate::geometry::{Domain, Panel, PanelMesh, Role};
use crate::math::{Sym2, Vec2};
use faer::linalg::solvers::Solve;
use faer::Mat;
use kernel::PanelFrame;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;

pub use cache::{cache_key, CACHE_ENV};

/// Condition estimates above this are reported as a singular system.
const SINGULAR_CONDITION: f64 = 1e14;

/// Unit-voltage charge solutions for every electrode of a mesh.
#[derive(Debug, Clone)]
pub struct BemSolution {
    mesh: PanelMesh,
    frames: Vec<PanelFrame>,
    charges: Vec<Vec<f64>>,
    offsets: Vec<f64>,
    conditioning: f64,
    domain: Domain,
}

/// Solves the basis problem for every electrode in `mesh`.
///
/// When the `TRENCHFIELD_CACHE_DIR` environment variable names a directory,
/// solutions are looked up there by mesh hash and stored after a miss.
pub fn solve_basis(mesh: &PanelMesh, max_panels: usize) -> Result<BemSolution> {
    if mesh.is_empty() {
        return Err(Error::InvalidConfig("cannot solve an empty mesh".into()));
    }
    if mesh.len() > max_panels {
        return Err(Error::MeshTooLarge {
            panels: mesh.len(),
            cap: max_panels,
        });
    }
    let frames: Vec<PanelFrame> = mesh.panels.iter().map(|p| PanelFrame::new(p.a, p.b)).collect();
    let cache_dir = std::env::var_os(CACHE_ENV).map(std::path::PathBuf::from);
    let key = cache_key(mesh);
    if let Some(dir) = &cache_dir {
        if let Some(hit) = cache::load(dir, &key, mesh.len(), mesh.electrodes.len()) {
            log::debug!("bem cache hit {key}");
            return Ok(BemSolution {
                mesh: mesh.clone(),
                frames,
                charges: hit.charges,
                offsets: hit.offsets,
                conditioning: hit.conditioning,
                domain: Domain::default(),
            });
        }
    }

    let n = mesh.len();
    let mids: Vec<Vec2> = mesh.panels.iter().map(|p| p.midpoint()).collect();
    let columns: Vec<Vec<f64>> = frames
        .par_iter()
        .map(|f| mids.iter().map(|&m| -f.integral(m) / (2.0 * PI)).collect())
        .collect();
    let a = Mat::<f64>::from_fn(n + 1, n + 1, |i, j| match (i < n, j < n) {
        (true, true) => columns[j][i],
        (true, false) => 1.0,
        (false, true) => frames[j].len,
        (false, false) => 0.0,
    });
    let norm_a = (0..=n)
        .map(|j| (0..=n).map(|i| a[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let lu = a.partial_piv_lu();

    let m = mesh.electrodes.len();
    let rhs = Mat::<f64>::from_fn(n + 1, m, |i, e| {
        if i < n && mesh.panels[i].electrode == e {
            1.0
        } else {
            0.0
        }
    });
    let x = lu.solve(&rhs);
    let conditioning = norm_a * inverse_norm_estimate(&lu, n + 1);
    let finite = (0..m).all(|e| (0..=n).all(|i| x[(i, e)].is_finite()));
    if !finite || !(conditioning < SINGULAR_CONDITION) {
        return Err(Error::SingularMatrix { conditioning });
    }
    let charges: Vec<Vec<f64>> = (0..m).map(|e| (0..n).map(|i| x[(i, e)]).collect()).collect();
    let offsets: Vec<f64> = (0..m).map(|e| x[(n, e)]).collect();
    if let Some(dir) = &cache_dir {
        if let Err(err) = cache::store(dir, &key, conditioning, &charges, &offsets) {
            log::warn!("could not write bem cache entry {key}: {err}");
        }
    }
    Ok(BemSolution {
        mesh: mesh.clone(),
        frames,
        charges,
        offsets,
        conditioning,
        domain: Domain::default(),
    })
}

/// Hager's estimate of `‖A⁻¹‖₁` from solves with `A` and `Aᵀ`.
fn inverse_norm_estimate<S: Solve<f64>>(lu: &S, n: usize) -> f64 {
    let mut x = Mat::<f64>::from_fn(n, 1, |_, _| 1.0 / n as f64);
    let mut estimate = 0.0;
    for _ in 0..5 {
        let y = lu.solve(&x);
        estimate = (0..n).map(|i| y[(i, 0)].abs()).sum::<f64>();
        let sign = Mat::<f64>::from_fn(n, 1, |i, _| if y[(i, 0)] >= 0.0 { 1.0 } else { -1.0 });
        let z = lu.solve_transpose(&sign);
        let (j, zmax) = (0..n)
            .map(|i| (i, z[(i, 0)].abs()))
            .fold((0, -1.0), |best, c| if c.1 > best.1 { c } else { best });
        let ztx: f64 = (0..n).map(|i| z[(i, 0)] * x[(i, 0)]).sum();
        if zmax <= ztx {
            break;
        }
        x = Mat::<f64>::from_fn(n, 1, |i, _| if i == j { 1.0 } else { 0.0 });
    }
    estimate
}

impl BemSolution {
    /// Attaches the excluded regions used to reject evaluation points.
    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn mesh(&self) -> &PanelMesh {
        &self.mesh
    }

    pub fn electrodes(&self) -> &[(String, Role)] {
        &self.mesh.electrodes
    }

    /// 1-norm condition estimate of the bordered collocation matrix.
    pub fn conditioning(&self) -> f64 {
        self.conditioning
    }

    /// Charge densities of the unit-voltage basis of one electrode.
    pub fn basis_charges(&self, id: &str) -> Result<&[f64]> {
        let e = self
            .mesh
            .electrode_index(id)
            .ok_or_else(|| Error::UnknownElectrode(id.into()))?;
        Ok(&self.charges[e])
    }

    /// Superposes the bases with the given electrode voltages; electrodes not
    /// named are grounded.
    pub fn drive(&self, voltages: &BTreeMap<String, f64>) -> Result<Drive<'_>> {
        let mut weights = vec![0.0; self.charges.len()];
        for (id, v) in voltages {
            let e = self
                .mesh
                .electrode_index(id)
                .ok_or_else(|| Error::UnknownElectrode(id.clone()))?;
            weights[e] = *v;
        }
        Ok(self.drive_weights(&weights))
    }

    /// RF electrodes at `volts`, every other electrode grounded.
    pub fn rf_drive(&self, volts: f64) -> Drive<'_> {
        let weights: Vec<f64> = self
            .mesh
            .electrodes
            .iter()
            .map(|(_, r)| r.unit_rf_voltage() * volts)
            .collect();
        self.drive_weights(&weights)
    }

    fn drive_weights(&self, weights: &[f64]) -> Drive<'_> {
        let n = self.frames.len();
        let mut sigma = vec![0.0; n];
        let mut offset = 0.0;
        for (e, &w) in weights.iter().enumerate() {
            if w != 0.0 {
                for (s, c) in sigma.iter_mut().zip(&self.charges[e]) {
                    *s += w * c;
                }
                offset += w * self.offsets[e];
            }
        }
        Drive {
            sol: self,
            sigma,
            offset,
        }
    }

    /// Potential at `p` for the given electrode voltages.
    pub fn potential_at(&self, p: Vec2, voltages: &BTreeMap<String, f64>) -> Result<f64> {
        self.drive(voltages)?.potential(p)
    }

    /// Electric field at `p` for the given electrode voltages.
    pub fn field_at(&self, p: Vec2, voltages: &BTreeMap<String, f64>) -> Result<Vec2> {
        self.drive(voltages)?.field(p)
    }

    /// Largest deviation of the basis potential of electrode `e` from its
    /// boundary values (1 on its own panels, 0 elsewhere) at panel midpoints.
    pub fn boundary_residual(&self, id: &str) -> Result<f64> {
        let e = self
            .mesh
            .electrode_index(id)
            .ok_or_else(|| Error::UnknownElectrode(id.into()))?;
        let mut weights = vec![0.0; self.charges.len()];
        weights[e] = 1.0;
        let drive = self.drive_weights(&weights);
        Ok(self
            .mesh
            .panels
            .iter()
            .map(|p| {
                let target = if p.electrode == e { 1.0 } else { 0.0 };
                (drive.potential_unchecked(p.midpoint()) - target).abs()
            })
            .fold(0.0, f64::max))
    }

    fn check_point(&self, p: Vec2) -> Result<()> {
        if !p.is_finite() || self.domain.excludes(p) {
            return Err(Error::PointInsideConductor { x: p.x, y: p.y });
        }
        for f in &self.frames {
            if f.distance(p) < 0.5 * f.len {
                return Err(Error::PointTooCloseToBoundary { x: p.x, y: p.y });
            }
        }
        Ok(())
    }
}

/// A fixed superposition of basis solutions.
#[derive(Debug, Clone)]
pub struct Drive<'a> {
    sol: &'a BemSolution,
    sigma: Vec<f64>,
    offset: f64,
}

impl Drive<'_> {
    /// Potential without the evaluation-point checks; used for collocation
    /// residuals on the boundary itself.
    pub fn potential_unchecked(&self, p: Vec2) -> f64 {
        let s: f64 = self
            .sol
            .frames
            .iter()
            .zip(&self.sigma)
            .map(|(f, &q)| q * f.integral(p))
            .sum();
        -s / (2.0 * PI) + self.offset
    }

    pub fn charges(&self) -> &[f64] {
        &self.sigma
    }

    /// Potential at infinity.
    pub fn offset(&self) -> f64 {
        self.offset
    }
}

impl FieldSource for Drive<'_> {
    fn potential(&self, p: Vec2) -> Result<f64> {
        self.sol.check_point(p)?;
        Ok(self.potential_unchecked(p))
    }

    fn field(&self, p: Vec2) -> Result<Vec2> {
        self.sol.check_point(p)?;
        let mut g = Vec2::ZERO;
        for (f, &q) in self.sol.frames.iter().zip(&self.sigma) {
            g += f.gradient(p) * q;
        }
        Ok(g * (1.0 / (2.0 * PI)))
    }

    fn field_and_jacobian(&self, p: Vec2) -> Result<(Vec2, Sym2)> {
        self.sol.check_point(p)?;
        let mut g = Vec2::ZERO;
        let mut h = Sym2::default();
        for (f, &q) in self.sol.frames.iter().zip(&self.sigma) {
            let (gi, hi) = f.gradient_hessian(p);
            g += gi * q;
            h.xx += hi.xx * q;
            h.xy += hi.xy * q;
            h.yy += hi.yy * q;
        }
        let k = 1.0 / (2.0 * PI);
        Ok((g * k, h.scaled(k)))
    }
}

/// Coaxial validation mesh: `n` panels on each of two concentric circles,
/// inner radius `a` as electrode `inner` and outer radius `b` as `outer`.
pub fn coax_mesh(a: f64, b: f64, n: usize) -> PanelMesh {
    let ring = |r: f64, e: usize| {
        (0..n).map(move |k| {
            let t0 = 2.0 * PI * k as f64 / n as f64;
            let t1 = 2.0 * PI * (k + 1) as f64 / n as f64;
            Panel {
                a: Vec2::from_polar(r, t0),
                b: Vec2::from_polar(r, t1),
                electrode: e,
            }
        })
    };
    PanelMesh {
        panels: ring(a, 0).chain(ring(b, 1)).collect(),
        electrodes: vec![("inner".into(), Role::Rf), ("outer".into(), Role::Dc)],
    }
}
