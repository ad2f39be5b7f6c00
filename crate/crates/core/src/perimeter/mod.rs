//! `Per_ν(E) = ∫ (g_E(0) - g_E(y)) ν(dy)` and its relatives.
//!
//! The integral is taken ray by ray: for each direction `θ` of the
//! spherical quadrature, `∫_0^∞ F(rθ) ρ_θ(dr)` is split into a near part
//! (where the linear behaviour `F ≈ s·r` is subtracted and integrated in
//! closed form), a bulk part up to the support radius of `F`, and a tail
//! where `F` is constant.

mod dyadic;
mod functional;
mod oracle;
mod symmetry;

pub use dyadic::{dyadic_example_inner, dyadic_per_nu, dyadic_self_term, DYADIC_N_MAX};
pub use functional::{coarea_rhs, f_nu, GridFunction};
pub use oracle::{per_nu_mc_oracle, McOptions};
pub use symmetry::{symmetry_check, SymmetryReport};

use crate::constants::sphere_area;
use crate::error::{Error, Result};
use crate::geometry::{covariogram, SetGeometry, ShiftFunction};
use crate::measures::{Kernel, MeasureSpec, RadialProfile, Ray};
use crate::point::P3;
use crate::quadrature::{QuadResult, Tolerance};
use crate::sphere::SphereGrid;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Target relative tolerance.
    pub rel_tol: f64,
    pub sphere: SphereGrid,
    /// Radial pieces per decade beyond the automatic splitting (0 = automatic).
    pub nodes_per_decade: usize,
    /// Inner cutoff. Zero selects slope subtraction near the origin; a
    /// positive value truncates there and books `L·∫_0^{r_min} r ρ(dr)` as error.
    pub r_min: f64,
    /// Outer cutoff (∞ = exact tail).
    pub r_max: f64,
    /// Radius up to which the near-origin treatment applies.
    pub near_radius: f64,
    /// Grid spacing used when a set has to be rasterized.
    pub grid_h: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-6,
            sphere: SphereGrid::default(),
            nodes_per_decade: 0,
            r_min: 0.0,
            r_max: f64::INFINITY,
            near_radius: 1.0,
            grid_h: 1.0 / 64.0,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tol(rel_tol: f64) -> Self {
        QuadratureSpec { rel_tol, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(Error::invalid("quadrature tolerance must be positive"));
        }
        if !(self.r_min >= 0.0 && self.r_min < self.r_max) {
            return Err(Error::invalid("need 0 <= r_min < r_max"));
        }
        if !(self.near_radius > 0.0 && self.grid_h > 0.0) {
            return Err(Error::invalid("near_radius and grid_h must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Breakdown {
    pub near: f64,
    pub bulk: f64,
    pub tail: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerimeterResult {
    pub value: f64,
    /// Absolute error estimate.
    pub err: f64,
    pub rel_err: f64,
    pub breakdown: Breakdown,
    pub method: String,
    pub converged: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl PerimeterResult {
    pub fn scaled(mut self, c: f64) -> Self {
        self.value *= c;
        self.err *= c.abs();
        self.breakdown.near *= c;
        self.breakdown.bulk *= c;
        self.breakdown.tail *= c;
        self
    }
}

fn decade_breaks(a: f64, b: f64, per_decade: usize) -> Vec<f64> {
    if per_decade == 0 || !(a > 0.0) || !b.is_finite() || b <= a {
        return Vec::new();
    }
    let step = 10f64.powf(1.0 / per_decade as f64);
    let mut out = Vec::new();
    let mut r = a * step;
    while r < b {
        out.push(r);
        r *= step;
    }
    out
}

struct RayParts {
    near: QuadResult,
    bulk: QuadResult,
    tail: QuadResult,
}

fn ray_integral(f: &dyn ShiftFunction, theta: &P3, rho: &RadialProfile, q: &QuadratureSpec) -> Result<RayParts> {
    let tol = Tolerance::new(1e-300, 0.1 * q.rel_tol);
    let g = |r: f64| f.deficit(theta, r);
    let rs = f.support_radius(theta);
    let far = f.far_value();
    let r_end = rs.min(q.r_max);
    let mut brk = f.breakpoints(theta);
    brk.retain(|&b| b < r_end);
    if matches!(rho.kind(), crate::measures::RadialKind::Atoms(_)) {
        let all = rho.integrate(&g, 0.0, f64::INFINITY, &[], tol)?;
        let zero = QuadResult { converged: true, ..Default::default() };
        return Ok(RayParts { near: zero, bulk: all, tail: zero });
    }
    let mut r1 = r_end.min(q.near_radius);
    if let Some(&b) = brk.first() {
        r1 = r1.min(b);
    }
    if let Some(&b) = rho.breaks().first() {
        r1 = r1.min(b);
    }
    let near = if q.r_min > 0.0 {
        r1 = r1.max(q.r_min);
        let mut part = rho.integrate(&g, q.r_min, r1, &brk, tol)?;
        part.error += f.lipschitz() * rho.moment(1, 0.0, q.r_min)?.value;
        part
    } else {
        let s = f.slope(theta);
        let h = |r: f64| g(r) - s * r;
        let lin = rho.moment(1, 0.0, r1)?.scale(s);
        // the remainder is second order; measure it against the linear part
        let near_tol = Tolerance::new(((1e-3 * q.rel_tol).max(1e-14) * lin.value.abs()).max(1e-300), tol.rel);
        let sub = rho.integrate(&h, 0.0, r1, &brk, near_tol)?;
        sub.add(lin)
    };
    let mut extra = brk.clone();
    extra.extend(decade_breaks(r1, r_end, q.nodes_per_decade));
    let bulk = rho.integrate(&g, r1, r_end, &extra, tol)?;
    let mut tail = if far != 0.0 { rho.moment(0, r_end, f64::INFINITY)?.scale(far) } else { QuadResult { converged: true, ..Default::default() } };
    if r_end < rs && far != 0.0 {
        tail.error += far * rho.moment(0, r_end, rs)?.value;
    }
    Ok(RayParts { near, bulk, tail })
}

/// `∫ F dν` for a shift function `F` (a covariogram deficit or a difference table).
pub fn per_nu(f: &dyn ShiftFunction, m: &MeasureSpec, q: &QuadratureSpec) -> Result<PerimeterResult> {
    q.validate()?;
    if f.dim() != m.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), got: f.dim() });
    }
    let collapse = f.is_isotropic() && m.is_isotropic();
    let rays: Vec<Ray> = m.rays(&q.sphere, collapse)?;
    let parts: Vec<Result<Option<RayParts>>> = rays
        .par_iter()
        .map(|ray| {
            if ray.weight == 0.0 {
                return Ok(None);
            }
            ray_integral(f, &ray.theta, &ray.radial, q).map(Some)
        })
        .collect();
    let mut bd = Breakdown::default();
    let mut err = 0.0;
    let mut converged = true;
    let mut per_ray = vec![0.0; rays.len()];
    for (i, (ray, p)) in rays.iter().zip(parts).enumerate() {
        let p = match p {
            Ok(Some(p)) => p,
            Ok(None) => continue,
            Err(Error::Divergent { near_or_far, detail }) => {
                return Err(Error::NotAdmissible(format!("integral diverges {near_or_far}: {detail}")));
            }
            Err(e) => return Err(e),
        };
        let w = ray.weight;
        bd.near += w * p.near.value;
        bd.bulk += w * p.bulk.value;
        bd.tail += w * p.tail.value;
        per_ray[i] = w * (p.near.value + p.bulk.value + p.tail.value);
        err += w * (p.near.error + p.bulk.error + p.tail.error);
        converged &= p.near.converged && p.bulk.converged && p.tail.converged;
    }
    let value = bd.near + bd.bulk + bd.tail;
    let mut warnings = Vec::new();
    if !collapse && m.uses_sphere_grid() {
        let angular = angular_error(&per_ray, m.dim(), &q.sphere);
        err += angular;
        if angular > q.rel_tol * value.abs() {
            warnings.push(format!("angular grid limits accuracy to {:.1e} relative; refine [quadrature] circle/azimuth", angular / value.abs()));
        }
    }
    let rel_err = if value != 0.0 { err / value.abs() } else { err };
    if !converged && rel_err > q.rel_tol {
        return Err(Error::QuadratureFailed { residual: rel_err, context: "radial integration along at least one ray".into() });
    }
    let method = if q.r_min > 0.0 { "covariogram-quadrature/truncated" } else { "covariogram-quadrature" };
    Ok(PerimeterResult { value, err, rel_err, breakdown: bd, method: method.into(), converged, warnings })
}

/// `|S_n - S_{n/2}|` for the periodic angular rule: every other node of the
/// circle (d = 2) or of the azimuthal ring (d = 3).
fn angular_error(per_ray: &[f64], d: usize, grid: &SphereGrid) -> f64 {
    let stride = if d == 2 { per_ray.len() } else { grid.azimuth.max(4) };
    if stride % 2 != 0 || per_ray.len() % stride != 0 {
        return 0.0;
    }
    let full: f64 = per_ray.iter().sum();
    let half: f64 = per_ray.iter().enumerate().filter(|(i, _)| (i % stride) % 2 == 0).map(|(_, v)| 2.0 * v).sum();
    (full - half).abs()
}

/// `Per_ν(E)` for any supported set representation.
pub fn per_nu_set(set: &SetGeometry, m: &MeasureSpec, q: &QuadratureSpec) -> Result<PerimeterResult> {
    let c = covariogram(set, q.grid_h)?;
    per_nu(&c, m, q)
}

/// `Per_α(E) = ∫∫_{E×E^c} |x-y|^{-d-α}`, through `Per_{ν_α} = (α/κ_{d-1}) Per_α`.
pub fn frac_perimeter(set: &SetGeometry, alpha: f64, q: &QuadratureSpec) -> Result<PerimeterResult> {
    let d = set.dim();
    let m = MeasureSpec::fractional(d, alpha)?;
    let mut r = per_nu_set(set, &m, q)?.scaled(sphere_area(d) / alpha);
    r.method = format!("{}/fractional", r.method);
    Ok(r)
}

/// `Per_J(E) = ∫_E ∫_{E^c} J(x - y)`.
pub fn j_perimeter(set: &SetGeometry, j: &Kernel, q: &QuadratureSpec) -> Result<PerimeterResult> {
    per_nu_set(set, &MeasureSpec::kernel(j.clone()), q)
}
