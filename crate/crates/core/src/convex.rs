//! Origin-symmetric convex bodies: gauge, support function, polar body,
//! volume, moment body and anisotropic perimeters.

use crate::constants::ball_volume;
use crate::error::{Error, Result};
use crate::geometry::{AnalyticShape, IntervalUnion};
use crate::point::{self, P3};
use crate::quadrature::{adaptive_points, QuadResult, Tolerance};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BodyKind {
    Ellipsoid { axes: Vec<f64> },
    Box { half_widths: Vec<f64> },
    /// `{x: Σ|x_i|/h_i ≤ 1}`; the polar of a box.
    CrossPolytope { half_widths: Vec<f64> },
    /// Centrally symmetric convex polygon, vertices counter-clockwise.
    PolygonSym { vertices: Vec<[f64; 2]> },
    LpBall { p: f64, radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexBody {
    d: usize,
    kind: BodyKind,
    #[serde(skip)]
    facets: Vec<([f64; 2], f64)>,
}

fn positive_all(v: &[f64], what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite() && *x > 0.0) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} must be finite and positive")))
    }
}

impl ConvexBody {
    pub fn ellipsoid(axes: Vec<f64>) -> Result<Self> {
        point::check_dim(axes.len())?;
        positive_all(&axes, "ellipsoid semi-axes")?;
        Ok(ConvexBody { d: axes.len(), kind: BodyKind::Ellipsoid { axes }, facets: vec![] })
    }

    pub fn unit_ball(d: usize) -> Result<Self> {
        Self::ellipsoid(vec![1.0; d])
    }

    pub fn boxed(half_widths: Vec<f64>) -> Result<Self> {
        point::check_dim(half_widths.len())?;
        positive_all(&half_widths, "box half-widths")?;
        Ok(ConvexBody { d: half_widths.len(), kind: BodyKind::Box { half_widths }, facets: vec![] })
    }

    pub fn cross_polytope(half_widths: Vec<f64>) -> Result<Self> {
        point::check_dim(half_widths.len())?;
        positive_all(&half_widths, "cross-polytope half-widths")?;
        Ok(ConvexBody { d: half_widths.len(), kind: BodyKind::CrossPolytope { half_widths }, facets: vec![] })
    }

    pub fn lp_ball(d: usize, p: f64, radius: f64) -> Result<Self> {
        point::check_dim(d)?;
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::invalid(format!("lp_ball needs 1 <= p < inf (got {p})")));
        }
        positive_all(&[radius], "lp_ball radius")?;
        Ok(ConvexBody { d, kind: BodyKind::LpBall { p, radius }, facets: vec![] })
    }

    /// Centrally symmetric convex polygon. Input that is not symmetric,
    /// not convex or not counter-clockwise is rejected.
    pub fn polygon(vertices: Vec<[f64; 2]>) -> Result<Self> {
        let n = vertices.len();
        if n < 4 || n % 2 != 0 {
            return Err(Error::invalid("symmetric polygon needs an even number (>= 4) of vertices"));
        }
        let scale = vertices.iter().map(|v| v[0].abs().max(v[1].abs())).fold(0.0, f64::max);
        for i in 0..n / 2 {
            let (a, b) = (vertices[i], vertices[i + n / 2]);
            if (a[0] + b[0]).abs() > 1e-12 * scale || (a[1] + b[1]).abs() > 1e-12 * scale {
                return Err(Error::invalid("polygon body is not centrally symmetric about the origin"));
            }
        }
        let mut facets = Vec::with_capacity(n);
        for i in 0..n {
            let (a, b, c) = (vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
            let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
            if cross <= 0.0 {
                return Err(Error::invalid("polygon body must be strictly convex at every vertex and counter-clockwise"));
            }
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            let len = dx.hypot(dy);
            let nrm = [dy / len, -dx / len];
            let off = nrm[0] * a[0] + nrm[1] * a[1];
            if off <= 0.0 {
                return Err(Error::invalid("polygon body must contain the origin in its interior"));
            }
            facets.push((nrm, off));
        }
        Ok(ConvexBody { d: 2, kind: BodyKind::PolygonSym { vertices }, facets })
    }

    /// Validating constructor from a kind description.
    pub fn from_kind(d: usize, kind: BodyKind) -> Result<Self> {
        let b = match kind {
            BodyKind::Ellipsoid { axes } => Self::ellipsoid(axes)?,
            BodyKind::Box { half_widths } => Self::boxed(half_widths)?,
            BodyKind::CrossPolytope { half_widths } => Self::cross_polytope(half_widths)?,
            BodyKind::PolygonSym { vertices } => Self::polygon(vertices)?,
            BodyKind::LpBall { p, radius } => Self::lp_ball(d, p, radius)?,
        };
        if b.d != d {
            return Err(Error::DimensionMismatch { expected: d, got: b.d });
        }
        Ok(b)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// True for a Euclidean ball of any radius (gauge proportional to `|x|`).
    pub fn is_euclidean_ball(&self) -> bool {
        match &self.kind {
            BodyKind::Ellipsoid { axes } => axes.iter().all(|a| *a == axes[0]),
            BodyKind::LpBall { p, .. } => *p == 2.0,
            _ => self.d == 1,
        }
    }

    pub fn kind(&self) -> &BodyKind {
        &self.kind
    }

    /// `‖x‖_K = inf{λ > 0 : x/λ ∈ K}`.
    pub fn gauge(&self, x: &P3) -> f64 {
        let d = self.d;
        match &self.kind {
            BodyKind::Ellipsoid { axes } => (0..d).map(|i| (x[i] / axes[i]).powi(2)).sum::<f64>().sqrt(),
            BodyKind::Box { half_widths } => (0..d).map(|i| x[i].abs() / half_widths[i]).fold(0.0, f64::max),
            BodyKind::CrossPolytope { half_widths } => (0..d).map(|i| x[i].abs() / half_widths[i]).sum(),
            BodyKind::LpBall { p, radius } => lp_norm(&x[..d], *p) / radius,
            BodyKind::PolygonSym { .. } => {
                self.facets.iter().map(|(n, c)| (n[0] * x[0] + n[1] * x[1]) / c).fold(0.0, f64::max)
            }
        }
    }

    /// Polar gauge `‖y‖_{K*} = sup_{x∈K} x·y`, i.e. the support function of `K`.
    pub fn polar_gauge(&self, y: &P3) -> f64 {
        let d = self.d;
        match &self.kind {
            BodyKind::Ellipsoid { axes } => (0..d).map(|i| (y[i] * axes[i]).powi(2)).sum::<f64>().sqrt(),
            BodyKind::Box { half_widths } => (0..d).map(|i| y[i].abs() * half_widths[i]).sum(),
            BodyKind::CrossPolytope { half_widths } => (0..d).map(|i| y[i].abs() * half_widths[i]).fold(0.0, f64::max),
            BodyKind::LpBall { p, radius } => {
                let v = &y[..d];
                if *p == 1.0 {
                    radius * v.iter().map(|t| t.abs()).fold(0.0, f64::max)
                } else {
                    radius * lp_norm(v, p / (p - 1.0))
                }
            }
            BodyKind::PolygonSym { vertices } => {
                vertices.iter().map(|v| v[0] * y[0] + v[1] * y[1]).fold(f64::NEG_INFINITY, f64::max).max(0.0)
            }
        }
    }

    /// The polar body `K* = {y : sup_{x∈K} x·y ≤ 1}`.
    pub fn polar_body(&self) -> ConvexBody {
        let inv = |v: &[f64]| v.iter().map(|t| 1.0 / t).collect::<Vec<_>>();
        match &self.kind {
            BodyKind::Ellipsoid { axes } => Self::ellipsoid(inv(axes)),
            BodyKind::Box { half_widths } => Self::cross_polytope(inv(half_widths)),
            BodyKind::CrossPolytope { half_widths } => Self::boxed(inv(half_widths)),
            BodyKind::LpBall { p, radius } => {
                if *p == 1.0 {
                    Self::boxed(vec![1.0 / radius; self.d])
                } else {
                    Self::lp_ball(self.d, p / (p - 1.0), 1.0 / radius)
                }
            }
            BodyKind::PolygonSym { .. } => {
                Self::polygon(self.facets.iter().map(|(n, c)| [n[0] / c, n[1] / c]).collect())
            }
        }
        .expect("polar of a valid body is valid")
    }

    /// Lebesgue measure `|K|`.
    pub fn volume(&self) -> f64 {
        let d = self.d as f64;
        match &self.kind {
            BodyKind::Ellipsoid { axes } => ball_volume(self.d) * axes.iter().product::<f64>(),
            BodyKind::Box { half_widths } => half_widths.iter().map(|h| 2.0 * h).product(),
            BodyKind::CrossPolytope { half_widths } => {
                let fact: f64 = (1..=self.d).map(|k| k as f64).product();
                2f64.powf(d) / fact * half_widths.iter().product::<f64>()
            }
            BodyKind::LpBall { p, radius } => {
                (2.0 * libm::tgamma(1.0 + 1.0 / p)).powf(d) / libm::tgamma(1.0 + d / p) * radius.powf(d)
            }
            BodyKind::PolygonSym { vertices } => {
                let n = vertices.len();
                0.5 * (0..n)
                    .map(|i| {
                        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                        a[0] * b[1] - a[1] * b[0]
                    })
                    .sum::<f64>()
            }
        }
    }

    /// Radius of the largest centred ball inside `K`.
    pub fn inradius(&self) -> f64 {
        let d = self.d as f64;
        match &self.kind {
            BodyKind::Ellipsoid { axes } => axes.iter().cloned().fold(f64::INFINITY, f64::min),
            BodyKind::Box { half_widths } => half_widths.iter().cloned().fold(f64::INFINITY, f64::min),
            BodyKind::CrossPolytope { half_widths } => 1.0 / half_widths.iter().map(|h| h.powi(-2)).sum::<f64>().sqrt(),
            BodyKind::LpBall { p, radius } => radius * d.powf(0.5 - 1.0 / p).min(1.0),
            BodyKind::PolygonSym { .. } => self.facets.iter().map(|f| f.1).fold(f64::INFINITY, f64::min),
        }
    }

    /// Radius of the smallest centred ball containing `K`.
    pub fn outradius(&self) -> f64 {
        let d = self.d as f64;
        match &self.kind {
            BodyKind::Ellipsoid { axes } => axes.iter().cloned().fold(0.0, f64::max),
            BodyKind::Box { half_widths } => half_widths.iter().map(|h| h * h).sum::<f64>().sqrt(),
            BodyKind::CrossPolytope { half_widths } => half_widths.iter().cloned().fold(0.0, f64::max),
            BodyKind::LpBall { p, radius } => radius * d.powf(0.5 - 1.0 / p).max(1.0),
            BodyKind::PolygonSym { vertices } => vertices.iter().map(|v| v[0].hypot(v[1])).fold(0.0, f64::max),
        }
    }

    /// `tK` for `t > 0`.
    pub fn scaled(&self, t: f64) -> Result<ConvexBody> {
        positive_all(&[t], "scale factor")?;
        let sc = |v: &[f64]| v.iter().map(|x| x * t).collect::<Vec<_>>();
        match &self.kind {
            BodyKind::Ellipsoid { axes } => Self::ellipsoid(sc(axes)),
            BodyKind::Box { half_widths } => Self::boxed(sc(half_widths)),
            BodyKind::CrossPolytope { half_widths } => Self::cross_polytope(sc(half_widths)),
            BodyKind::LpBall { p, radius } => Self::lp_ball(self.d, *p, radius * t),
            BodyKind::PolygonSym { vertices } => Self::polygon(vertices.iter().map(|v| [v[0] * t, v[1] * t]).collect()),
        }
    }

    /// Angles in `[0, 2π)` where the gauge or the support function of a planar
    /// body fails to be smooth.
    pub fn kink_angles(&self) -> Vec<f64> {
        if self.d != 2 {
            return vec![];
        }
        let axes = vec![0.0, 0.5 * PI, PI, 1.5 * PI];
        let mut out = match &self.kind {
            BodyKind::Ellipsoid { .. } => vec![],
            BodyKind::Box { half_widths } | BodyKind::CrossPolytope { half_widths } => {
                let a = half_widths[1].atan2(half_widths[0]);
                let mut v = axes.clone();
                v.extend([a, PI - a, PI + a, 2.0 * PI - a]);
                v
            }
            BodyKind::LpBall { p, .. } => {
                let mut v = axes.clone();
                if (*p - 2.0).abs() > 0.0 {
                    v.extend([0.25 * PI, 0.75 * PI, 1.25 * PI, 1.75 * PI]);
                }
                v
            }
            BodyKind::PolygonSym { vertices } => {
                let mut v: Vec<f64> = vertices.iter().map(|v| v[1].atan2(v[0])).collect();
                v.extend(self.facets.iter().map(|(n, _)| n[1].atan2(n[0])));
                v
            }
        };
        for a in out.iter_mut() {
            *a = a.rem_euclid(2.0 * PI);
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        out
    }

    /// `‖y‖_{Z*K} = (d+1)/2 ∫_K |y·x| dx`, evaluated as
    /// `½ ∫_{S^{d-1}} |y·θ| ‖θ‖_K^{-d-1} dθ`.
    pub fn moment_body_norm(&self, y: &[f64], tol: f64) -> Result<f64> {
        let y = point::from_slice(y, self.d)?;
        let ny = point::norm(&y);
        if ny == 0.0 {
            return Ok(0.0);
        }
        let yhat = point::scale(&y, 1.0 / ny);
        let p = self.d as i32 + 1;
        let r = self.sphere_integral(&yhat, tol, |th| point::dot(th, &yhat).abs() * self.gauge(th).powi(-p))?;
        Ok(0.5 * ny * r)
    }

    /// `∫_{S^{d-1}} f(θ) dθ` by adaptive angular quadrature. `pole` fixes the
    /// frame in `d = 3` (hemisphere split at the equator orthogonal to it) and
    /// contributes its orthogonal directions as breakpoints in `d = 2`.
    pub fn sphere_integral<F: Fn(&P3) -> f64>(&self, pole: &P3, tol: f64, f: F) -> Result<f64> {
        let tolq = Tolerance::new(1e-300, tol);
        let res = match self.d {
            1 => QuadResult { value: f(&[1.0, 0.0, 0.0]) + f(&[-1.0, 0.0, 0.0]), converged: true, ..Default::default() },
            2 => {
                let mut br = self.kink_angles();
                let a = pole[1].atan2(pole[0]);
                br.extend([a + 0.5 * PI, a + 1.5 * PI].map(|t| t.rem_euclid(2.0 * PI)));
                br.extend((0..=16).map(|k| 2.0 * PI * k as f64 / 16.0));
                br.sort_by(|a, b| a.partial_cmp(b).unwrap());
                br.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
                adaptive_points(&|t: f64| f(&[t.cos(), t.sin(), 0.0]), &br, tolq, 20_000)
            }
            _ => {
                let (u, v) = point::orthonormal_complement(pole);
                let phis: Vec<f64> = (0..=32).map(|k| 2.0 * PI * k as f64 / 32.0).collect();
                let mut inner_ok = true;
                let ring = |z: f64| {
                    let s = (1.0 - z * z).max(0.0).sqrt();
                    let g = |phi: f64| {
                        let (c, sn) = (phi.cos() * s, phi.sin() * s);
                        let th = [
                            z * pole[0] + c * u[0] + sn * v[0],
                            z * pole[1] + c * u[1] + sn * v[1],
                            z * pole[2] + c * u[2] + sn * v[2],
                        ];
                        f(&th)
                    };
                    adaptive_points(&g, &phis, Tolerance::new(1e-300, 0.1 * tol), 4000)
                };
                let outer = |z: f64| {
                    let r = ring(z);
                    r.value
                };
                let zs: Vec<f64> = (0..=8).map(|k| -1.0 + 0.25 * k as f64).collect();
                let res = adaptive_points(&outer, &zs, tolq, 2000);
                // probe one ring for convergence of the inner rule
                if !ring(0.3).converged {
                    inner_ok = false;
                }
                QuadResult { converged: res.converged && inner_ok, ..res }
            }
        };
        if !res.converged || !res.value.is_finite() {
            return Err(Error::QuadratureFailed {
                residual: res.error,
                context: "spherical integral over the body".into(),
            });
        }
        Ok(res.value)
    }
}

fn lp_norm(v: &[f64], p: f64) -> f64 {
    if p == 1.0 {
        return v.iter().map(|t| t.abs()).sum();
    }
    if p == 2.0 {
        return v.iter().map(|t| t * t).sum::<f64>().sqrt();
    }
    let m = v.iter().map(|t| t.abs()).fold(0.0, f64::max);
    if m == 0.0 {
        return 0.0;
    }
    m * v.iter().map(|t| (t.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Boundary pieces of a shape: `(H^{d-1} measure, outer unit normal)`.
fn flat_faces(shape: &AnalyticShape) -> Result<Vec<(f64, P3)>> {
    match shape {
        AnalyticShape::Polygon { .. } => Ok(shape
            .boundary_decomposition()?
            .into_iter()
            .map(|(l, n)| (l, [n[0], n[1], 0.0]))
            .collect()),
        AnalyticShape::Box { lo, hi } => {
            let d = lo.len();
            let sides: Vec<f64> = (0..d).map(|i| hi[i] - lo[i]).collect();
            let mut out = vec![];
            for i in 0..d {
                let area: f64 = (0..d).filter(|&j| j != i).map(|j| sides[j]).product();
                for s in [1.0, -1.0] {
                    let mut n = [0.0; 3];
                    n[i] = s;
                    out.push((area, n));
                }
            }
            Ok(out)
        }
        AnalyticShape::Ball { .. } => Err(Error::unsupported("ball has no flat faces")),
    }
}

/// `Per(E, K) = ∫_{∂*E} ‖n_E‖_{K*} dH^{d-1}`.
pub fn anisotropic_perimeter(shape: &AnalyticShape, body: &ConvexBody, tol: f64) -> Result<f64> {
    if shape.dim() != body.dim() {
        return Err(Error::DimensionMismatch { expected: body.dim(), got: shape.dim() });
    }
    match shape {
        AnalyticShape::Ball { radius, .. } => {
            let d = body.dim();
            let s = body.sphere_integral(&[0.0, 0.0, 1.0], tol, |th| body.polar_gauge(th))?;
            Ok(radius.powi(d as i32 - 1) * s)
        }
        _ => Ok(flat_faces(shape)?.iter().map(|(a, n)| a * body.polar_gauge(n)).sum()),
    }
}

/// Anisotropic perimeter of a 1-D interval union.
pub fn anisotropic_perimeter_intervals(e: &IntervalUnion, body: &ConvexBody) -> Result<f64> {
    if body.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: body.dim() });
    }
    let k = e.len() as f64;
    Ok(k * (body.polar_gauge(&[1.0, 0.0, 0.0]) + body.polar_gauge(&[-1.0, 0.0, 0.0])))
}

/// `Per(E, ZK) = ∫_{∂*E} ‖n_E‖_{Z*K} dH^{d-1}`.
pub fn perimeter_wrt_moment_body(shape: &AnalyticShape, body: &ConvexBody, tol: f64) -> Result<f64> {
    if shape.dim() != body.dim() {
        return Err(Error::DimensionMismatch { expected: body.dim(), got: shape.dim() });
    }
    match shape {
        AnalyticShape::Ball { radius, .. } => {
            if body.dim() == 3 {
                return Err(Error::unsupported("moment-body perimeter of a 3-D ball; use a polytope approximation"));
            }
            let d = body.dim();
            let failed = std::cell::RefCell::new(None);
            let s = body.sphere_integral(&[0.0, 0.0, 1.0], tol, |th| match body.moment_body_norm(&th[..d], 0.1 * tol) {
                Ok(v) => v,
                Err(e) => {
                    failed.borrow_mut().get_or_insert(e);
                    0.0
                }
            })?;
            if let Some(e) = failed.into_inner() {
                return Err(e);
            }
            Ok(radius.powi(d as i32 - 1) * s)
        }
        _ => {
            let d = body.dim();
            let mut total = 0.0;
            for (a, n) in flat_faces(shape)? {
                total += a * body.moment_body_norm(&n[..d], tol)?;
            }
            Ok(total)
        }
    }
}
