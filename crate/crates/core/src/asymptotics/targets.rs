use crate::constants::{k1d, sphere_area};
use crate::convex::{perimeter_wrt_moment_body, ConvexBody};
use crate::error::{Error, Result};
use crate::geometry::{classical_perimeter, AnalyticShape, SetGeometry};
use crate::measures::{sphere_projection, Kernel, MeasureSpec, Normalization, ScalingFamily, ScalingRule, SphericalKind, SphericalMeasure};
use crate::perimeter::QuadratureSpec;
use crate::point::{self, P3};
use crate::sphere::sigma_nodes;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `(K_{1,d} / (2κ_{d-1})) Per(E)`.
    ClassicalUniform,
    /// `½ ∫_{∂E} ∫ |n·θ| μ(dθ)`.
    ClassicalMu,
    /// `|E|`.
    Lebesgue,
    /// `Per(E, ZK)`.
    AnisoMomentBody,
    /// `d |K| |E|`.
    AnisoVolume,
    /// `(C_J/2) ∫_{∂E} ∫ |n·θ| μ_J(dθ)`.
    JKernel,
    /// `‖J‖_{L¹} |E|`.
    JTotalMass,
}

impl Regime {
    pub const ALL: [Regime; 7] = [
        Regime::ClassicalUniform,
        Regime::ClassicalMu,
        Regime::Lebesgue,
        Regime::AnisoMomentBody,
        Regime::AnisoVolume,
        Regime::JKernel,
        Regime::JTotalMass,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Regime::ClassicalUniform => "classical_uniform",
            Regime::ClassicalMu => "classical_mu",
            Regime::Lebesgue => "lebesgue",
            Regime::AnisoMomentBody => "aniso_moment_body",
            Regime::AnisoVolume => "aniso_volume",
            Regime::JKernel => "j_kernel",
            Regime::JTotalMass => "j_total_mass",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Regime::ALL
            .iter()
            .copied()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown regime '{s}'")))
    }

    /// Limit of `λ_ε(B_R^c)` this regime relies on.
    pub fn lambda_limit(&self) -> f64 {
        match self {
            Regime::Lebesgue | Regime::AnisoVolume | Regime::JTotalMass => 1.0,
            _ => 0.0,
        }
    }
}

/// Data a limit needs besides the set.
#[derive(Debug, Clone)]
pub struct Payload {
    pub set: SetGeometry,
    pub body: Option<ConvexBody>,
    pub mu: Option<SphericalMeasure>,
    pub kernel: Option<Kernel>,
}

impl Payload {
    pub fn new(set: SetGeometry) -> Self {
        Payload { set, body: None, mu: None, kernel: None }
    }

    pub fn with_body(mut self, body: ConvexBody) -> Self {
        self.body = Some(body);
        self
    }

    pub fn with_mu(mut self, mu: SphericalMeasure) -> Self {
        self.mu = Some(mu);
        self
    }

    pub fn with_kernel(mut self, k: Kernel) -> Self {
        self.kernel = Some(k);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitTarget {
    pub regime: Regime,
    pub value: f64,
    /// Factor applied to `C_ε^{-1} Per` before comparing with `value`:
    /// `C_J` for `j_kernel`, `‖J‖_{L¹}` for `j_total_mass`, otherwise 1.
    pub constant: f64,
    pub detail: String,
}

/// Boundary pieces `(area, outward normal)`; balls give `None`.
fn flat_boundary(set: &SetGeometry) -> Result<Option<Vec<(f64, P3)>>> {
    match set {
        SetGeometry::Intervals(e) => {
            let mut v = Vec::new();
            for _ in e.intervals() {
                v.push((1.0, [-1.0, 0.0, 0.0]));
                v.push((1.0, [1.0, 0.0, 0.0]));
            }
            Ok(Some(v))
        }
        SetGeometry::Shape(AnalyticShape::Ball { center, .. }) if center.len() == 1 => {
            Ok(Some(vec![(1.0, [-1.0, 0.0, 0.0]), (1.0, [1.0, 0.0, 0.0])]))
        }
        SetGeometry::Shape(AnalyticShape::Ball { .. }) => Ok(None),
        SetGeometry::Shape(AnalyticShape::Box { lo, hi }) if lo.len() == 3 => {
            let s: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| b - a).collect();
            let mut v = Vec::new();
            for a in 0..3 {
                let area = s[(a + 1) % 3] * s[(a + 2) % 3];
                for sg in [-1.0, 1.0] {
                    let mut n = [0.0; 3];
                    n[a] = sg;
                    v.push((area, n));
                }
            }
            Ok(Some(v))
        }
        SetGeometry::Shape(AnalyticShape::Box { lo, .. }) if lo.len() == 1 => {
            Ok(Some(vec![(1.0, [-1.0, 0.0, 0.0]), (1.0, [1.0, 0.0, 0.0])]))
        }
        SetGeometry::Shape(s) => Ok(Some(s.boundary_decomposition()?.into_iter().map(|(l, n)| (l, [n[0], n[1], 0.0])).collect())),
        SetGeometry::Voxels(_) => Err(Error::unsupported("limit needs edge normals; voxel sets have none")),
    }
}

/// `∫_{∂E} f(n) dH^{d-1}`.
fn boundary_integral<F: Fn(&P3) -> f64>(set: &SetGeometry, q: &QuadratureSpec, f: F) -> Result<f64> {
    match flat_boundary(set)? {
        Some(pieces) => Ok(pieces.iter().map(|(a, n)| a * f(n)).sum()),
        None => {
            let (d, radius) = match set {
                SetGeometry::Shape(AnalyticShape::Ball { center, radius }) => (center.len(), *radius),
                _ => unreachable!(),
            };
            let s: f64 = sigma_nodes(d, &q.sphere).iter().map(|n| n.weight * f(&n.theta)).sum();
            Ok(radius.powi(d as i32 - 1) * s)
        }
    }
}

/// `∫ |n·θ| μ(dθ)`, exact for uniform μ.
fn projection_mean(mu: &SphericalMeasure, n: &P3, q: &QuadratureSpec) -> Result<f64> {
    let d = mu.dim();
    match mu.kind() {
        SphericalKind::Uniform => Ok(k1d(d) / sphere_area(d)),
        SphericalKind::GaugeWeighted { body, p } => {
            let p = *p;
            body.sphere_integral(n, 0.1 * q.rel_tol, |th| point::dot(th, n).abs() * body.gauge(th).powf(-p))
        }
        SphericalKind::Atoms(_) => Ok(mu.integrate(&q.sphere, |th| point::dot(th, n).abs())),
    }
}

fn classical_mu_value(set: &SetGeometry, mu: &SphericalMeasure, q: &QuadratureSpec) -> Result<f64> {
    if mu.dim() != set.dim() {
        return Err(Error::DimensionMismatch { expected: set.dim(), got: mu.dim() });
    }
    if matches!(mu.kind(), SphericalKind::Uniform) {
        let d = set.dim();
        return Ok(0.5 * k1d(d) / sphere_area(d) * classical_perimeter(set));
    }
    let failed = std::cell::RefCell::new(None);
    let v = boundary_integral(set, q, |n| match projection_mean(mu, n, q) {
        Ok(v) => v,
        Err(e) => {
            failed.borrow_mut().get_or_insert(e);
            0.0
        }
    })?;
    match failed.into_inner() {
        Some(e) => Err(e),
        None => Ok(0.5 * v),
    }
}

fn need<'a, T>(x: &'a Option<T>, what: &str, regime: Regime) -> Result<&'a T> {
    x.as_ref().ok_or_else(|| Error::invalid(format!("regime {} needs a {what}", regime.name())))
}

/// Limit of the normalized perimeter in the given regime.
pub fn limit_target(regime: Regime, payload: &Payload, q: &QuadratureSpec) -> Result<LimitTarget> {
    let set = &payload.set;
    let d = set.dim();
    let tol = 0.1 * q.rel_tol;
    let (value, constant, detail) = match regime {
        Regime::ClassicalUniform => {
            if matches!(set, SetGeometry::Voxels(_)) {
                return Err(Error::unsupported("classical limit of a voxel set"));
            }
            let per = classical_perimeter(set);
            (k1d(d) / (2.0 * sphere_area(d)) * per, 1.0, format!("K_1d/(2 kappa) * Per, Per = {per}"))
        }
        Regime::ClassicalMu => {
            let mu = need(&payload.mu, "spherical measure", regime)?;
            (classical_mu_value(set, mu, q)?, 1.0, "1/2 sum_edges len * int |n.theta| mu".into())
        }
        Regime::Lebesgue => (set.volume(), 1.0, "|E|".into()),
        Regime::AnisoMomentBody => {
            let body = need(&payload.body, "convex body", regime)?;
            if body.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: body.dim() });
            }
            let v = match set {
                SetGeometry::Shape(s) => perimeter_wrt_moment_body(s, body, tol)?,
                SetGeometry::Intervals(e) => 2.0 * e.len() as f64 * body.moment_body_norm(&[1.0], tol)?,
                SetGeometry::Voxels(_) => return Err(Error::unsupported("moment-body perimeter needs edge normals; voxel sets have none")),
            };
            (v, 1.0, "Per(E, ZK)".into())
        }
        Regime::AnisoVolume => {
            let body = need(&payload.body, "convex body", regime)?;
            (d as f64 * body.volume() * set.volume(), 1.0, "d |K| |E|".into())
        }
        Regime::JKernel => {
            let k = need(&payload.kernel, "kernel", regime)?;
            let cj = MeasureSpec::kernel(k.clone()).moment(1, 0.0, f64::INFINITY).map_err(|_| {
                Error::NotAdmissible("j_kernel limit needs ∫|x|J(x)dx < ∞".into())
            })?;
            let fam = ScalingFamily::new(MeasureSpec::kernel(k.clone()), ScalingRule::KernelShrink, Normalization::CapAtR(f64::INFINITY))?;
            let mu = sphere_projection(&fam, 1.0, &q.sphere)?;
            (cj * classical_mu_value(set, &mu, q)?, cj, format!("(C_J/2) sum_edges len * int |n.theta| mu_J, C_J = {cj}"))
        }
        Regime::JTotalMass => {
            let k = need(&payload.kernel, "kernel", regime)?;
            let l1 = MeasureSpec::kernel(k.clone()).total_mass()?;
            (l1 * set.volume(), l1, format!("||J||_1 |E|, ||J||_1 = {l1}"))
        }
    };
    if !value.is_finite() {
        return Err(Error::invalid(format!("limit target for {} is not finite", regime.name())));
    }
    Ok(LimitTarget { regime, value, constant, detail })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn examples() {
        let q = QuadratureSpec::default();
        let sq = Payload::new(SetGeometry::Shape(AnalyticShape::rect([0.0, 0.0], [1.0, 1.0])));
        let t = limit_target(Regime::ClassicalUniform, &sq, &q).unwrap();
        assert!((t.value - 4.0 / PI).abs() < 1e-14);
        let disk = Payload::new(SetGeometry::Shape(AnalyticShape::disk([0.0, 0.0], 1.0)));
        assert!((limit_target(Regime::Lebesgue, &disk, &q).unwrap().value - PI).abs() < 1e-14);
        let k = ConvexBody::boxed(vec![1.0, 1.0]).unwrap();
        let t = limit_target(Regime::AnisoVolume, &disk.clone().with_body(k), &q).unwrap();
        assert!((t.value - 8.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn uniform_mu_matches_classical() {
        let q = QuadratureSpec::default();
        let p = Payload::new(SetGeometry::Shape(AnalyticShape::disk([0.0, 0.0], 1.0)));
        let a = limit_target(Regime::ClassicalUniform, &p, &q).unwrap().value;
        let mu = SphericalMeasure::atoms(2, vec![(vec![1.0, 0.0], 0.5), (vec![0.0, 1.0], 0.5)]).unwrap();
        // ½ ∫_{∂B} (|n_1| + |n_2|)/2 = ½ · 4
        let b = limit_target(Regime::ClassicalMu, &p.clone().with_mu(mu), &q).unwrap().value;
        assert!((a - 2.0).abs() < 1e-12);
        assert!((b - 2.0).abs() < 1e-4, "{b}");
    }

    #[test]
    fn gaussian_j_kernel() {
        let q = QuadratureSpec::default();
        let p = Payload::new(SetGeometry::Shape(AnalyticShape::rect([0.0, 0.0], [1.0, 1.0]))).with_kernel(Kernel::gaussian(2, 1.0).unwrap());
        let t = limit_target(Regime::JKernel, &p, &q).unwrap();
        let cj = (PI / 2.0).sqrt();
        assert!((t.constant - cj).abs() < 1e-8);
        assert!((t.value - cj * 4.0 / PI).abs() < 1e-8);
    }
}
