//! Lévy-type measures `ν` on `R^d \ {0}` with `∫(1∧|x|)ν(dx) < ∞`.

mod family;
mod kernel;
mod radial;
mod spherical;

pub use family::{lambda_tail, normalization_constant, sphere_projection, Normalization, ScalingFamily, ScalingRule};
pub use kernel::{Kernel, KernelFn, KernelKind};
pub use radial::{RadialFn, RadialKind, RadialProfile};
pub use spherical::{SphericalKind, SphericalMeasure};

use crate::constants::sphere_area;
use crate::convex::ConvexBody;
use crate::error::{Error, Result};
use crate::point::P3;
use crate::quadrature::Tolerance;
use crate::sphere::{sigma_nodes, SphereGrid};
use serde::Serialize;

#[derive(Debug, Clone)]
pub enum MeasureKind {
    /// `ν = ρ(dr) ⊗ η(dθ)`.
    RadialSpherical { radial: RadialProfile, sphere: SphericalMeasure },
    /// `ν(dx) = J(x) dx`.
    Kernel(Kernel),
    /// `ν(dx) = ‖x‖_K^{-d-α} dx`.
    AnisotropicStable { body: ConvexBody, alpha: f64 },
}

#[derive(Debug, Clone)]
pub struct MeasureSpec {
    d: usize,
    kind: MeasureKind,
}

/// Direction `θ` with its spherical weight and the radial measure along it.
#[derive(Debug, Clone)]
pub struct Ray {
    pub theta: P3,
    pub weight: f64,
    pub radial: RadialProfile,
}

impl MeasureSpec {
    pub fn radial_spherical(radial: RadialProfile, sphere: SphericalMeasure) -> Self {
        MeasureSpec { d: sphere.dim(), kind: MeasureKind::RadialSpherical { radial, sphere } }
    }

    pub fn kernel(k: Kernel) -> Self {
        MeasureSpec { d: k.dim(), kind: MeasureKind::Kernel(k) }
    }

    pub fn anisotropic_stable(body: ConvexBody, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid(format!("anisotropic stable measure needs 0 < alpha < 1, got {alpha}")));
        }
        Ok(MeasureSpec { d: body.dim(), kind: MeasureKind::AnisotropicStable { body, alpha } })
    }

    /// `c · r^{-1-α} dr ⊗ uniform`.
    pub fn stable(d: usize, alpha: f64, prefactor: f64) -> Result<Self> {
        Ok(Self::radial_spherical(RadialProfile::power_with(alpha, prefactor)?, SphericalMeasure::uniform(d)?))
    }

    /// `ν_α(dx) = α dx / (κ_{d-1} |x|^{d+α})`.
    pub fn fractional(d: usize, alpha: f64) -> Result<Self> {
        Self::stable(d, alpha, alpha)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn kind(&self) -> &MeasureKind {
        &self.kind
    }

    pub fn is_isotropic(&self) -> bool {
        match &self.kind {
            MeasureKind::RadialSpherical { sphere, .. } => sphere.is_uniform(),
            MeasureKind::Kernel(k) => k.is_radial(),
            MeasureKind::AnisotropicStable { body, .. } => body.is_euclidean_ball(),
        }
    }

    /// Rays carrying the measure on the given spherical grid. Isotropic
    /// measures collapse to a single ray with the full spherical mass.
    pub fn rays(&self, grid: &SphereGrid, collapse_isotropic: bool) -> Result<Vec<Ray>> {
        let e1 = [1.0, 0.0, 0.0];
        if collapse_isotropic && self.is_isotropic() {
            let (radial, weight) = match &self.kind {
                MeasureKind::RadialSpherical { radial, sphere } => (radial.clone(), sphere.total_mass()?),
                MeasureKind::Kernel(k) => (k.ray_profile(&e1), sphere_area(self.d)),
                MeasureKind::AnisotropicStable { body, alpha } => {
                    (RadialProfile::power(*alpha)?, sphere_area(self.d) * body.gauge(&e1).powf(-(self.d as f64) - alpha))
                }
            };
            return Ok(vec![Ray { theta: e1, weight, radial }]);
        }
        Ok(match &self.kind {
            MeasureKind::RadialSpherical { radial, sphere } => sphere
                .nodes(grid)
                .into_iter()
                .map(|n| Ray { theta: n.theta, weight: n.weight, radial: radial.clone() })
                .collect(),
            MeasureKind::Kernel(k) => sigma_nodes(self.d, grid)
                .into_iter()
                .map(|n| Ray { theta: n.theta, weight: n.weight, radial: k.ray_profile(&n.theta) })
                .collect(),
            MeasureKind::AnisotropicStable { body, alpha } => {
                let p = RadialProfile::power(*alpha)?;
                sigma_nodes(self.d, grid)
                    .into_iter()
                    .map(|n| Ray {
                        theta: n.theta,
                        weight: n.weight * body.gauge(&n.theta).powf(-(self.d as f64) - alpha),
                        radial: p.clone(),
                    })
                    .collect()
            }
        })
    }

    /// True when [`rays`](Self::rays) follows the spherical quadrature grid
    /// rather than a list of atoms.
    pub(crate) fn uses_sphere_grid(&self) -> bool {
        self.d >= 2 && !matches!(&self.kind, MeasureKind::RadialSpherical { sphere, .. } if matches!(sphere.kind(), SphericalKind::Atoms(_)))
    }

    /// Image measure under `x ↦ t x`.
    pub fn pushforward(&self, t: f64) -> Result<Self> {
        Ok(match &self.kind {
            MeasureKind::RadialSpherical { radial, sphere } => Self::radial_spherical(radial.pushforward(t)?, sphere.clone()),
            MeasureKind::Kernel(k) => Self::kernel(k.pushforward(t)?),
            MeasureKind::AnisotropicStable { body, alpha } => Self::radial_spherical(
                RadialProfile::power_with(*alpha, t.powf(*alpha))?,
                SphericalMeasure::gauge_weighted(body.clone(), self.d as f64 + alpha)?,
            ),
        })
    }

    /// `∫_{a<|x|≤b} |x|^k ν(dx)` for `k ∈ {0, 1}`.
    pub fn moment(&self, k: i32, a: f64, b: f64) -> Result<f64> {
        let rays = self.rays(&SphereGrid::default(), true)?;
        let mut s = 0.0;
        for r in rays {
            if r.weight != 0.0 {
                s += r.weight * r.radial.moment(k, a, b)?.value;
            }
        }
        Ok(s)
    }

    /// `∫ (R ∧ |x|) ν(dx)`; `R = ∞` gives `∫|x| ν(dx)`.
    pub fn capped_integral(&self, cap: f64) -> Result<f64> {
        if cap.is_infinite() {
            return self.moment(1, 0.0, f64::INFINITY);
        }
        Ok(self.moment(1, 0.0, cap)? + cap * self.moment(0, cap, f64::INFINITY)?)
    }

    pub fn total_mass(&self) -> Result<f64> {
        self.moment(0, 0.0, f64::INFINITY).map_err(|e| match e {
            Error::Divergent { .. } => Error::InfiniteMeasure,
            other => other,
        })
    }

    /// Short description for result records.
    pub fn describe(&self) -> serde_json::Value {
        match &self.kind {
            MeasureKind::RadialSpherical { radial, sphere } => serde_json::json!({
                "kind": "radial_spherical",
                "d": self.d,
                "radial": format!("{:?}", radial.kind()),
                "prefactor": radial.prefactor(),
                "sphere": format!("{:?}", sphere.kind()),
            }),
            MeasureKind::Kernel(k) => serde_json::json!({
                "kind": "kernel",
                "d": self.d,
                "shape": format!("{:?}", k.kind()),
                "amplitude": k.amplitude(),
                "length": k.length(),
            }),
            MeasureKind::AnisotropicStable { body, alpha } => serde_json::json!({
                "kind": "anisotropic_stable",
                "d": self.d,
                "alpha": alpha,
                "body": body,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Admissibility {
    pub admissible: bool,
    pub value: f64,
    pub diagnostic: Option<String>,
}

/// `∫ (1 ∧ |x|) ν(dx)` with a divergence diagnostic.
pub fn admissibility_check(m: &MeasureSpec, tol: f64) -> Result<Admissibility> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let rays = m.rays(&SphereGrid::default(), true)?;
    let mut value = 0.0;
    let t = Tolerance::new(1e-300, tol);
    for r in rays {
        if r.weight == 0.0 {
            continue;
        }
        let g = |x: f64| x.min(1.0);
        let q = match r.radial.alpha() {
            Some(_) => r.radial.capped_moment(1.0).map(|v| crate::quadrature::QuadResult { value: v, converged: true, ..Default::default() }),
            None => r.radial.integrate(&g, 0.0, f64::INFINITY, &[1.0], t),
        };
        match q {
            Ok(q) => value += r.weight * q.value,
            Err(e) => return Ok(Admissibility { admissible: false, value: f64::INFINITY, diagnostic: Some(e.to_string()) }),
        }
    }
    Ok(Admissibility { admissible: value.is_finite(), value, diagnostic: None })
}

/// `ℓ(s) = ν({|x| > s})`.
pub fn tail_mass(m: &MeasureSpec, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::invalid("tail radius must be positive"));
    }
    m.moment(0, s, f64::INFINITY).map_err(|_| Error::InfiniteMeasure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn admissibility_examples() {
        let m = MeasureSpec::stable(1, 0.5, 1.0).unwrap();
        let a = admissibility_check(&m, 1e-10).unwrap();
        assert!(a.admissible && (a.value - 4.0).abs() < 1e-12);
        let j = MeasureSpec::kernel(Kernel::indicator_ball(2, 1.0).unwrap());
        let a = admissibility_check(&j, 1e-10).unwrap();
        assert!((a.value - 2.0 * PI / 3.0).abs() < 1e-9);
        let bad = MeasureSpec::kernel(Kernel::inverse_power(2, 3.5, 1.0).unwrap());
        let a = admissibility_check(&bad, 1e-10).unwrap();
        assert!(!a.admissible && a.diagnostic.is_some());
    }

    #[test]
    fn tails() {
        let a = 0.35;
        let m = MeasureSpec::fractional(2, a).unwrap();
        assert!((tail_mass(&m, 3.0).unwrap() - 3f64.powf(-a)).abs() < 1e-14);
        let j = MeasureSpec::kernel(Kernel::inverse_power(2, 2.0, 1.0).unwrap());
        for s in [0.5, 0.01, 1e-4] {
            let want = 2.0 * PI * f64::ln(1.0 / s);
            assert!((tail_mass(&j, s).unwrap() - want).abs() < 1e-8 * want, "s={s}");
        }
        let mut prev = f64::INFINITY;
        for s in [0.1, 0.2, 0.5, 0.9, 1.5] {
            let t = tail_mass(&j, s).unwrap();
            assert!(t <= prev);
            prev = t;
        }
    }

    #[test]
    fn anisotropic_rays_match_gauge_weighted() {
        let k = ConvexBody::boxed(vec![1.0, 0.5]).unwrap();
        let a = MeasureSpec::anisotropic_stable(k.clone(), 0.4).unwrap();
        let b = MeasureSpec::radial_spherical(RadialProfile::power(0.4).unwrap(), SphericalMeasure::gauge_weighted(k, 2.4).unwrap());
        let (x, y) = (a.capped_integral(1.0).unwrap(), b.capped_integral(1.0).unwrap());
        assert!((x - y).abs() < 1e-12 * y);
    }

    #[test]
    fn total_mass_of_power_is_infinite() {
        assert_eq!(MeasureSpec::fractional(2, 0.5).unwrap().total_mass(), Err(Error::InfiniteMeasure));
        let g = MeasureSpec::kernel(Kernel::gaussian(2, 1.0).unwrap());
        assert!((g.total_mass().unwrap() - 1.0).abs() < 1e-10);
    }
}
