use super::{MeasureKind, MeasureSpec, RadialProfile, SphericalMeasure};
use crate::error::{Error, Result};
use crate::sphere::{sigma_nodes, SphereGrid};
use serde::{Deserialize, Serialize};

/// How the family member `ν_ε` is obtained from the base measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ScalingRule {
    /// `J_ε(x) = ε^{-d} J(x/ε)`.
    KernelShrink,
    /// `ν_ε(A) = ν(A/ε)`.
    SetShrink,
    /// `J̃_ε(x) = ε^d J(εx)`.
    KernelStretch,
    /// The parameter is the stability index α of a power or anisotropic
    /// stable base; with `alpha_weighted` the radial part carries the factor α.
    AlphaFamily { alpha_weighted: bool },
}

/// Choice of the normalizing constant `C_ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "r", rename_all = "snake_case")]
pub enum Normalization {
    /// `∫ (R ∧ |x|) ν_ε(dx)`.
    CapAtR(f64),
    /// `∫ (1 ∧ R|x|) ν_ε(dx)`.
    CapAtOne(f64),
    /// `ν_ε(R^d)`.
    TotalMass,
    /// Tail of the base measure at the parameter, `ℓ(ε) = ν({|x| > ε})`.
    BaseTail,
    /// `1/(1-α)`.
    AlphaUp,
    /// `1/α`.
    AlphaDown,
}

#[derive(Debug, Clone)]
pub struct ScalingFamily {
    pub base: MeasureSpec,
    pub rule: ScalingRule,
    pub normalization: Normalization,
}

impl ScalingFamily {
    pub fn new(base: MeasureSpec, rule: ScalingRule, normalization: Normalization) -> Result<Self> {
        match (&base.kind, rule) {
            (MeasureKind::Kernel(_), ScalingRule::KernelShrink | ScalingRule::KernelStretch | ScalingRule::SetShrink) => {}
            (_, ScalingRule::KernelShrink | ScalingRule::KernelStretch) => {
                return Err(Error::invalid("kernel_shrink and kernel_stretch need a kernel base measure"));
            }
            (MeasureKind::RadialSpherical { radial, .. }, ScalingRule::AlphaFamily { .. }) if radial.alpha().is_none() => {
                return Err(Error::invalid("alpha_family needs a power radial profile"));
            }
            (MeasureKind::Kernel(_), ScalingRule::AlphaFamily { .. }) => {
                return Err(Error::invalid("alpha_family needs a power or anisotropic stable base"));
            }
            (MeasureKind::AnisotropicStable { .. }, ScalingRule::SetShrink) => {}
            _ => {}
        }
        if matches!(normalization, Normalization::AlphaUp | Normalization::AlphaDown)
            && !matches!(rule, ScalingRule::AlphaFamily { .. })
        {
            return Err(Error::invalid("alpha normalizations apply to alpha families only"));
        }
        match normalization {
            Normalization::CapAtR(r) | Normalization::CapAtOne(r) if !(r >= 1.0) => {
                return Err(Error::invalid("normalization radius R must lie in [1, ∞]"));
            }
            _ => {}
        }
        Ok(ScalingFamily { base, rule, normalization })
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// `ν_ε` (or `ν_α`).
    pub fn measure_at(&self, p: f64) -> Result<MeasureSpec> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::invalid(format!("family parameter must be positive, got {p}")));
        }
        match self.rule {
            ScalingRule::KernelShrink | ScalingRule::SetShrink => self.base.pushforward(p),
            ScalingRule::KernelStretch => self.base.pushforward(1.0 / p),
            ScalingRule::AlphaFamily { alpha_weighted } => {
                if p >= 1.0 {
                    return Err(Error::invalid(format!("alpha must lie in (0, 1), got {p}")));
                }
                match &self.base.kind {
                    MeasureKind::RadialSpherical { radial, sphere } => {
                        let c = if alpha_weighted { p } else { radial.prefactor() };
                        Ok(MeasureSpec::radial_spherical(RadialProfile::power_with(p, c)?, sphere.clone()))
                    }
                    MeasureKind::AnisotropicStable { body, .. } => {
                        if alpha_weighted {
                            Ok(MeasureSpec::radial_spherical(
                                RadialProfile::power_with(p, p)?,
                                SphericalMeasure::gauge_weighted(body.clone(), self.dim() as f64 + p)?,
                            ))
                        } else {
                            MeasureSpec::anisotropic_stable(body.clone(), p)
                        }
                    }
                    MeasureKind::Kernel(_) => unreachable!("rejected at construction"),
                }
            }
        }
    }

    /// Weight `w` with `λ_ε = C_ε^{-1} w ν_ε` used for concentration checks.
    fn weight(&self) -> Weight {
        match self.normalization {
            Normalization::CapAtR(r) => Weight::Cap(r),
            Normalization::CapAtOne(r) => Weight::CapOne(r),
            Normalization::TotalMass => Weight::One,
            Normalization::BaseTail | Normalization::AlphaDown => Weight::CapOne(1.0),
            Normalization::AlphaUp => Weight::Cap(1.0),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Weight {
    Cap(f64),
    CapOne(f64),
    One,
}

/// `∫_{|x|>R} w(x) ν(dx)`.
fn weighted_tail(m: &MeasureSpec, w: Weight, r: f64) -> Result<f64> {
    match w {
        Weight::One => m.moment(0, r, f64::INFINITY),
        Weight::Cap(s) if s.is_infinite() => m.moment(1, r, f64::INFINITY),
        Weight::Cap(s) => {
            if r < s {
                Ok(m.moment(1, r, s)? + s * m.moment(0, s, f64::INFINITY)?)
            } else {
                Ok(s * m.moment(0, r, f64::INFINITY)?)
            }
        }
        Weight::CapOne(s) if s.is_infinite() => m.moment(0, r, f64::INFINITY),
        Weight::CapOne(s) => Ok(s * weighted_tail(m, Weight::Cap(1.0 / s), r)?),
    }
}

fn weighted_total(m: &MeasureSpec, w: Weight) -> Result<f64> {
    match w {
        Weight::One => m.total_mass(),
        Weight::Cap(s) => m.capped_integral(s),
        Weight::CapOne(s) if s.is_infinite() => m.total_mass(),
        Weight::CapOne(s) => Ok(s * m.capped_integral(1.0 / s)?),
    }
}

fn name_divergence(e: Error, what: &str) -> Error {
    match e {
        Error::Divergent { near_or_far, detail } => {
            Error::Divergent { near_or_far, detail: format!("normalization constant ({what}): {detail}") }
        }
        Error::InfiniteMeasure => Error::Divergent { near_or_far: "near 0", detail: format!("{what}: measure has infinite mass") },
        other => other,
    }
}

/// `C_ε` according to the family's normalization mode.
pub fn normalization_constant(fam: &ScalingFamily, p: f64) -> Result<f64> {
    let c = match fam.normalization {
        Normalization::AlphaUp => 1.0 / (1.0 - p),
        Normalization::AlphaDown => 1.0 / p,
        Normalization::BaseTail => fam.base.moment(0, p, f64::INFINITY).map_err(|e| name_divergence(e, "base tail"))?,
        _ => {
            let m = fam.measure_at(p)?;
            weighted_total(&m, fam.weight()).map_err(|e| name_divergence(e, &format!("{:?}", fam.normalization)))?
        }
    };
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Divergent { near_or_far: "near infinity", detail: format!("C = {c} at parameter {p}") });
    }
    Ok(c)
}

/// `λ_ε(B_R^c)`.
pub fn lambda_tail(fam: &ScalingFamily, p: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::invalid("radius must be positive"));
    }
    let m = fam.measure_at(p)?;
    let w = fam.weight();
    let total = weighted_total(&m, w).map_err(|e| name_divergence(e, "lambda normalization"))?;
    Ok((weighted_tail(&m, w, r)? / total).clamp(0.0, 1.0))
}

/// `μ_ε(S) = λ_ε((0, ∞) S)`, normalized to a probability measure.
pub fn sphere_projection(fam: &ScalingFamily, p: f64, grid: &SphereGrid) -> Result<SphericalMeasure> {
    let m = fam.measure_at(p)?;
    let d = m.dim();
    match m.kind() {
        MeasureKind::RadialSpherical { sphere, .. } => sphere.normalized(),
        MeasureKind::AnisotropicStable { body, alpha } => {
            SphericalMeasure::gauge_weighted(body.clone(), d as f64 + alpha)?.normalized()
        }
        MeasureKind::Kernel(k) if k.is_radial() => SphericalMeasure::uniform(d),
        MeasureKind::Kernel(k) => {
            let w = fam.weight();
            let cap = |r: f64| match w {
                Weight::Cap(s) => r.min(s),
                Weight::CapOne(s) => (s * r).min(1.0),
                Weight::One => 1.0,
            };
            let mut atoms = Vec::new();
            for n in sigma_nodes(d, grid) {
                let prof = k.ray_profile(&n.theta);
                let q = prof
                    .integrate(&cap, 0.0, f64::INFINITY, &[1.0], crate::quadrature::Tolerance::rel(1e-10))
                    .map_err(|e| match e {
                        Error::Divergent { near_or_far, .. } => Error::Divergent {
                            near_or_far,
                            detail: "kernel projection needs ∫|x|J(x)dx < ∞".into(),
                        },
                        other => other,
                    })?;
                if q.value > 0.0 {
                    atoms.push((n.theta[..d].to_vec(), n.weight * q.value));
                }
            }
            SphericalMeasure::atoms(d, atoms)?.normalized()
        }
    }
}
