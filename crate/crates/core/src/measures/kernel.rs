use super::radial::RadialProfile;
use crate::constants::{ball_volume, sphere_area};
use crate::error::{Error, Result};
use crate::point::{self, P3};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

pub type KernelFn = Arc<dyn Fn(&P3) -> f64 + Send + Sync>;

/// Unscaled kernel shapes.
#[derive(Clone)]
pub enum KernelKind {
    /// `1_{|x| < 1}`.
    IndicatorBall,
    /// Standard normal density `(2π)^{-d/2} e^{-|x|²/2}`.
    Gaussian,
    /// `|x|^{-p} 1_{|x| < 1}`.
    InversePowerTruncated { power: f64 },
    /// `|x| 1_{x·a > 0} 1_{|x| < 1}`: a half-space cone with axis `a`.
    HalfPlaneCone { axis: P3 },
    Custom { f: KernelFn, radial: bool, support: f64, label: String },
}

impl fmt::Debug for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelKind::IndicatorBall => write!(f, "IndicatorBall"),
            KernelKind::Gaussian => write!(f, "Gaussian"),
            KernelKind::InversePowerTruncated { power } => write!(f, "InversePowerTruncated {{ power: {power} }}"),
            KernelKind::HalfPlaneCone { axis } => write!(f, "HalfPlaneCone {{ axis: {axis:?} }}"),
            KernelKind::Custom { label, .. } => write!(f, "Custom({label})"),
        }
    }
}

/// Density `J(x) = amplitude · base(x / length)` on `R^d`.
#[derive(Debug, Clone)]
pub struct Kernel {
    d: usize,
    kind: KernelKind,
    amplitude: f64,
    length: f64,
}

impl Kernel {
    pub fn new(d: usize, kind: KernelKind) -> Result<Self> {
        point::check_dim(d)?;
        match &kind {
            KernelKind::InversePowerTruncated { power } if !(power.is_finite() && *power >= 0.0) => {
                return Err(Error::invalid("inverse-power exponent must be finite and nonnegative"));
            }
            KernelKind::HalfPlaneCone { axis } => {
                if (point::norm(axis) - 1.0).abs() > 1e-12 || axis[d..].iter().any(|x| *x != 0.0) {
                    return Err(Error::invalid("cone axis must be a unit vector in R^d"));
                }
            }
            KernelKind::Custom { support, .. } if !(*support > 0.0) => {
                return Err(Error::invalid("custom kernel support radius must be positive"));
            }
            _ => {}
        }
        Ok(Kernel { d, kind, amplitude: 1.0, length: 1.0 })
    }

    pub fn indicator_ball(d: usize, radius: f64) -> Result<Self> {
        Self::new(d, KernelKind::IndicatorBall)?.with_length(radius)
    }

    pub fn gaussian(d: usize, sigma: f64) -> Result<Self> {
        Self::new(d, KernelKind::Gaussian)?.with_length(sigma)
    }

    pub fn inverse_power(d: usize, power: f64, radius: f64) -> Result<Self> {
        Self::new(d, KernelKind::InversePowerTruncated { power })?.with_length(radius)
    }

    pub fn with_length(mut self, length: f64) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::invalid("kernel length scale must be positive and finite"));
        }
        self.length = length;
        Ok(self)
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Result<Self> {
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::invalid("kernel amplitude must be positive and finite"));
        }
        self.amplitude = amplitude;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn kind(&self) -> &KernelKind {
        &self.kind
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    fn base(&self, z: &P3) -> f64 {
        let r = point::norm(z);
        match &self.kind {
            KernelKind::IndicatorBall => (r < 1.0) as u8 as f64,
            KernelKind::Gaussian => (2.0 * PI).powf(-(self.d as f64) / 2.0) * (-0.5 * r * r).exp(),
            KernelKind::InversePowerTruncated { power } => {
                if r < 1.0 && r > 0.0 {
                    r.powf(-power)
                } else {
                    0.0
                }
            }
            KernelKind::HalfPlaneCone { axis } => {
                if r < 1.0 && point::dot(z, axis) > 0.0 {
                    r
                } else {
                    0.0
                }
            }
            KernelKind::Custom { f, .. } => f(z),
        }
    }

    fn base_support(&self) -> f64 {
        match &self.kind {
            KernelKind::Gaussian => f64::INFINITY,
            KernelKind::Custom { support, .. } => *support,
            _ => 1.0,
        }
    }

    /// `J(x)`.
    pub fn value(&self, x: &P3) -> f64 {
        self.amplitude * self.base(&point::scale(x, 1.0 / self.length))
    }

    pub fn support_radius(&self) -> f64 {
        self.base_support() * self.length
    }

    pub fn is_radial(&self) -> bool {
        match &self.kind {
            KernelKind::HalfPlaneCone { .. } => false,
            KernelKind::Custom { radial, .. } => *radial,
            _ => true,
        }
    }

    /// Radial density `r ↦ J(rθ) r^{d-1}` along the direction `θ`.
    pub fn ray_profile(&self, theta: &P3) -> RadialProfile {
        let k = self.clone();
        let th = *theta;
        let d = self.d as i32;
        let upper = self.support_radius();
        let breaks = if upper.is_finite() { vec![] } else { vec![self.length] };
        RadialProfile::density(Arc::new(move |r: f64| k.value(&point::scale(&th, r)) * r.powi(d - 1)), breaks, upper, format!("{:?}", self.kind))
            .expect("kernel ray profiles are valid")
    }

    /// Image of `J(x)dx` under `x ↦ t x`: `t^{-d} J(x / t)`.
    pub fn pushforward(&self, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::invalid("scaling factor must be positive and finite"));
        }
        Ok(Kernel { amplitude: self.amplitude * t.powi(-(self.d as i32)), length: self.length * t, ..self.clone() })
    }

    /// `‖J‖_{L¹}` in closed form where one is known.
    pub fn l1_norm_closed_form(&self) -> Option<f64> {
        let s = self.amplitude * self.length.powi(self.d as i32);
        match &self.kind {
            KernelKind::IndicatorBall => Some(s * ball_volume(self.d)),
            KernelKind::Gaussian => Some(s),
            KernelKind::InversePowerTruncated { power } if *power < self.d as f64 => {
                Some(s * sphere_area(self.d) / (self.d as f64 - power))
            }
            _ => None,
        }
    }
}
