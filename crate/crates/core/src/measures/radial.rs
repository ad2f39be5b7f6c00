use crate::error::{Error, Result};
use crate::quadrature::{integrate_half_line, integrate_log, QuadResult, Toward, Tolerance};
use std::fmt;
use std::sync::Arc;

pub type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum RadialKind {
    /// Density `r^{-1-α}` on `(0, ∞)`.
    Power { alpha: f64 },
    /// User density `f(r)`, zero beyond `upper`. `breaks` lists radii where
    /// `f` is not smooth.
    Density { f: RadialFn, breaks: Vec<f64>, upper: f64, label: String },
    /// Point masses `(r_i, w_i)`.
    Atoms(Vec<(f64, f64)>),
}

impl fmt::Debug for RadialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadialKind::Power { alpha } => write!(f, "Power {{ alpha: {alpha} }}"),
            RadialKind::Density { label, upper, .. } => write!(f, "Density {{ {label}, upper: {upper} }}"),
            RadialKind::Atoms(a) => write!(f, "Atoms({a:?})"),
        }
    }
}

/// Radial part `ρ` of a measure `ν = ∫ ρ(dr) ⊗ η(dθ)`, times a prefactor.
#[derive(Clone, Debug)]
pub struct RadialProfile {
    kind: RadialKind,
    prefactor: f64,
}

fn check_prefactor(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("prefactor must be positive and finite"))
    }
}

impl RadialProfile {
    pub fn power(alpha: f64) -> Result<Self> {
        Self::power_with(alpha, 1.0)
    }

    pub fn power_with(alpha: f64, prefactor: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid(format!("power profile needs 0 < alpha < 1, got {alpha}")));
        }
        check_prefactor(prefactor)?;
        Ok(RadialProfile { kind: RadialKind::Power { alpha }, prefactor })
    }

    pub fn density(f: RadialFn, mut breaks: Vec<f64>, upper: f64, label: impl Into<String>) -> Result<Self> {
        if !(upper > 0.0) {
            return Err(Error::invalid("density support bound must be positive"));
        }
        if breaks.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            return Err(Error::invalid("density breakpoints must be positive and finite"));
        }
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup();
        Ok(RadialProfile { kind: RadialKind::Density { f, breaks, upper, label: label.into() }, prefactor: 1.0 })
    }

    pub fn atoms(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid("atom list is empty"));
        }
        for &(r, w) in &atoms {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::invalid("radial atoms must sit at positive finite radii (no atom at the origin)"));
            }
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::invalid("radial atom weights must be nonnegative and finite"));
            }
        }
        Ok(RadialProfile { kind: RadialKind::Atoms(atoms), prefactor: 1.0 })
    }

    pub fn with_prefactor(mut self, c: f64) -> Result<Self> {
        check_prefactor(c)?;
        self.prefactor = c;
        Ok(self)
    }

    pub fn kind(&self) -> &RadialKind {
        &self.kind
    }

    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    pub fn alpha(&self) -> Option<f64> {
        match self.kind {
            RadialKind::Power { alpha } => Some(alpha),
            _ => None,
        }
    }

    /// Density at `r` (zero for atom lists).
    pub fn density_at(&self, r: f64) -> f64 {
        match &self.kind {
            RadialKind::Power { alpha } => self.prefactor * r.powf(-1.0 - alpha),
            RadialKind::Density { f, upper, .. } => {
                if r > *upper {
                    0.0
                } else {
                    self.prefactor * f(r)
                }
            }
            RadialKind::Atoms(_) => 0.0,
        }
    }

    pub fn breaks(&self) -> Vec<f64> {
        match &self.kind {
            RadialKind::Density { breaks, upper, .. } => {
                let mut v = breaks.clone();
                if upper.is_finite() {
                    v.push(*upper);
                }
                v
            }
            _ => Vec::new(),
        }
    }

    /// Radius beyond which the profile carries no mass.
    pub fn upper(&self) -> f64 {
        match &self.kind {
            RadialKind::Power { .. } => f64::INFINITY,
            RadialKind::Density { upper, .. } => *upper,
            RadialKind::Atoms(a) => a.iter().map(|x| x.0).fold(0.0, f64::max),
        }
    }

    /// `∫_{(a, b]} g(r) ρ(dr)` with `0 ≤ a < b ≤ ∞`. `extra` adds breakpoints of `g`.
    pub fn integrate<G: Fn(f64) -> f64>(&self, g: &G, a: f64, b: f64, extra: &[f64], tol: Tolerance) -> Result<QuadResult> {
        if let RadialKind::Atoms(atoms) = &self.kind {
            let v: f64 = atoms.iter().filter(|x| x.0 > a && x.0 <= b).map(|&(r, w)| w * g(r)).sum();
            return Ok(QuadResult { value: self.prefactor * v, error: 0.0, evals: atoms.len(), converged: true });
        }
        let b = b.min(self.upper());
        if b <= a {
            return Ok(QuadResult { converged: true, ..Default::default() });
        }
        let h = |r: f64| g(r) * self.density_at(r);
        let mut br: Vec<f64> = self.breaks().into_iter().chain(extra.iter().copied()).filter(|&x| x > a && x < b).collect();
        br.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let lo = if a > 0.0 { a } else { br.first().copied().unwrap_or(1.0).min(1.0).min(b) };
        let hi = if b.is_finite() { b } else { br.last().copied().unwrap_or(1.0).max(1.0).max(lo) };
        let mut res = integrate_log(&h, lo, hi, &br, tol);
        if a == 0.0 {
            let near = integrate_half_line(&h, lo, Toward::Zero, tol);
            if !near.converged {
                return Err(Error::Divergent { near_or_far: "near 0", detail: format!("radial integral of {:?}", self.kind) });
            }
            res = res.add(near);
        }
        if !b.is_finite() {
            let far = integrate_half_line(&h, hi, Toward::Infinity, tol);
            if !far.converged {
                return Err(Error::Divergent {
                    near_or_far: "near infinity",
                    detail: format!("radial integral of {:?}", self.kind),
                });
            }
            res = res.add(far);
        }
        Ok(res)
    }

    /// `∫_{(a, b]} r^k ρ(dr)` for `k ∈ {0, 1}`, in closed form for power profiles.
    pub fn moment(&self, k: i32, a: f64, b: f64) -> Result<QuadResult> {
        debug_assert!(k == 0 || k == 1);
        if b <= a {
            return Ok(QuadResult { converged: true, ..Default::default() });
        }
        if let RadialKind::Power { alpha } = self.kind {
            let e = k as f64 - alpha;
            if a == 0.0 && e <= 0.0 {
                return Err(Error::Divergent { near_or_far: "near 0", detail: format!("mass of r^(-1-{alpha}) near the origin") });
            }
            if b.is_infinite() && e >= 0.0 {
                return Err(Error::Divergent { near_or_far: "near infinity", detail: format!("first moment of r^(-1-{alpha})") });
            }
            let pa = if a == 0.0 { 0.0 } else { a.powf(e) };
            let pb = if b.is_infinite() { 0.0 } else { b.powf(e) };
            let value = self.prefactor * (pb - pa) / e;
            return Ok(QuadResult { value, error: 0.0, evals: 0, converged: true });
        }
        self.integrate(&|r: f64| if k == 0 { 1.0 } else { r }, a, b, &[], Tolerance::new(1e-300, 1e-12))
    }

    /// `ℓ(s) = ρ((s, ∞))`.
    pub fn tail_mass(&self, s: f64) -> Result<f64> {
        Ok(self.moment(0, s, f64::INFINITY)?.value)
    }

    /// `∫ (R ∧ r) ρ(dr)`; `R = ∞` gives the first moment.
    pub fn capped_moment(&self, cap: f64) -> Result<f64> {
        if cap.is_infinite() {
            return Ok(self.moment(1, 0.0, f64::INFINITY)?.value);
        }
        Ok(self.moment(1, 0.0, cap)?.value + cap * self.moment(0, cap, f64::INFINITY)?.value)
    }

    /// Image of the profile under `r ↦ t r`.
    pub fn pushforward(&self, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::invalid("scaling factor must be positive and finite"));
        }
        Ok(match &self.kind {
            RadialKind::Power { alpha } => RadialProfile { kind: self.kind.clone(), prefactor: self.prefactor * t.powf(*alpha) },
            RadialKind::Density { f, breaks, upper, label } => {
                let f = f.clone();
                RadialProfile {
                    kind: RadialKind::Density {
                        f: Arc::new(move |r| f(r / t) / t),
                        breaks: breaks.iter().map(|b| b * t).collect(),
                        upper: upper * t,
                        label: format!("{label} pushed by {t}"),
                    },
                    prefactor: self.prefactor,
                }
            }
            RadialKind::Atoms(a) => {
                RadialProfile { kind: RadialKind::Atoms(a.iter().map(|&(r, w)| (r * t, w)).collect()), prefactor: self.prefactor }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_capped_moment() {
        let p = RadialProfile::power(0.5).unwrap();
        assert!((p.capped_moment(1.0).unwrap() - 4.0).abs() < 1e-14);
        assert!(RadialProfile::power(1.5).is_err());
        assert!(p.moment(0, 0.0, 1.0).is_err());
        assert!(p.moment(1, 1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn prefactor_alpha_tail() {
        let a = 0.3;
        let p = RadialProfile::power_with(a, a).unwrap();
        for r in [0.5, 1.0, 7.0] {
            assert!((p.tail_mass(r).unwrap() - f64::powf(r, -a)).abs() < 1e-14);
        }
    }

    #[test]
    fn density_matches_power_closed_form() {
        let a = 0.4;
        let d = RadialProfile::density(Arc::new(move |r: f64| r.powf(-1.0 - a)), vec![], f64::INFINITY, "power").unwrap();
        let p = RadialProfile::power(a).unwrap();
        for r in [0.3, 2.0] {
            let (x, y) = (d.tail_mass(r).unwrap(), p.tail_mass(r).unwrap());
            assert!((x - y).abs() < 1e-9 * y, "{x} {y}");
        }
        let (x, y) = (d.capped_moment(1.0).unwrap(), p.capped_moment(1.0).unwrap());
        assert!((x - y).abs() < 1e-9 * y);
    }

    #[test]
    fn divergent_density_is_reported() {
        let d = RadialProfile::density(Arc::new(|r: f64| r.powf(-2.5)), vec![], f64::INFINITY, "too singular").unwrap();
        match d.capped_moment(1.0) {
            Err(Error::Divergent { near_or_far, .. }) => assert_eq!(near_or_far, "near 0"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pushforward_scales_tail() {
        let p = RadialProfile::power(0.6).unwrap();
        let eps = 0.01;
        let q = p.pushforward(eps).unwrap();
        for s in [0.1, 3.0] {
            assert!((q.tail_mass(s).unwrap() - p.tail_mass(s / eps).unwrap()).abs() < 1e-12 * q.tail_mass(s).unwrap());
        }
        let d = RadialProfile::density(Arc::new(|r: f64| (-r).exp()), vec![], f64::INFINITY, "exp").unwrap();
        let e = d.pushforward(2.0).unwrap();
        assert!((e.tail_mass(1.0).unwrap() - (-0.5f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn atoms() {
        let p = RadialProfile::atoms(vec![(0.5, 2.0), (3.0, 1.0)]).unwrap();
        assert_eq!(p.tail_mass(1.0).unwrap(), 1.0);
        assert_eq!(p.capped_moment(1.0).unwrap(), 2.0);
        assert!(RadialProfile::atoms(vec![(0.0, 1.0)]).is_err());
    }
}
