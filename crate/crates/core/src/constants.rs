//! Dimension-dependent constants of the unit ball and sphere.

use serde::Serialize;
use std::f64::consts::PI;

/// Volume of the unit ball in `R^d`, `π^{d/2} / Γ(d/2 + 1)`. `d = 0` gives 1.
pub fn ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => PI.powf(d as f64 / 2.0) / libm::tgamma(d as f64 / 2.0 + 1.0),
    }
}

/// Surface area of the unit sphere `S^{d-1}`, equal to `d` times the ball volume.
pub fn sphere_area(d: usize) -> f64 {
    d as f64 * ball_volume(d)
}

/// `K_{1,d} = ∫_{S^{d-1}} |θ·e| dθ = 2ϖ_{d-1}`.
pub fn k1d(d: usize) -> f64 {
    assert!(d >= 1);
    2.0 * ball_volume(d - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniversalConstants {
    pub d: usize,
    pub varpi: f64,
    pub kappa: f64,
    #[serde(rename = "K1d")]
    pub k1d: f64,
}

pub fn universal_constants(d: usize) -> UniversalConstants {
    UniversalConstants { d, varpi: ball_volume(d), kappa: sphere_area(d), k1d: k1d(d) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_values() {
        let c2 = universal_constants(2);
        assert!((c2.varpi - PI).abs() < 1e-15);
        assert!((c2.kappa - 2.0 * PI).abs() < 1e-15);
        assert!((c2.k1d - 4.0).abs() < 1e-15);
        let c1 = universal_constants(1);
        assert_eq!((c1.varpi, c1.kappa, c1.k1d), (2.0, 2.0, 2.0));
        let c3 = universal_constants(3);
        assert!((c3.varpi - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((c3.kappa - 4.0 * PI).abs() < 1e-14);
        assert!((c3.k1d - 2.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn gamma_branch_matches_closed_forms() {
        // ϖ_4 = π²/2, ϖ_5 = 8π²/15
        assert!((ball_volume(4) - PI * PI / 2.0).abs() < 1e-12);
        assert!((ball_volume(5) - 8.0 * PI * PI / 15.0).abs() < 1e-12);
    }
}
