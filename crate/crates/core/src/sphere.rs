//! Quadrature on the unit sphere `S^{d-1}` against the (unnormalized) surface
//! measure σ.

use crate::point::{self, P3};
use crate::quadrature::gauss_legendre;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Resolution of the spherical grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SphereGrid {
    /// Number of uniform angles on `S^1`.
    pub circle: usize,
    /// Gauss–Legendre nodes in the polar coordinate on `S^2` (split evenly between hemispheres).
    pub polar: usize,
    /// Uniform azimuthal nodes on `S^2`.
    pub azimuth: usize,
}

impl Default for SphereGrid {
    fn default() -> Self {
        SphereGrid { circle: 512, polar: 64, azimuth: 128 }
    }
}

/// Node on the sphere with its σ-weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereNode {
    pub theta: P3,
    pub weight: f64,
}

/// σ-quadrature nodes on `S^{d-1}`; weights sum to `σ(S^{d-1})`.
pub fn sigma_nodes(d: usize, grid: &SphereGrid) -> Vec<SphereNode> {
    match d {
        1 => vec![
            SphereNode { theta: [1.0, 0.0, 0.0], weight: 1.0 },
            SphereNode { theta: [-1.0, 0.0, 0.0], weight: 1.0 },
        ],
        2 => {
            let n = grid.circle.max(4);
            (0..n)
                .map(|k| {
                    let phi = 2.0 * PI * k as f64 / n as f64;
                    SphereNode { theta: [phi.cos(), phi.sin(), 0.0], weight: 2.0 * PI / n as f64 }
                })
                .collect()
        }
        3 => sigma_nodes_pole(grid, &[0.0, 0.0, 1.0]),
        _ => panic!("unsupported dimension {d}"),
    }
}

/// `S^2` product grid (Gauss–Legendre on each hemisphere × uniform azimuth)
/// with the given unit vector as pole.
pub fn sigma_nodes_pole(grid: &SphereGrid, pole: &P3) -> Vec<SphereNode> {
    let half = (grid.polar / 2).max(1);
    let (x, w) = gauss_legendre(half);
    let na = grid.azimuth.max(4);
    let (u, v) = point::orthonormal_complement(pole);
    let mut out = Vec::with_capacity(2 * half * na);
    for hemi in [-1.0, 1.0] {
        for (xi, wi) in x.iter().zip(&w) {
            // map [-1,1] onto z ∈ [0,1] (or [-1,0])
            let z = hemi * 0.5 * (xi + 1.0);
            let s = (1.0 - z * z).max(0.0).sqrt();
            for k in 0..na {
                let phi = 2.0 * PI * k as f64 / na as f64;
                let (c, sn) = (phi.cos() * s, phi.sin() * s);
                let theta = [
                    z * pole[0] + c * u[0] + sn * v[0],
                    z * pole[1] + c * u[1] + sn * v[1],
                    z * pole[2] + c * u[2] + sn * v[2],
                ];
                out.push(SphereNode { theta, weight: 0.5 * wi * 2.0 * PI / na as f64 });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::sphere_area;

    #[test]
    fn weights_sum_to_area() {
        for d in 1..=3 {
            let s: f64 = sigma_nodes(d, &SphereGrid::default()).iter().map(|n| n.weight).sum();
            assert!((s - sphere_area(d)).abs() < 1e-12, "d={d}");
        }
    }

    #[test]
    fn abs_projection_integral_is_k1d() {
        for d in 1..=3 {
            let s: f64 = sigma_nodes(d, &SphereGrid::default()).iter().map(|n| n.weight * n.theta[0].abs()).sum();
            let expect = crate::constants::k1d(d);
            assert!((s - expect).abs() < 5e-4 * expect, "d={d}: {s} vs {expect}");
        }
        // in the pole frame the kink sits on a hemisphere boundary: exact to roundoff
        let pole = point::normalize(&[1.0, 2.0, -0.5]).unwrap();
        let s: f64 = sigma_nodes_pole(&SphereGrid::default(), &pole)
            .iter()
            .map(|n| n.weight * point::dot(&n.theta, &pole).abs())
            .sum();
        assert!((s - 2.0 * PI).abs() < 1e-12);
    }
}
