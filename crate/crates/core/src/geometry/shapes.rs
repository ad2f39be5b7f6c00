use crate::constants::{ball_volume, sphere_area};
use crate::error::{Error, Result};
use crate::point::{self, P3};
use serde::{Deserialize, Serialize};

/// Shapes whose volume, perimeter and normals are known exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnalyticShape {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Simple polygon in the plane, vertices counter-clockwise.
    Polygon { vertices: Vec<[f64; 2]> },
}

impl AnalyticShape {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        point::check_dim(center.len())?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid("ball radius must be positive and finite"));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("ball center must be finite"));
        }
        Ok(AnalyticShape::Ball { center, radius })
    }

    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        point::check_dim(lo.len())?;
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), got: hi.len() });
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::invalid("box corners must satisfy lo < hi in every coordinate"));
        }
        Ok(AnalyticShape::Box { lo, hi })
    }

    pub fn polygon(vertices: Vec<[f64; 2]>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::invalid("polygon needs at least 3 vertices"));
        }
        if vertices.iter().any(|v| !v[0].is_finite() || !v[1].is_finite()) {
            return Err(Error::invalid("polygon vertices must be finite"));
        }
        for i in 0..n {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            if a == b {
                return Err(Error::invalid(format!("degenerate polygon edge at vertex {i}")));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (p1, p2) = (vertices[i], vertices[(i + 1) % n]);
                let (q1, q2) = (vertices[j], vertices[(j + 1) % n]);
                if segments_intersect(p1, p2, q1, q2) {
                    return Err(Error::invalid(format!("polygon is not simple: edges {i} and {j} intersect")));
                }
            }
        }
        if signed_area(&vertices) <= 0.0 {
            return Err(Error::invalid("polygon must be counter-clockwise"));
        }
        Ok(AnalyticShape::Polygon { vertices })
    }

    /// Disk in the plane. Panics on a non-positive radius.
    pub fn disk(center: [f64; 2], radius: f64) -> Self {
        Self::ball(center.to_vec(), radius).expect("valid disk")
    }

    /// Axis-parallel rectangle. Panics unless `lo < hi`.
    pub fn rect(lo: [f64; 2], hi: [f64; 2]) -> Self {
        Self::boxed(lo.to_vec(), hi.to_vec()).expect("valid rectangle")
    }

    pub fn dim(&self) -> usize {
        match self {
            AnalyticShape::Ball { center, .. } => center.len(),
            AnalyticShape::Box { lo, .. } => lo.len(),
            AnalyticShape::Polygon { .. } => 2,
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            AnalyticShape::Ball { center, radius } => ball_volume(center.len()) * radius.powi(center.len() as i32),
            AnalyticShape::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| b - a).product(),
            AnalyticShape::Polygon { vertices } => signed_area(vertices),
        }
    }

    /// Classical perimeter `H^{d-1}(∂E)`.
    pub fn perimeter(&self) -> f64 {
        match self {
            AnalyticShape::Ball { center, radius } => {
                let d = center.len();
                sphere_area(d) * radius.powi(d as i32 - 1)
            }
            AnalyticShape::Box { lo, hi } => {
                let s: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| b - a).collect();
                let d = s.len();
                2.0 * (0..d).map(|i| (0..d).filter(|&j| j != i).map(|j| s[j]).product::<f64>()).sum::<f64>()
            }
            AnalyticShape::Polygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| {
                        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                        (b[0] - a[0]).hypot(b[1] - a[1])
                    })
                    .sum()
            }
        }
    }

    /// Edge lengths and outward unit normals of a polygon (or planar box).
    pub fn boundary_decomposition(&self) -> Result<Vec<(f64, [f64; 2])>> {
        let verts = match self {
            AnalyticShape::Polygon { vertices } => vertices.clone(),
            AnalyticShape::Box { lo, hi } if lo.len() == 2 => {
                vec![[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]]
            }
            _ => return Err(Error::unsupported("boundary decomposition needs a polygon or planar box")),
        };
        let n = verts.len();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let (a, b) = (verts[i], verts[(i + 1) % n]);
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            let len = dx.hypot(dy);
            if len == 0.0 {
                return Err(Error::invalid(format!("zero-length edge at vertex {i}")));
            }
            out.push((len, [dy / len, -dx / len]));
        }
        Ok(out)
    }

    pub fn contains(&self, x: &P3) -> bool {
        match self {
            AnalyticShape::Ball { center, radius } => {
                let c = point::from_slice(center, center.len()).unwrap();
                point::norm(&point::sub(x, &c)) <= *radius
            }
            AnalyticShape::Box { lo, hi } => (0..lo.len()).all(|i| lo[i] <= x[i] && x[i] <= hi[i]),
            AnalyticShape::Polygon { vertices } => point_in_polygon(vertices, x[0], x[1]),
        }
    }

    /// Axis-aligned bounding box.
    pub fn bounding_box(&self) -> (P3, P3) {
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        match self {
            AnalyticShape::Ball { center, radius } => {
                for i in 0..center.len() {
                    lo[i] = center[i] - radius;
                    hi[i] = center[i] + radius;
                }
            }
            AnalyticShape::Box { lo: a, hi: b } => {
                lo[..a.len()].copy_from_slice(a);
                hi[..b.len()].copy_from_slice(b);
            }
            AnalyticShape::Polygon { vertices } => {
                lo[0] = vertices.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
                lo[1] = vertices.iter().map(|v| v[1]).fold(f64::INFINITY, f64::min);
                hi[0] = vertices.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
                hi[1] = vertices.iter().map(|v| v[1]).fold(f64::NEG_INFINITY, f64::max);
            }
        }
        (lo, hi)
    }

    pub fn translated(&self, v: &[f64]) -> Result<Self> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        Ok(match self {
            AnalyticShape::Ball { center, radius } => {
                AnalyticShape::Ball { center: center.iter().zip(v).map(|(c, t)| c + t).collect(), radius: *radius }
            }
            AnalyticShape::Box { lo, hi } => AnalyticShape::Box {
                lo: lo.iter().zip(v).map(|(c, t)| c + t).collect(),
                hi: hi.iter().zip(v).map(|(c, t)| c + t).collect(),
            },
            AnalyticShape::Polygon { vertices } => {
                AnalyticShape::Polygon { vertices: vertices.iter().map(|p| [p[0] + v[0], p[1] + v[1]]).collect() }
            }
        })
    }

    /// Sorted disjoint chords `[t0, t1]` of the line `{o + t·u}` with the shape
    /// (`u` a unit vector).
    pub fn chords(&self, o: &P3, u: &P3) -> Vec<(f64, f64)> {
        match self {
            AnalyticShape::Ball { center, radius } => {
                let c = point::from_slice(center, center.len()).unwrap();
                let w = point::sub(o, &c);
                let b = point::dot(&w, u);
                let disc = b * b - (point::dot(&w, &w) - radius * radius);
                if disc <= 0.0 {
                    vec![]
                } else {
                    let s = disc.sqrt();
                    vec![(-b - s, -b + s)]
                }
            }
            AnalyticShape::Box { lo, hi } => {
                let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
                for i in 0..lo.len() {
                    if u[i] == 0.0 {
                        if o[i] < lo[i] || o[i] > hi[i] {
                            return vec![];
                        }
                    } else {
                        let (a, b) = ((lo[i] - o[i]) / u[i], (hi[i] - o[i]) / u[i]);
                        t0 = t0.max(a.min(b));
                        t1 = t1.min(a.max(b));
                    }
                }
                if t1 > t0 {
                    vec![(t0, t1)]
                } else {
                    vec![]
                }
            }
            AnalyticShape::Polygon { vertices } => {
                let n = vertices.len();
                let mut ts = Vec::new();
                for i in 0..n {
                    let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                    let e = [b[0] - a[0], b[1] - a[1]];
                    let den = u[0] * e[1] - u[1] * e[0];
                    if den == 0.0 {
                        continue;
                    }
                    let w = [a[0] - o[0], a[1] - o[1]];
                    let t = (w[0] * e[1] - w[1] * e[0]) / den;
                    let s = (w[0] * u[1] - w[1] * u[0]) / den;
                    // half-open in s so shared vertices are counted once
                    if (0.0..1.0).contains(&s) {
                        ts.push(t);
                    }
                }
                ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let mut out = Vec::with_capacity(ts.len() / 2);
                for pair in ts.chunks_exact(2) {
                    if pair[1] > pair[0] {
                        out.push((pair[0], pair[1]));
                    }
                }
                out
            }
        }
    }
}

pub(crate) fn signed_area(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn on_segment(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

fn segments_intersect(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let (d1, d2) = (orient(q1, q2, p1), orient(q1, q2, p2));
    let (d3, d4) = (orient(p1, p2, q1), orient(p1, p2, q2));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

fn point_in_polygon(v: &[[f64; 2]], x: f64, y: f64) -> bool {
    let n = v.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (v[i], v[j]);
        if (a[1] > y) != (b[1] > y) {
            let xc = a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if x < xc {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn perimeters_and_volumes() {
        let d = AnalyticShape::disk([0.0, 0.0], 1.0);
        assert!((d.perimeter() - 2.0 * PI).abs() < 1e-15);
        let b3 = AnalyticShape::ball(vec![0.0; 3], 1.0).unwrap();
        assert!((b3.perimeter() - 4.0 * PI).abs() < 1e-14);
        let sq = AnalyticShape::rect([0.0, 0.0], [1.0, 1.0]);
        assert_eq!(sq.perimeter(), 4.0);
        let bx = AnalyticShape::boxed(vec![0.0; 3], vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(bx.perimeter(), 22.0);
        let tri = AnalyticShape::polygon(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!((tri.perimeter() - (2.0 + 2f64.sqrt())).abs() < 1e-15);
        assert!((tri.volume() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn boundary_decomposition_closes() {
        let sq = AnalyticShape::rect([0.0, 0.0], [1.0, 1.0]);
        let e = sq.boundary_decomposition().unwrap();
        assert_eq!(e.len(), 4);
        assert!(e.iter().all(|(l, _)| *l == 1.0));
        let tri = AnalyticShape::polygon(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let e = tri.boundary_decomposition().unwrap();
        let h = e[1];
        assert!((h.0 - 2f64.sqrt()).abs() < 1e-15);
        assert!((h.1[0] - 0.5f64.sqrt()).abs() < 1e-15 && (h.1[1] - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn polygon_validation() {
        assert!(AnalyticShape::polygon(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]).is_err());
        let bowtie = vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(AnalyticShape::polygon(bowtie).is_err());
        assert!(AnalyticShape::polygon(vec![[0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).is_err());
    }

    #[test]
    fn chords_of_l_shape() {
        let l = AnalyticShape::polygon(vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]])
            .unwrap();
        let c = l.chords(&[-1.0, 0.5, 0.0], &[1.0, 0.0, 0.0]);
        assert_eq!(c, vec![(1.0, 3.0)]);
        let c = l.chords(&[0.5, -1.0, 0.0], &[0.0, 1.0, 0.0]);
        assert_eq!(c, vec![(1.0, 3.0)]);
        let c = l.chords(&[-1.0, 1.5, 0.0], &[1.0, 0.0, 0.0]);
        assert_eq!(c, vec![(1.0, 2.0)]);
        // slanted line: compare with fine membership sampling
        let u = point::normalize(&[1.0, 0.4, 0.0]).unwrap();
        let o = [-0.5, 0.3, 0.0];
        let c = l.chords(&o, &u);
        let total: f64 = c.iter().map(|(a, b)| b - a).sum();
        let n = 200_000;
        let hit = (0..n)
            .filter(|k| {
                let t = -1.0 + 5.0 * (*k as f64 + 0.5) / n as f64;
                l.contains(&point::add(&o, &point::scale(&u, t)))
            })
            .count();
        assert!((total - 5.0 * hit as f64 / n as f64).abs() < 1e-4);
    }
}
