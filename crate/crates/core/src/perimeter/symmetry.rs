//! Numerical check of `Per_ν(E) = Per_ν(E^c)` with the complement taken inside a window.

use super::{per_nu, per_nu_set, QuadratureSpec};
use crate::error::{Error, Result};
use crate::geometry::{covariogram_grid, lattice, shifted_overlap, IntervalUnion, LatticeTable, SetGeometry, ShiftFunction, VoxelSet};
use crate::measures::{tail_mass, MeasureSpec};
use crate::point::P3;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryReport {
    /// `Per_ν(E)`.
    pub lhs: f64,
    /// `∫ |(W∖E) ∩ (E - y)| ν(dy)`.
    pub rhs: f64,
    pub gap: f64,
    /// Quadrature error of both sides together.
    pub quad_err: f64,
    /// `|E|·ν(|y| ≥ r_W)`, bounding what the window cuts off.
    pub tail_bound: f64,
    /// Distance from `E` to the boundary of the window.
    pub window_margin: f64,
    /// The tail bound exceeds the tolerance, so a small gap proves nothing.
    pub inconclusive: bool,
}

/// `F(y) = |A ∩ (E - y)|` for interval unions `A`, `E`.
struct CrossIntervals {
    a: Vec<(f64, f64)>,
    e: Vec<(f64, f64)>,
    kinks: Vec<f64>,
    lipschitz: f64,
}

impl CrossIntervals {
    fn new(a: Vec<(f64, f64)>, e: &IntervalUnion) -> Self {
        let mut kinks = Vec::new();
        for &(a0, a1) in &a {
            for &(e0, e1) in e.intervals() {
                for p in [a0 - e0, a0 - e1, a1 - e0, a1 - e1] {
                    if p != 0.0 {
                        kinks.push(p.abs());
                    }
                }
            }
        }
        kinks.sort_by(|x, y| x.partial_cmp(y).unwrap());
        kinks.dedup();
        CrossIntervals { a, e: e.intervals().to_vec(), kinks, lipschitz: e.perimeter() }
    }

    fn eval(&self, y: f64) -> f64 {
        shifted_overlap(&self.a, &self.e, -y)
    }
}

impl ShiftFunction for CrossIntervals {
    fn dim(&self) -> usize {
        1
    }

    fn deficit(&self, theta: &P3, r: f64) -> f64 {
        self.eval(r * theta[0])
    }

    fn slope(&self, theta: &P3) -> f64 {
        match self.kinks.first() {
            Some(&p) => self.eval(p * theta[0].signum()) / p * theta[0].abs(),
            None => 0.0,
        }
    }

    fn support_radius(&self, theta: &P3) -> f64 {
        self.kinks.last().copied().unwrap_or(0.0) / theta[0].abs()
    }

    fn far_value(&self) -> f64 {
        0.0
    }

    fn breakpoints(&self, theta: &P3) -> Vec<f64> {
        let c = theta[0].abs();
        let mut v: Vec<f64> = self.kinks.iter().map(|p| p / c).collect();
        v.pop();
        v
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
}

/// Compares `Per_ν(E)` with the perimeter of the complement of `E` inside
/// the box window `[lo, hi]`. In `d ≥ 2` both sides use `E` rasterized at
/// `q.grid_h` on a grid aligned with the window.
pub fn symmetry_check(set: &SetGeometry, m: &MeasureSpec, lo: &[f64], hi: &[f64], q: &QuadratureSpec) -> Result<SymmetryReport> {
    let d = set.dim();
    if m.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: m.dim() });
    }
    if lo.len() != d || hi.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: lo.len().min(hi.len()) });
    }
    let (elo, ehi) = set.bounding_box();
    let mut margin = f64::INFINITY;
    for i in 0..d {
        margin = margin.min(elo[i] - lo[i]).min(hi[i] - ehi[i]);
    }
    if !(margin > 0.0) {
        return Err(Error::invalid("window must contain the set with a positive margin"));
    }
    let (lhs, rhs) = match set {
        SetGeometry::Intervals(e) => {
            let mut a = Vec::new();
            let mut x = lo[0];
            for &(a0, a1) in e.intervals() {
                a.push((x, a0));
                x = a1;
            }
            a.push((x, hi[0]));
            let f = CrossIntervals::new(a, e);
            (per_nu_set(set, m, q)?, per_nu(&f, m, q)?)
        }
        _ => {
            let h = q.grid_h;
            let mut n = [1usize; 3];
            let mut cells = 1usize;
            for i in 0..d {
                n[i] = ((hi[i] - lo[i]) / h - 1e-9).ceil().max(1.0) as usize;
                cells = cells.saturating_mul(n[i]);
            }
            if cells > crate::geometry::MAX_CELLS {
                return Err(Error::MemoryBound {
                    requested: cells,
                    limit: crate::geometry::MAX_CELLS,
                    suggested_h: crate::geometry::suggest_h(h, cells, d),
                });
            }
            let mut inside = vec![0u8; cells];
            for k in 0..n[2] {
                for j in 0..n[1] {
                    for i in 0..n[0] {
                        let c = [lo[0] + (i as f64 + 0.5) * h, if d > 1 { lo[1] + (j as f64 + 0.5) * h } else { 0.0 }, if d > 2 { lo[2] + (k as f64 + 0.5) * h } else { 0.0 }];
                        inside[i + n[0] * (j + n[1] * k)] = set.contains(&c) as u8;
                    }
                }
            }
            let outside: Vec<u8> = inside.iter().map(|&b| 1 - b).collect();
            let (half, c) = lattice::correlate_fft(d, n, &outside, &inside)?;
            let cell = h.powi(d as i32);
            let table = LatticeTable::new(d, half, h, c.iter().map(|&v| v as f64 * cell).collect(), 0.0);
            let vox = VoxelSet::new(d, &n[..d], h, lo, inside)?;
            (per_nu(&covariogram_grid(&vox)?, m, q)?, per_nu(&table, m, q)?)
        }
    };
    let tail_bound = set.volume() * tail_mass(m, margin)?;
    let gap = lhs.value - rhs.value;
    let tol = q.rel_tol * lhs.value.abs();
    Ok(SymmetryReport {
        lhs: lhs.value,
        rhs: rhs.value,
        gap,
        quad_err: lhs.err + rhs.err,
        tail_bound,
        window_margin: margin,
        inconclusive: tail_bound > tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Kernel;

    #[test]
    fn interval_in_wide_window() {
        let e = SetGeometry::Intervals(IntervalUnion::single(0.0, 1.0).unwrap());
        let m = MeasureSpec::kernel(Kernel::gaussian(1, 1.0).unwrap());
        let r = symmetry_check(&e, &m, &[-10.0], &[11.0], &QuadratureSpec::with_tol(1e-12)).unwrap();
        assert!(!r.inconclusive);
        assert!(r.gap.abs() < 1e-10, "{r:?}");
    }

    #[test]
    fn narrow_window_flagged() {
        let e = SetGeometry::Intervals(IntervalUnion::single(0.0, 1.0).unwrap());
        let m = MeasureSpec::fractional(1, 0.5).unwrap();
        let r = symmetry_check(&e, &m, &[-1.0], &[2.0], &QuadratureSpec::default()).unwrap();
        assert!(r.inconclusive);
        assert!(r.gap >= 0.0 && r.gap <= r.tail_bound + r.quad_err);
    }
}
