//! `F_ν(u) = ½ ∫∫ |u(x+y) - u(x)| ν(dy) dx` for cell-wise constant functions.

use super::{per_nu, PerimeterResult, QuadratureSpec};
use crate::error::{Error, Result};
use crate::geometry::{covariogram_grid, lattice, VoxelSet};
use crate::measures::MeasureSpec;
use crate::point;

/// Function that is constant on the cells of a regular grid and zero outside.
///
/// Cell `(i, j, k)` is `origin + h·[i, i+1) × …`; values are stored with `i`
/// fastest, as in [`VoxelSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    d: usize,
    dims: [usize; 3],
    h: f64,
    origin: [f64; 3],
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(d: usize, dims: &[usize], h: f64, origin: &[f64], values: Vec<f64>) -> Result<Self> {
        point::check_dim(d)?;
        if dims.len() != d || origin.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: dims.len().max(origin.len()) });
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::invalid("grid spacing must be positive"));
        }
        let mut n = [1usize; 3];
        let mut o = [0.0; 3];
        for i in 0..d {
            if dims[i] == 0 {
                return Err(Error::invalid("grid dimensions must be positive"));
            }
            n[i] = dims[i];
            o[i] = origin[i];
        }
        if values.len() != n.iter().product::<usize>() {
            return Err(Error::invalid(format!("expected {} grid values, got {}", n.iter().product::<usize>(), values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("grid values must be finite"));
        }
        Ok(GridFunction { d, dims: n, h, origin: o, values })
    }

    /// `c·1_E` on the grid of `v`.
    pub fn indicator(v: &VoxelSet, c: f64) -> Self {
        let o = v.origin();
        GridFunction {
            d: v.dim(),
            dims: v.dims(),
            h: v.spacing(),
            origin: o,
            values: v.mask().iter().map(|&b| if b != 0 { c } else { 0.0 }).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Distinct values, including the value 0 taken outside the grid.
    pub fn levels(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.values.clone();
        v.push(0.0);
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.dedup();
        v
    }

    /// `{u ≥ t}`, padded by one empty cell on each side.
    pub fn superlevel(&self, t: f64) -> Result<VoxelSet> {
        self.level_set(t, true)
    }

    /// `{u ≤ t}`, padded likewise.
    pub fn sublevel(&self, t: f64) -> Result<VoxelSet> {
        self.level_set(t, false)
    }

    fn level_set(&self, t: f64, above: bool) -> Result<VoxelSet> {
        let mut n = [1usize; 3];
        let mut o = [0.0; 3];
        for i in 0..self.d {
            n[i] = self.dims[i] + 2;
            o[i] = self.origin[i] - self.h;
        }
        let mut mask = vec![0u8; n.iter().product()];
        let pad = |i: usize| if i < self.d { 1 } else { 0 };
        for k in 0..self.dims[2] {
            for j in 0..self.dims[1] {
                for i in 0..self.dims[0] {
                    let v = self.values[i + self.dims[0] * (j + self.dims[1] * k)];
                    if (above && v >= t) || (!above && v <= t) {
                        mask[i + pad(0) + n[0] * (j + pad(1) + n[1] * (k + pad(2)))] = 1;
                    }
                }
            }
        }
        VoxelSet::new(self.d, &n[..self.d], self.h, &o[..self.d], mask)
    }
}

/// `F_ν(u)` from the shifted-difference table `D(y) = ½∫|u(x+y) - u(x)| dx`.
pub fn f_nu(u: &GridFunction, m: &MeasureSpec, q: &QuadratureSpec) -> Result<PerimeterResult> {
    let table = lattice::difference_table(u.d, u.dims, u.h, &u.values);
    let mut r = per_nu(&table, m, q)?;
    r.method = "shifted-differences".into();
    Ok(r)
}

/// `∫ Per_ν({u > t}) dt`, summed exactly over the gaps between levels.
///
/// For `t < 0` the superlevel set is unbounded and its complement `{u ≤ t}`
/// is used instead; both have the same non-local perimeter.
pub fn coarea_rhs(u: &GridFunction, m: &MeasureSpec, q: &QuadratureSpec) -> Result<PerimeterResult> {
    let levels = u.levels();
    let mut total: Option<PerimeterResult> = None;
    for w in levels.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let set = if hi <= 0.0 { u.level_set(lo, false)? } else { u.level_set(hi, true)? };
        let p = per_nu(&covariogram_grid(&set)?, m, q)?.scaled(hi - lo);
        total = Some(match total {
            None => p,
            Some(mut t) => {
                t.value += p.value;
                t.err += p.err;
                t.breakdown.near += p.breakdown.near;
                t.breakdown.bulk += p.breakdown.bulk;
                t.breakdown.tail += p.breakdown.tail;
                t.converged &= p.converged;
                t
            }
        });
    }
    let mut t = total.ok_or_else(|| Error::invalid("function is identically zero"))?;
    t.rel_err = if t.value != 0.0 { t.err / t.value.abs() } else { t.err };
    t.method = "coarea".into();
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn measure() -> MeasureSpec {
        MeasureSpec::fractional(2, 0.5).unwrap()
    }

    #[test]
    fn indicator_matches_perimeter() {
        let sq = crate::geometry::AnalyticShape::rect([0.0, 0.0], [1.0, 1.0]);
        let v = VoxelSet::rasterize(&sq, 0.125).unwrap();
        let q = QuadratureSpec::with_tol(1e-9);
        let p = super::super::per_nu_set(&crate::geometry::SetGeometry::Voxels(v.clone()), &measure(), &q).unwrap();
        let f = f_nu(&GridFunction::indicator(&v, 3.0), &measure(), &q).unwrap();
        assert!((f.value - 3.0 * p.value).abs() < 1e-8 * f.value);
    }

    #[test]
    fn signed_levels() {
        let u = GridFunction::new(2, &[4, 3], 0.25, &[0.0, 0.0], vec![1.0, 2.0, -1.0, 0.0, 2.0, 2.0, -1.0, 0.5, 0.0, 1.0, 1.0, -2.0]).unwrap();
        let q = QuadratureSpec::with_tol(1e-10);
        let a = f_nu(&u, &measure(), &q).unwrap();
        let b = coarea_rhs(&u, &measure(), &q).unwrap();
        assert!((a.value - b.value).abs() < 1e-8 * a.value, "{} {}", a.value, b.value);
    }
}
