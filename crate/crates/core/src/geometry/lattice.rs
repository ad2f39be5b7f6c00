//! Tables of a shift function sampled at lattice offsets `m·h`, extended by
//! multilinear interpolation. For sets (or functions) built from cubic
//! cells this interpolation is exact: the overlap of two cells shifted by
//! `y` is the tensor product of hat functions.

use super::voxel::{suggest_h, MAX_CELLS};
use crate::error::{Error, Result};
use crate::point::P3;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeTable {
    d: usize,
    half: [usize; 3],
    h: f64,
    values: Vec<f64>,
    far: f64,
}

impl LatticeTable {
    /// `values` indexed by offsets `m_i ∈ [-half_i, half_i]`, x fastest;
    /// offsets outside the table take the value `far`.
    pub fn new(d: usize, half: [usize; 3], h: f64, values: Vec<f64>, far: f64) -> Self {
        let n: usize = (0..3).map(|i| 2 * half[i] + 1).product();
        assert_eq!(values.len(), n);
        LatticeTable { d, half, h, values, far }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn half(&self) -> [usize; 3] {
        self.half
    }

    pub fn far(&self) -> f64 {
        self.far
    }

    #[inline]
    pub fn value(&self, m: [i64; 3]) -> f64 {
        let mut idx = 0usize;
        let mut stride = 1usize;
        for a in 0..3 {
            let h = self.half[a] as i64;
            if m[a] < -h || m[a] > h {
                return self.far;
            }
            idx += (m[a] + h) as usize * stride;
            stride *= 2 * self.half[a] + 1;
        }
        self.values[idx]
    }

    /// Interpolated value at `r·θ`.
    pub fn at(&self, theta: &P3, r: f64) -> f64 {
        let mut base = [0i64; 3];
        let mut sgn = [0i64; 3];
        let mut frac = [0.0; 3];
        for a in 0..self.d {
            let t = r * theta[a] / self.h;
            let at = t.abs();
            let f = at.floor();
            base[a] = f as i64;
            frac[a] = at - f;
            sgn[a] = if t < 0.0 { -1 } else { 1 };
        }
        let mut s = 0.0;
        for corner in 0..(1usize << self.d) {
            let mut w = 1.0;
            let mut m = [0i64; 3];
            for a in 0..self.d {
                let up = (corner >> a) & 1 == 1;
                w *= if up { frac[a] } else { 1.0 - frac[a] };
                m[a] = sgn[a] * (base[a] + up as i64);
            }
            if w != 0.0 {
                s += w * self.value(m);
            }
        }
        s
    }

    /// `lim_{r→0} at(θ, r)/r` when the table vanishes at the origin.
    pub fn slope(&self, theta: &P3) -> f64 {
        (0..self.d)
            .filter(|&a| theta[a] != 0.0)
            .map(|a| {
                let mut m = [0i64; 3];
                m[a] = if theta[a] < 0.0 { -1 } else { 1 };
                theta[a].abs() * self.value(m) / self.h
            })
            .sum()
    }

    /// Radius along `θ` beyond which the table is constantly `far`.
    pub fn support_radius(&self, theta: &P3) -> f64 {
        (0..self.d)
            .filter(|&a| theta[a] != 0.0)
            .map(|a| (self.half[a] + 1) as f64 * self.h / theta[a].abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// Radii along `θ` where the ray crosses a lattice hyperplane, below the support radius.
    pub fn breakpoints(&self, theta: &P3) -> Vec<f64> {
        let rs = self.support_radius(theta);
        let mut out = Vec::new();
        for a in 0..self.d {
            if theta[a] == 0.0 {
                continue;
            }
            let step = self.h / theta[a].abs();
            for k in 1..=self.half[a] {
                let r = k as f64 * step;
                if r < rs {
                    out.push(r);
                }
            }
        }
        out.sort_by(|x, y| x.partial_cmp(y).unwrap());
        out.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * y.abs());
        out
    }

    /// Largest difference quotient between lattice neighbours.
    pub fn lipschitz(&self) -> f64 {
        let dims: Vec<usize> = (0..3).map(|i| 2 * self.half[i] + 1).collect();
        let mut l = 0.0f64;
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    let idx = i + dims[0] * (j + dims[1] * k);
                    let v = self.values[idx];
                    let pos = [i, j, k];
                    for a in 0..self.d {
                        let next = if pos[a] + 1 < dims[a] {
                            let stride: usize = dims[..a].iter().product();
                            self.values[idx + stride]
                        } else {
                            self.far
                        };
                        l = l.max((next - v).abs() / self.h);
                    }
                }
            }
        }
        l
    }
}

impl super::ShiftFunction for LatticeTable {
    fn dim(&self) -> usize {
        self.d
    }

    fn deficit(&self, theta: &P3, r: f64) -> f64 {
        self.at(theta, r)
    }

    fn slope(&self, theta: &P3) -> f64 {
        LatticeTable::slope(self, theta)
    }

    fn support_radius(&self, theta: &P3) -> f64 {
        LatticeTable::support_radius(self, theta)
    }

    fn far_value(&self) -> f64 {
        self.far
    }

    fn breakpoints(&self, theta: &P3) -> Vec<f64> {
        LatticeTable::breakpoints(self, theta)
    }

    fn lipschitz(&self) -> f64 {
        LatticeTable::lipschitz(self)
    }
}

fn next_pow2(n: usize) -> usize {
    n.max(1).next_power_of_two()
}

fn fft_axis(data: &mut [Complex<f64>], dims: [usize; 3], axis: usize, inverse: bool, planner: &mut FftPlanner<f64>) {
    let n = dims[axis];
    if n == 1 {
        return;
    }
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    let stride: usize = dims[..axis].iter().product();
    let outer: usize = dims[axis + 1..].iter().product();
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    for o in 0..outer {
        for s in 0..stride {
            let base = o * stride * n + s;
            for t in 0..n {
                buf[t] = data[base + t * stride];
            }
            fft.process(&mut buf);
            for t in 0..n {
                data[base + t * stride] = buf[t];
            }
        }
    }
}

fn fft_nd(data: &mut [Complex<f64>], dims: [usize; 3], inverse: bool) {
    let mut planner = FftPlanner::new();
    for axis in 0..3 {
        fft_axis(data, dims, axis, inverse, &mut planner);
    }
}

/// `c(m) = Σ_x a(x)·b(x + m)` for `m_i ∈ [-(n_i-1), n_i-1]`, by zero-padded FFT.
/// Inputs are cell arrays of extents `n` (x fastest); results are rounded to integers.
pub fn correlate_fft(d: usize, n: [usize; 3], a: &[u8], b: &[u8]) -> Result<([usize; 3], Vec<i64>)> {
    let mut p = [1usize; 3];
    for i in 0..d {
        p[i] = next_pow2(2 * n[i] - 1);
    }
    let total: usize = p.iter().product();
    if total > MAX_CELLS {
        return Err(Error::MemoryBound { requested: total, limit: MAX_CELLS, suggested_h: suggest_h(1.0, total, d) });
    }
    let embed = |src: &[u8]| {
        let mut out = vec![Complex::new(0.0, 0.0); total];
        for k in 0..n[2] {
            for j in 0..n[1] {
                for i in 0..n[0] {
                    out[i + p[0] * (j + p[1] * k)] = Complex::new(src[i + n[0] * (j + n[1] * k)] as f64, 0.0);
                }
            }
        }
        out
    };
    let mut fa = embed(a);
    let mut fb = embed(b);
    fft_nd(&mut fa, p, false);
    fft_nd(&mut fb, p, false);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x = x.conj() * y;
    }
    fft_nd(&mut fa, p, true);
    let half = [n[0] - 1, n[1] - 1, n[2] - 1];
    let od = [2 * half[0] + 1, 2 * half[1] + 1, 2 * half[2] + 1];
    let mut out = vec![0i64; od.iter().product()];
    let norm = total as f64;
    for k in 0..od[2] {
        for j in 0..od[1] {
            for i in 0..od[0] {
                let m = [i as i64 - half[0] as i64, j as i64 - half[1] as i64, k as i64 - half[2] as i64];
                let src: Vec<usize> = (0..3).map(|a| m[a].rem_euclid(p[a] as i64) as usize).collect();
                let v = fa[src[0] + p[0] * (src[1] + p[1] * src[2])].re / norm;
                out[i + od[0] * (j + od[1] * k)] = v.round() as i64;
            }
        }
    }
    Ok((half, out))
}

/// Same as [`correlate_fft`] by direct summation over occupied pairs.
pub fn correlate_direct(n: [usize; 3], a: &[u8], b: &[u8]) -> ([usize; 3], Vec<i64>) {
    let half = [n[0] - 1, n[1] - 1, n[2] - 1];
    let od = [2 * half[0] + 1, 2 * half[1] + 1, 2 * half[2] + 1];
    let cells = |src: &[u8]| -> Vec<[i64; 3]> {
        let mut v = Vec::new();
        for k in 0..n[2] {
            for j in 0..n[1] {
                for i in 0..n[0] {
                    if src[i + n[0] * (j + n[1] * k)] != 0 {
                        v.push([i as i64, j as i64, k as i64]);
                    }
                }
            }
        }
        v
    };
    let (ca, cb) = (cells(a), cells(b));
    let mut out = vec![0i64; od.iter().product()];
    for x in &ca {
        for y in &cb {
            let m = [y[0] - x[0], y[1] - x[1], y[2] - x[2]];
            let idx = (m[0] + half[0] as i64) as usize
                + od[0] * ((m[1] + half[1] as i64) as usize + od[1] * (m[2] + half[2] as i64) as usize);
            out[idx] += 1;
        }
    }
    (half, out)
}

/// Difference table `D(m) = ½ h^d Σ_x |u(x+m) - u(x)|` of a cell function
/// (zero outside the array), with far value `h^d Σ|u|`.
pub fn difference_table(d: usize, n: [usize; 3], h: f64, u: &[f64]) -> LatticeTable {
    let half = [n[0] - 1, n[1] - 1, n[2] - 1];
    let od = [2 * half[0] + 1, 2 * half[1] + 1, 2 * half[2] + 1];
    let cell = h.powi(d as i32);
    let get = |i: i64, j: i64, k: i64| -> f64 {
        if i < 0 || j < 0 || k < 0 || i >= n[0] as i64 || j >= n[1] as i64 || k >= n[2] as i64 {
            0.0
        } else {
            u[i as usize + n[0] * (j as usize + n[1] * k as usize)]
        }
    };
    let total_abs: f64 = u.iter().map(|v| v.abs()).sum();
    let values: Vec<f64> = (0..od.iter().product::<usize>())
        .into_par_iter()
        .map(|idx| {
            let i = idx % od[0];
            let j = (idx / od[0]) % od[1];
            let k = idx / (od[0] * od[1]);
            let m = [i as i64 - half[0] as i64, j as i64 - half[1] as i64, k as i64 - half[2] as i64];
            // cells x with x+m outside the array contribute |u(x)|; cells
            // outside the array with x+m inside contribute |u(x+m)|
            let mut s = 0.0;
            for z in 0..n[2] as i64 {
                for y in 0..n[1] as i64 {
                    for x in 0..n[0] as i64 {
                        let a = get(x, y, z);
                        let b = get(x + m[0], y + m[1], z + m[2]);
                        s += (b - a).abs();
                        let (xs, ys, zs) = (x - m[0], y - m[1], z - m[2]);
                        if xs < 0 || ys < 0 || zs < 0 || xs >= n[0] as i64 || ys >= n[1] as i64 || zs >= n[2] as i64 {
                            s += a.abs();
                        }
                    }
                }
            }
            0.5 * cell * s
        })
        .collect();
    LatticeTable::new(d, half, h, values, cell * total_abs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fft_and_direct_agree() {
        let n = [5, 4, 1];
        let a: Vec<u8> = (0..20).map(|i| ((i * 7 + 3) % 3 == 0) as u8).collect();
        let b: Vec<u8> = (0..20).map(|i| ((i * 5 + 1) % 4 != 0) as u8).collect();
        let (h1, c1) = correlate_fft(2, n, &a, &b).unwrap();
        let (h2, c2) = correlate_direct(n, &a, &b);
        assert_eq!(h1, h2);
        assert_eq!(c1, c2);
    }

    #[test]
    fn difference_table_of_step() {
        // u = 1 on two adjacent cells (d=1, h=1): D(0)=0, D(±1)=1, D(±2..)=2
        let t = difference_table(1, [2, 1, 1], 1.0, &[1.0, 1.0]);
        assert_eq!(t.value([0, 0, 0]), 0.0);
        assert_eq!(t.value([1, 0, 0]), 1.0);
        assert_eq!(t.value([-1, 0, 0]), 1.0);
        assert_eq!(t.value([5, 0, 0]), 2.0);
        assert!((t.at(&[1.0, 0.0, 0.0], 0.5) - 0.5).abs() < 1e-15);
        assert_eq!(t.slope(&[-1.0, 0.0, 0.0]), 1.0);
    }
}
