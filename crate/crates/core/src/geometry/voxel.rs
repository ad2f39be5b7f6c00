use super::{AnalyticShape, IntervalUnion};
use crate::error::{Error, Result};
use crate::point::{self, P3};
use std::io::{BufRead, Read, Write};
use std::path::Path;

/// Default cap on the number of cells a single grid (or its transform
/// buffer) may hold.
pub const MAX_CELLS: usize = 1 << 24;

/// Set given by a bitmask of cubic cells of side `h`.
///
/// Cell `(i, j, k)` covers `origin + h·[i, i+1] × [j, j+1] × [k, k+1]`.
/// Unused axes have extent 1. A one-cell empty margin is required on every
/// side so that shifted copies are never clipped.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelSet {
    d: usize,
    dims: [usize; 3],
    h: f64,
    origin: P3,
    mask: Vec<u8>,
}

impl VoxelSet {
    pub fn new(d: usize, dims: &[usize], h: f64, origin: &[f64], mask: Vec<u8>) -> Result<Self> {
        point::check_dim(d)?;
        if dims.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: dims.len() });
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::invalid("voxel spacing h must be positive"));
        }
        let mut n = [1usize; 3];
        n[..d].copy_from_slice(dims);
        let total: usize = n.iter().product();
        if total > MAX_CELLS {
            return Err(Error::MemoryBound { requested: total, limit: MAX_CELLS, suggested_h: suggest_h(h, total, d) });
        }
        if mask.len() != total {
            return Err(Error::invalid(format!("mask has {} cells, grid needs {total}", mask.len())));
        }
        if mask.iter().any(|&b| b > 1) {
            return Err(Error::invalid("mask entries must be 0 or 1"));
        }
        let v = VoxelSet { d, dims: n, h, origin: point::from_slice(origin, d)?, mask };
        if v.count() == 0 {
            return Err(Error::invalid("voxel set is empty"));
        }
        let (lo, hi) = v.occupied_bounds();
        for i in 0..d {
            if lo[i] == 0 || hi[i] + 1 >= n[i] {
                return Err(Error::invalid("voxel set must keep a one-cell empty margin inside the grid"));
            }
        }
        Ok(v)
    }

    /// Cells whose centres lie in the shape. The grid starts one cell before
    /// the bounding box, so shapes with faces on grid lines are captured exactly.
    pub fn rasterize(shape: &AnalyticShape, h: f64) -> Result<Self> {
        let d = shape.dim();
        let (lo, hi) = shape.bounding_box();
        Self::rasterize_with(d, &lo, &hi, h, |x| shape.contains(x))
    }

    pub fn rasterize_intervals(e: &IntervalUnion, h: f64) -> Result<Self> {
        let (a, b) = e.bounds();
        Self::rasterize_with(1, &[a, 0.0, 0.0], &[b, 0.0, 0.0], h, |x| e.contains(x[0]))
    }

    fn rasterize_with<F: Fn(&P3) -> bool>(d: usize, lo: &P3, hi: &P3, h: f64, inside: F) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::invalid("voxel spacing h must be positive"));
        }
        let mut n = [1usize; 3];
        let mut origin = [0.0; 3];
        for i in 0..d {
            let cells = ((hi[i] - lo[i]) / h - 1e-9).ceil().max(1.0);
            if cells > 1e9 {
                return Err(Error::MemoryBound { requested: usize::MAX, limit: MAX_CELLS, suggested_h: h * cells / 256.0 });
            }
            n[i] = cells as usize + 2;
            origin[i] = lo[i] - h;
        }
        let total: usize = n.iter().product();
        if total > MAX_CELLS {
            return Err(Error::MemoryBound { requested: total, limit: MAX_CELLS, suggested_h: suggest_h(h, total, d) });
        }
        let mut mask = vec![0u8; total];
        for k in 0..n[2] {
            for j in 0..n[1] {
                for i in 0..n[0] {
                    let idx = [i, j, k];
                    let mut x = [0.0; 3];
                    for a in 0..d {
                        x[a] = origin[a] + (idx[a] as f64 + 0.5) * h;
                    }
                    if inside(&x) {
                        mask[i + n[0] * (j + n[1] * k)] = 1;
                    }
                }
            }
        }
        Self::new(d, &n[..d], h, &origin[..d], mask)
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

    pub fn origin(&self) -> P3 {
        self.origin
    }

    pub fn mask(&self) -> &[u8] {
        &self.mask
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> bool {
        self.mask[self.index(i, j, k)] == 1
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b == 1).count()
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.d as i32)
    }

    pub fn volume(&self) -> f64 {
        self.count() as f64 * self.cell_volume()
    }

    /// Perimeter of the union of cells: exposed faces times `h^{d-1}`.
    pub fn perimeter(&self) -> f64 {
        let faces: usize = self.face_counts().iter().sum();
        faces as f64 * self.h.powi(self.d as i32 - 1)
    }

    /// Number of exposed cell faces with normal `±e_a`, per axis `a`.
    pub fn face_counts(&self) -> [usize; 3] {
        let [n0, n1, n2] = self.dims;
        let mut faces = [0usize; 3];
        for k in 0..n2 {
            for j in 0..n1 {
                for i in 0..n0 {
                    if !self.get(i, j, k) {
                        continue;
                    }
                    let idx = [i as i64, j as i64, k as i64];
                    for (a, f) in faces.iter_mut().enumerate().take(self.d) {
                        for s in [-1i64, 1] {
                            let mut q = idx;
                            q[a] += s;
                            if !self.get_i64(q) {
                                *f += 1;
                            }
                        }
                    }
                }
            }
        }
        faces
    }

    fn get_i64(&self, q: [i64; 3]) -> bool {
        for a in 0..3 {
            if q[a] < 0 || q[a] as usize >= self.dims[a] {
                return false;
            }
        }
        self.get(q[0] as usize, q[1] as usize, q[2] as usize)
    }

    pub fn contains(&self, x: &P3) -> bool {
        let mut q = [0i64; 3];
        for a in 0..self.d {
            q[a] = ((x[a] - self.origin[a]) / self.h).floor() as i64;
        }
        self.get_i64(q)
    }

    /// Lower and upper (inclusive) indices of occupied cells per axis.
    pub fn occupied_bounds(&self) -> ([usize; 3], [usize; 3]) {
        let mut lo = [usize::MAX; 3];
        let mut hi = [0usize; 3];
        let [n0, n1, n2] = self.dims;
        for k in 0..n2 {
            for j in 0..n1 {
                for i in 0..n0 {
                    if self.get(i, j, k) {
                        for (a, v) in [i, j, k].into_iter().enumerate() {
                            lo[a] = lo[a].min(v);
                            hi[a] = hi[a].max(v);
                        }
                    }
                }
            }
        }
        (lo, hi)
    }

    /// Mask cropped to the occupied bounding box, with its extents.
    pub fn cropped(&self) -> ([usize; 3], Vec<u8>) {
        let (lo, hi) = self.occupied_bounds();
        let ext = [hi[0] - lo[0] + 1, hi[1] - lo[1] + 1, hi[2] - lo[2] + 1];
        let mut out = Vec::with_capacity(ext.iter().product());
        for k in 0..ext[2] {
            for j in 0..ext[1] {
                for i in 0..ext[0] {
                    out.push(self.mask[self.index(lo[0] + i, lo[1] + j, lo[2] + k)]);
                }
            }
        }
        (ext, out)
    }

    /// Copy of the set moved by a whole number of cells, on a grid enlarged
    /// to hold it.
    pub fn shifted_cells(&self, shift: [usize; 3]) -> Self {
        let mut n = self.dims;
        for a in 0..self.d {
            n[a] += shift[a];
        }
        let mut mask = vec![0u8; n.iter().product()];
        let [n0, n1, n2] = self.dims;
        for k in 0..n2 {
            for j in 0..n1 {
                for i in 0..n0 {
                    let dst = (i + shift[0]) + n[0] * ((j + shift[1]) + n[1] * (k + shift[2]));
                    mask[dst] = self.mask[self.index(i, j, k)];
                }
            }
        }
        VoxelSet { d: self.d, dims: n, h: self.h, origin: self.origin, mask }
    }

    /// Same cells with the grid origin moved by `v` (a rigid translation).
    pub fn translated(&self, v: &[f64]) -> Result<Self> {
        let v = point::from_slice(v, self.d)?;
        Ok(VoxelSet { origin: point::add(&self.origin, &v), ..self.clone() })
    }

    /// Textual header followed by one byte (0/1) per cell, x fastest.
    pub fn to_bytes(&self) -> Vec<u8> {
        let dims: Vec<String> = self.dims[..self.d].iter().map(|n| n.to_string()).collect();
        let origin: Vec<String> = self.origin[..self.d].iter().map(|x| format!("{x:e}")).collect();
        let mut out = format!(
            "voxelset 1\nd {}\ndims {}\nh {:e}\norigin {}\ndata\n",
            self.d,
            dims.join(" "),
            self.h,
            origin.join(" ")
        )
        .into_bytes();
        out.extend_from_slice(&self.mask);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = std::io::Cursor::new(bytes);
        let mut d = None;
        let mut dims = None;
        let mut h = None;
        let mut origin = None;
        let mut line = String::new();
        let mut first = true;
        loop {
            line.clear();
            if cur.read_line(&mut line)? == 0 {
                return Err(Error::invalid("voxel file ended before the data marker"));
            }
            let t = line.trim();
            if first {
                if t != "voxelset 1" {
                    return Err(Error::invalid("not a voxel file (bad magic line)"));
                }
                first = false;
                continue;
            }
            if t == "data" {
                break;
            }
            let mut it = t.split_whitespace();
            let key = it.next().unwrap_or("");
            let rest: Vec<&str> = it.collect();
            let nums = |v: &[&str]| -> Result<Vec<f64>> {
                v.iter().map(|s| s.parse::<f64>().map_err(|_| Error::invalid(format!("bad number '{s}'")))).collect()
            };
            match key {
                "d" => d = Some(nums(&rest)?.first().copied().unwrap_or(0.0) as usize),
                "dims" => dims = Some(nums(&rest)?.into_iter().map(|x| x as usize).collect::<Vec<_>>()),
                "h" => h = nums(&rest)?.first().copied(),
                "origin" => origin = Some(nums(&rest)?),
                other => return Err(Error::invalid(format!("unknown voxel header key '{other}'"))),
            }
        }
        let (Some(d), Some(dims), Some(h), Some(origin)) = (d, dims, h, origin) else {
            return Err(Error::invalid("voxel header needs d, dims, h and origin"));
        };
        let mut mask = Vec::new();
        cur.read_to_end(&mut mask)?;
        Self::new(d, &dims, h, &origin, mask)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

pub(crate) fn suggest_h(h: f64, cells: usize, d: usize) -> f64 {
    h * (cells as f64 / MAX_CELLS as f64).powf(1.0 / d as f64) * 1.01
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rasterized_square_is_exact() {
        let sq = AnalyticShape::rect([0.0, 0.0], [1.0, 1.0]);
        let v = VoxelSet::rasterize(&sq, 1.0 / 16.0).unwrap();
        assert_eq!(v.count(), 256);
        assert!((v.volume() - 1.0).abs() < 1e-15);
        assert!((v.perimeter() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn rasterized_disk_area() {
        let v = VoxelSet::rasterize(&AnalyticShape::disk([0.0, 0.0], 1.0), 1.0 / 128.0).unwrap();
        assert!((v.volume() - PI).abs() < 5e-3);
    }

    #[test]
    fn margin_is_enforced() {
        assert!(VoxelSet::new(1, &[3], 1.0, &[0.0], vec![1, 0, 0]).is_err());
        assert!(VoxelSet::new(1, &[3], 1.0, &[0.0], vec![0, 1, 0]).is_ok());
        assert!(VoxelSet::new(1, &[3], 1.0, &[0.0], vec![0, 0, 0]).is_err());
    }

    #[test]
    fn header_roundtrip() {
        let v = VoxelSet::rasterize(&AnalyticShape::disk([0.3, -0.2], 0.5), 0.1).unwrap();
        let w = VoxelSet::from_bytes(&v.to_bytes()).unwrap();
        assert_eq!(v, w);
        assert!(VoxelSet::from_bytes(b"voxelset 1\nd 1\ndims 3\nh 1\norigin 0\ncolor red\ndata\n\x00\x01\x00").is_err());
    }

    #[test]
    fn memory_bound_suggests_coarser_grid() {
        let e = VoxelSet::rasterize(&AnalyticShape::disk([0.0, 0.0], 1.0), 1e-5);
        match e {
            Err(Error::MemoryBound { suggested_h, .. }) => {
                assert!(suggested_h > 1e-5);
                assert!(VoxelSet::rasterize(&AnalyticShape::disk([0.0, 0.0], 1.0), suggested_h).is_ok());
            }
            other => panic!("expected memory bound, got {other:?}"),
        }
    }
}
